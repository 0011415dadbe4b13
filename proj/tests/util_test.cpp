// Small building blocks: matrices, delimited text, number formatting,
// linear algebra, run configuration, and report tables.
#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "saom/config.hpp"
#include "saom/csv.hpp"
#include "saom/linalg.hpp"
#include "saom/matrix.hpp"
#include "saom/report.hpp"

using namespace saom;

TEST(matrix, binary_basics) {
    binary_matrix x(4);
    EXPECT_EQ(x.dim(), 4);
    EXPECT_EQ(x.tie_count(), 0);
    x.set(0, 1, true);
    x.set(1, 0, true);
    x.set(2, 3, true);
    EXPECT_TRUE(x(0, 1));
    EXPECT_FALSE(x(1, 2));
    EXPECT_EQ(x.tie_count(), 3);
    EXPECT_EQ(x.out_degree(0), 1);
    EXPECT_EQ(x.in_degree(0), 1);
    EXPECT_EQ(x.in_degree(3), 1);

    binary_matrix y = x;
    EXPECT_EQ(x, y);
    EXPECT_EQ(x.hamming_distance(y), 0);
    y.set(2, 3, false);
    y.set(3, 2, true);
    EXPECT_EQ(x.hamming_distance(y), 2);
}

TEST(csv, splits_quoted_fields) {
    const auto f = csv::split_line("a,\"Other Asia, nes\",3,\"x\"\"y\"");
    ASSERT_EQ(f.size(), 4u);
    EXPECT_EQ(f[0], "a");
    EXPECT_EQ(f[1], "Other Asia, nes");
    EXPECT_EQ(f[2], "3");
    EXPECT_EQ(f[3], "x\"y");
}

TEST(csv, strips_carriage_returns) {
    const auto f = csv::split_line("a,b\r");
    ASSERT_EQ(f.size(), 2u);
    EXPECT_EQ(f[1], "b");
}

TEST(csv, quote_field_round_trips) {
    for (const std::string s : {"plain", "with,comma", "with\"quote", "with\nnewline", ""}) {
        const auto f = csv::split_line(csv::quote_field(s) + "," + csv::quote_field("tail"));
        ASSERT_EQ(f.size(), 2u);
        EXPECT_EQ(f[0], s);
        EXPECT_EQ(f[1], "tail");
    }
}

TEST(csv, format_double_round_trips_exactly) {
    for (double v : {0.0, 1.0, -1.5, 0.1, 1.0 / 3.0, 8.77, 1e-300, 6.02214076e23, -0.000123456789012345}) {
        const std::string s = csv::format_double(v);
        EXPECT_EQ(std::stod(s), v) << s;
    }
    // Shortest representation is preferred where it round-trips.
    EXPECT_EQ(csv::format_double(0.5), "0.5");
    EXPECT_EQ(csv::format_double(2.0), "2");
}

TEST(csv, read_file_with_and_without_header) {
    const std::filesystem::path p = std::filesystem::temp_directory_path() / "saom_csv_test.csv";
    {
        std::ofstream out(p);
        out << "a,b\n1,\"x,y\"\n2,z\n";
    }
    const csv::table t = csv::read_file(p.string());
    ASSERT_EQ(t.header.size(), 2u);
    EXPECT_EQ(t.column("b"), 1);
    EXPECT_FALSE(t.has_column("c"));
    ASSERT_EQ(t.rows.size(), 2u);
    EXPECT_EQ(t.rows[0][1], "x,y");

    const csv::table raw = csv::read_file(p.string(), false);
    ASSERT_EQ(raw.rows.size(), 3u);
    EXPECT_TRUE(raw.header.empty());
    std::filesystem::remove(p);
}

TEST(csv, to_double_rejects_garbage) {
    EXPECT_THROW(csv::to_double("abc", "field"), data_error);
    EXPECT_THROW(csv::to_double("", "field"), data_error);
    EXPECT_THROW(csv::to_int("1.5", "field"), data_error);
    EXPECT_DOUBLE_EQ(csv::to_double("-3.5e2", "field"), -350.0);
    EXPECT_EQ(csv::to_int("-7", "field"), -7);
}

TEST(linalg, solve_and_sandwich) {
    real_matrix A(2, 2);
    A(0, 0) = 2.0;
    A(1, 1) = 4.0;
    const auto x = solve_linear(A, {2.0, 8.0}, {"a", "b"});
    EXPECT_NEAR(x[0], 1.0, 1e-12);
    EXPECT_NEAR(x[1], 2.0, 1e-12);

    // D diagonal, Sigma identity: D^-1 Sigma D^-T has 1/d_k^2 on the diagonal.
    real_matrix S(2, 2);
    S(0, 0) = S(1, 1) = 1.0;
    const real_matrix V = sandwich_inverse(A, S, {"a", "b"});
    EXPECT_NEAR(V(0, 0), 0.25, 1e-12);
    EXPECT_NEAR(V(1, 1), 1.0 / 16.0, 1e-12);
    EXPECT_NEAR(V(0, 1), 0.0, 1e-12);
}

TEST(linalg, singular_matrix_names_offenders) {
    real_matrix A(2, 2);
    A(0, 0) = 1.0;
    A(0, 1) = 1.0;
    A(1, 0) = 1.0;
    A(1, 1) = 1.0;
    try {
        solve_linear(A, {1.0, 1.0}, {"alpha", "beta"});
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        EXPECT_NE(std::string(e.what()).find("singular"), std::string::npos);
    }
}

TEST(linalg, sample_covariance_matches_hand_computation) {
    // Two variables, three draws; covariance with the n-1 denominator.
    const std::vector<std::vector<double>> rows = {{1.0, 2.0}, {3.0, 6.0}, {5.0, 4.0}};
    const real_matrix C = sample_covariance(rows);
    EXPECT_NEAR(C(0, 0), 4.0, 1e-12);
    EXPECT_NEAR(C(1, 1), 4.0, 1e-12);
    EXPECT_NEAR(C(0, 1), 2.0, 1e-12);
    EXPECT_NEAR(C(1, 0), 2.0, 1e-12);
}

TEST(linalg, ols_exact_fit) {
    // y = 3 - 2 a + 0.5 b fitted exactly: coefficients recovered, R^2 = 1.
    std::vector<std::vector<double>> X;
    std::vector<double> y;
    for (double a : {0.0, 1.0, 2.0, 3.0})
        for (double b : {0.0, 1.0, 4.0}) {
            X.push_back({1.0, a, b});
            y.push_back(3.0 - 2.0 * a + 0.5 * b);
        }
    const ols_fit fit = fit_ols(X, y);
    EXPECT_NEAR(fit.coefficients[0], 3.0, 1e-10);
    EXPECT_NEAR(fit.coefficients[1], -2.0, 1e-10);
    EXPECT_NEAR(fit.coefficients[2], 0.5, 1e-10);
    EXPECT_NEAR(fit.r2, 1.0, 1e-12);
    EXPECT_NEAR(fit.adjusted_r2, 1.0, 1e-12);
}

TEST(linalg, ols_rejects_rank_deficient_design) {
    std::vector<std::vector<double>> X = {{1.0, 2.0, 4.0}, {1.0, 3.0, 6.0}, {1.0, 5.0, 10.0}};
    EXPECT_THROW(fit_ols(X, {1.0, 2.0, 3.0}), data_error);
}

TEST(config, parses_sections_and_types) {
    const run_config cfg = run_config::from_string(
        "[run]\nseed = 99\noutput_dir = out\n"
        "[model]\neffect = density evaluation\neffect = reciprocity evaluation beta=0.5 fixed\n"
        "[estimation]\nsubphases = 2\ninitial_gain = 0.4\n",
        "<test>");
    EXPECT_EQ(cfg.require_seed(), 99u);
    EXPECT_EQ(cfg.get_or("run", "output_dir", "x"), "out");
    EXPECT_EQ(cfg.get_int("estimation", "subphases", 4), 2);
    EXPECT_NEAR(cfg.get_double("estimation", "initial_gain", 0.2), 0.4, 1e-12);
    EXPECT_EQ(cfg.get_all("model", "effect").size(), 2u);
    EXPECT_FALSE(cfg.has("run", "nope"));
    EXPECT_EQ(cfg.hash(), run_config::from_string(cfg.raw_text(), "<other>").hash());
}

TEST(config, rejects_unknown_keys_and_sections) {
    EXPECT_THROW(run_config::from_string("[run]\nseeed = 1\n", "<t>"), config_error);
    EXPECT_THROW(run_config::from_string("[runs]\nseed = 1\n", "<t>"), config_error);
    EXPECT_THROW(run_config::from_string("[run]\nseed = 1\nseed = 2\n", "<t>"), config_error);
    try {
        run_config::from_string("[run]\nseed = 1\nbogus = 2\n", "<t>");
        FAIL() << "expected config_error";
    } catch (const config_error& e) {
        // Error message carries the file:line location for the user.
        EXPECT_NE(std::string(e.what()).find(":3:"), std::string::npos);
    }
}

TEST(config, effect_line_grammar) {
    effect_spec e = parse_effect_line("density evaluation");
    EXPECT_EQ(e.kind, effect_kind::density);
    EXPECT_EQ(e.param, parametrization::evaluation);
    EXPECT_FALSE(e.fixed);
    EXPECT_EQ(e.beta, 0.0);

    e = parse_effect_line("transitive_mediated_triads creation beta=0.33");
    EXPECT_EQ(e.kind, effect_kind::transitive_mediated_triads);
    EXPECT_EQ(e.param, parametrization::creation);
    EXPECT_NEAR(e.beta, 0.33, 1e-12);

    e = parse_effect_line("dyadic_covariate:distance evaluation beta=-0.31 fixed");
    EXPECT_EQ(e.kind, effect_kind::dyadic_covariate);
    EXPECT_EQ(e.covariate, "distance");
    EXPECT_TRUE(e.fixed);
    EXPECT_NEAR(e.beta, -0.31, 1e-12);

    e = parse_effect_line("outdeg_assortativity_sqrt evaluation");
    EXPECT_EQ(e.kind, effect_kind::outdeg_assortativity);
    EXPECT_EQ(e.variant, assort_variant::sqrt);
    EXPECT_EQ(e.label(), "outdeg_assortativity_sqrt");

    EXPECT_THROW(parse_effect_line("density"), config_error);
    EXPECT_THROW(parse_effect_line("density sideways"), config_error);
    EXPECT_THROW(parse_effect_line("gravity evaluation"), config_error);
}

TEST(config, list_parsing) {
    EXPECT_EQ(parse_int_list("1995, 2000,2005", "years"), (std::vector<int>{1995, 2000, 2005}));
    EXPECT_EQ(parse_double_list("0.5,1, 2.5", "t"), (std::vector<double>{0.5, 1.0, 2.5}));
    EXPECT_THROW(parse_int_list("1995,abc", "years"), config_error);
}

TEST(report, aligned_table_and_na) {
    EXPECT_EQ(format_fixed(1.23456, 2), "1.23");
    EXPECT_EQ(format_fixed(std::nan(""), 3), "NA");
    text_table t;
    t.header = {"name", "value"};
    t.add_row({"alpha", "1.00"});
    t.add_row({"b", "-22.50"});
    const std::string s = t.aligned();
    // Right-aligned numbers line up on the last digit; no trailing spaces.
    EXPECT_NE(s.find("alpha    1.00"), std::string::npos);
    EXPECT_NE(s.find("b      -22.50"), std::string::npos);
    EXPECT_EQ(s.find(" \n"), std::string::npos);
    EXPECT_EQ(t.csv(), "name,value\nalpha,1.00\nb,-22.50\n");
}
