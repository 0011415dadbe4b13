// Command-line front end: prep, describe, nonparam, estimate, simulate,
// magnitude, sweep. Every artifact directory gets a metadata.json (config
// hash, seed, tool version, RNG algorithm) sufficient to re-run the stage
// bit-identically; no timestamps or machine identifiers are recorded.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "saom/config.hpp"
#include "saom/estimate.hpp"
#include "saom/nonparam.hpp"
#include "saom/panel_io.hpp"
#include "saom/report.hpp"
#include "saom/simulate.hpp"
#include "saom/tradeprep.hpp"
#include "saom/version.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct cli_state {
    std::string config_path;
    std::string out_override;
    std::vector<double> betas;   // magnitude
    std::vector<double> deltas;  // magnitude
};

fs::path resolve_output_dir(const saom::run_config* cfg, const std::string& cli_out) {
    if (!cli_out.empty()) return cli_out;
    if (const char* env = std::getenv("SAOM_OUTPUT_DIR"); env && *env) return env;
    if (cfg) return cfg->get_or("run", "output_dir", "saom_out");
    return "saom_out";
}

void write_metadata(const fs::path& dir, const std::string& subcommand, const saom::run_config* cfg,
                    std::optional<std::uint64_t> seed, json extra = json::object()) {
    json meta;
    meta["tool"] = "saom";
    meta["version"] = saom::version;
    meta["subcommand"] = subcommand;
    meta["rng_algorithm"] = saom::rng::algorithm;
    if (cfg) meta["config_hash"] = cfg->hash();
    if (seed) meta["seed"] = *seed;
    if (!extra.empty()) meta["parameters"] = extra;
    saom::detail::write_text_file(dir / "metadata.json", meta.dump(2) + "\n");
}

void write_table(const fs::path& dir, const std::string& stem, const saom::text_table& table) {
    saom::detail::write_text_file(dir / (stem + ".txt"), table.aligned());
    saom::detail::write_text_file(dir / (stem + ".csv"), table.csv());
}

saom::loaded_panel load_panel_from_config(const saom::run_config& cfg) {
    if (!cfg.has("panel", "path"))
        throw saom::config_error("[panel] path is required for this subcommand");
    return saom::load_panel(cfg.require("panel", "path"));
}

// ---------------------------------------------------------------------------
// prep

struct prep_products {
    saom::network_panel panel;
    saom::covariate_set covariates;
    saom::provenance_log provenance;
    saom::market_size_model model;
    bool model_used = false;
};

saom::flow_columns flow_columns_from_config(const saom::run_config& cfg) {
    saom::flow_columns cols;
    cols.reporter = cfg.get_or("prep", "col_reporter", cols.reporter);
    cols.partner = cfg.get_or("prep", "col_partner", cols.partner);
    cols.year = cfg.get_or("prep", "col_year", cols.year);
    cols.value = cfg.get_or("prep", "col_value", cols.value);
    cols.re_exports = cfg.get_or("prep", "col_re_exports", cols.re_exports);
    cols.direction = cfg.get_or("prep", "col_direction", cols.direction);
    cols.commodity = cfg.get_or("prep", "col_commodity", cols.commodity);
    return cols;
}

// Dichotomizes at `percent_override` (if given) instead of the configured
// relative threshold; the sweep subcommand reuses the whole pipeline per
// threshold this way.
prep_products run_prep(const saom::run_config& cfg, std::optional<double> percent_override = {}) {
    if (!cfg.has_section("prep")) throw saom::config_error("[prep] section is required");
    prep_products out;

    const std::string scheme = cfg.get_or("prep", "scheme", "relative");
    if (scheme != "relative" && scheme != "absolute")
        throw saom::config_error("prep.scheme must be 'relative' or 'absolute'");
    const std::vector<int> years = saom::parse_int_list(cfg.require("prep", "years"), "prep.years");
    if (years.empty()) throw saom::config_error("prep.years must list at least one year");

    std::optional<std::string> commodity;
    if (auto c = cfg.get("prep", "commodity")) commodity = *c;
    std::vector<saom::flow_record> flows =
        saom::read_flows(cfg.require("prep", "flows"), flow_columns_from_config(cfg), commodity, out.provenance);

    saom::continuity_result continuity;
    if (auto path = cfg.get("prep", "continuity"))
        continuity = saom::continuity_map(saom::read_continuity_spec(*path));
    flows = saom::apply_renames(std::move(flows), continuity.rename);
    flows = saom::resolve_partners(std::move(flows), out.provenance);
    const saom::yearly_flows net = saom::aggregate_net_flows(flows, out.provenance);

    saom::country_stats stats;
    if (auto path = cfg.get("prep", "country_stats")) stats = saom::read_country_stats(*path);

    const bool has_calibration = cfg.has("prep", "market_calibration");
    const bool has_coefficients = cfg.has("prep", "market_intercept") ||
                                  cfg.has("prep", "market_coef_gdp") || cfg.has("prep", "market_coef_pop");
    if (has_calibration && has_coefficients)
        throw saom::config_error("give either prep.market_calibration or explicit market_* coefficients, not both");
    if (has_calibration) {
        out.model = saom::fit_market_model(saom::read_market_observations(cfg.require("prep", "market_calibration")));
        out.model_used = true;
    } else if (has_coefficients) {
        out.model.intercept = cfg.get_double("prep", "market_intercept", 0.0);
        out.model.coef_ln_gdp_per_capita = cfg.get_double("prep", "market_coef_gdp", 0.0);
        out.model.coef_ln_population = cfg.get_double("prep", "market_coef_pop", 0.0);
        out.model_used = true;
    }

    if (scheme == "relative") {
        if (!out.model_used)
            throw saom::config_error("relative scheme needs a market model (calibration file or coefficients)");
        if (stats.empty()) throw saom::config_error("relative scheme needs prep.country_stats");
        const double a = percent_override.value_or(cfg.get_double("prep", "relative_percent", 1.0));
        out.panel = saom::dichotomize_relative(net, out.model, a, stats, years, out.provenance,
                                               continuity.events);
    } else {
        const double coverage = cfg.get_double("prep", "absolute_coverage", 0.95);
        out.panel = saom::dichotomize_absolute(net, coverage, years, out.provenance, continuity.events);
    }

    if (out.model_used && !stats.empty())
        out.covariates.add_actor("log_market_size",
                                 saom::log_market_size_covariate(out.panel, out.model, stats, out.provenance));
    for (const std::string& entry : cfg.get_all("prep", "dyadic_covariate")) {
        const auto eq = entry.find('=');
        if (eq == std::string::npos)
            throw saom::config_error("prep.dyadic_covariate must be '<name>=<path>', got '" + entry + "'");
        out.covariates.add_dyadic(entry.substr(0, eq),
                                  saom::read_dyadic_covariate(entry.substr(eq + 1), out.panel));
    }
    return out;
}

int cmd_prep(const cli_state& st) {
    const saom::run_config cfg = saom::run_config::from_file(st.config_path);
    const std::uint64_t seed = cfg.require_seed();  // recorded; prep itself is deterministic
    prep_products products = run_prep(cfg);

    const fs::path outdir = resolve_output_dir(&cfg, st.out_override);
    const fs::path panel_dir = outdir / "panel";
    const fs::path prep_dir = outdir / "prep";
    fs::create_directories(prep_dir);
    saom::save_panel(products.panel, products.covariates, panel_dir);
    saom::detail::write_text_file(prep_dir / "provenance.jsonl", saom::to_jsonl(products.provenance));
    json extra;
    extra["scheme"] = cfg.get_or("prep", "scheme", "relative");
    extra["countries"] = products.panel.actor_count();
    extra["waves"] = products.panel.wave_count();
    if (products.model_used) {
        extra["market_model"] = {{"intercept", products.model.intercept},
                                 {"coef_ln_gdp_per_capita", products.model.coef_ln_gdp_per_capita},
                                 {"coef_ln_population", products.model.coef_ln_population},
                                 {"n", products.model.n},
                                 {"adjusted_r2", products.model.adjusted_r2}};
    }
    write_metadata(prep_dir, "prep", &cfg, seed, extra);
    write_metadata(panel_dir, "prep", &cfg, seed);
    std::cout << "panel: " << products.panel.actor_count() << " countries, " << products.panel.wave_count()
              << " waves -> " << panel_dir.string() << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// describe

int cmd_describe(const cli_state& st) {
    const saom::run_config cfg = saom::run_config::from_file(st.config_path);
    const saom::loaded_panel loaded = load_panel_from_config(cfg);

    saom::text_table table;
    table.title = "Network descriptives";
    table.header = {"year", "ties", "max_out_degree", "out_degree_1", "out_degree_0"};
    json rows = json::array();
    for (const saom::wave_summary& s : saom::describe(loaded.panel)) {
        table.add_row({std::to_string(s.year), std::to_string(s.tie_count), std::to_string(s.max_out_degree),
                       std::to_string(s.actors_with_out_degree_1), std::to_string(s.actors_with_out_degree_0)});
        rows.push_back({{"year", s.year},
                        {"ties", s.tie_count},
                        {"max_out_degree", s.max_out_degree},
                        {"out_degree_1", s.actors_with_out_degree_1},
                        {"out_degree_0", s.actors_with_out_degree_0}});
    }
    std::cout << table.aligned();

    const fs::path dir = resolve_output_dir(&cfg, st.out_override) / "describe";
    fs::create_directories(dir);
    write_table(dir, "describe", table);
    saom::detail::write_text_file(dir / "describe.json", json{{"waves", rows}}.dump(2) + "\n");
    write_metadata(dir, "describe", &cfg, cfg.require_seed());
    return 0;
}

// ---------------------------------------------------------------------------
// nonparam

int cmd_nonparam(const cli_state& st) {
    const saom::run_config cfg = saom::run_config::from_file(st.config_path);
    const saom::loaded_panel loaded = load_panel_from_config(cfg);
    const std::uint64_t seed = cfg.require_seed();
    const std::string method_name = cfg.get_or("nonparam", "p_method", "permutation");
    saom::ks_p_method method;
    if (method_name == "permutation")
        method = saom::ks_p_method::permutation;
    else if (method_name == "asymptotic")
        method = saom::ks_p_method::asymptotic;
    else
        throw saom::config_error("nonparam.p_method must be 'permutation' or 'asymptotic'");
    const int resamples = static_cast<int>(cfg.get_int("nonparam", "resamples", 10000));

    const saom::influence_report report = saom::influence_table(loaded.panel, method, resamples, seed);

    saom::text_table cats;
    cats.title = "Common history by tie category";
    cats.header = {"category", "n", "mean_total_years", "mean_duration", "mean_count"};
    json jcats = json::array();
    for (const auto& c : report.categories) {
        cats.add_row({saom::to_string(c.category), std::to_string(c.n), saom::format_fixed(c.mean_total, 3),
                      saom::format_fixed(c.mean_duration, 3), saom::format_fixed(c.mean_count, 3)});
        jcats.push_back({{"category", saom::to_string(c.category)},
                         {"n", c.n},
                         {"mean_total_years", c.mean_total},
                         {"mean_duration", c.mean_duration},
                         {"mean_count", c.mean_count}});
    }

    saom::text_table cmps;
    cmps.title = "Two-sample KS comparisons";
    cmps.header = {"comparison", "measure", "D", "p"};
    json jcmps = json::array();
    for (const auto& c : report.comparisons) {
        const std::string name = std::string(saom::to_string(c.first)) + "-vs-" + saom::to_string(c.second);
        cmps.add_row({name, c.measure, c.applicable ? saom::format_fixed(c.result.d, 4) : "NA",
                      c.applicable ? saom::format_fixed(c.result.p_value, 4) : "NA"});
        json j = {{"comparison", name}, {"measure", c.measure}, {"applicable", c.applicable}};
        if (c.applicable) {
            j["d"] = c.result.d;
            j["p"] = c.result.p_value;
        }
        jcmps.push_back(j);
    }

    std::cout << cats.aligned() << "\n" << cmps.aligned();
    const fs::path dir = resolve_output_dir(&cfg, st.out_override) / "nonparam";
    fs::create_directories(dir);
    write_table(dir, "categories", cats);
    write_table(dir, "comparisons", cmps);
    saom::detail::write_text_file(
        dir / "nonparam.json",
        json{{"categories", jcats}, {"comparisons", jcmps}, {"p_method", method_name}, {"resamples", resamples}}
                .dump(2) +
            "\n");
    write_metadata(dir, "nonparam", &cfg, seed,
                   json{{"p_method", method_name}, {"resamples", resamples}});
    return 0;
}

// ---------------------------------------------------------------------------
// estimate

json estimation_to_json(const saom::estimation_result& res, const saom::network_panel& panel) {
    json jeffects = json::array();
    for (std::size_t k = 0; k < res.effects.size(); ++k) {
        const saom::effect_spec& e = res.effects[k];
        json j = {{"effect", e.label()},
                  {"parametrization", saom::to_string(e.param)},
                  {"fixed", e.fixed},
                  {"estimate", res.beta_hat[k]},
                  {"t_convergence", res.t_convergence[k]},
                  {"observed_statistic", res.observed_totals[k]},
                  {"simulated_mean", res.simulated_means[k]},
                  {"simulated_sd", res.simulated_sds[k]}};
        if (!std::isnan(res.standard_errors[k])) j["standard_error"] = res.standard_errors[k];
        jeffects.push_back(j);
    }
    json jrates = json::array();
    for (int t = 0; t < res.rates_hat.periods(); ++t)
        jrates.push_back({{"period", std::to_string(panel.year(t)) + "-" + std::to_string(panel.year(t + 1))},
                          {"rate", res.rates_hat[t]}});
    return json{{"effects", jeffects},
                {"rates", jrates},
                {"converged", res.converged},
                {"iterations", res.iterations_total},
                {"subphases", res.subphases_run},
                {"restarts", res.restarts_used},
                {"phase3_chains", res.phase3_chains},
                {"steps_clipped", res.steps_clipped},
                {"notes", res.notes}};
}

saom::text_table estimation_to_table(const saom::estimation_result& res, const saom::network_panel& panel) {
    saom::text_table table;
    table.title = "Model estimates";
    table.header = {"effect", "parametrization", "estimate", "s.e.", "t_conv", "fixed"};
    for (std::size_t k = 0; k < res.effects.size(); ++k) {
        const saom::effect_spec& e = res.effects[k];
        table.add_row({e.label(), saom::to_string(e.param), saom::format_fixed(res.beta_hat[k], 4),
                       saom::format_fixed(res.standard_errors[k], 4),
                       saom::format_fixed(res.t_convergence[k], 4), e.fixed ? "yes" : "no"});
    }
    for (int t = 0; t < res.rates_hat.periods(); ++t)
        table.add_row({"rate " + std::to_string(panel.year(t)) + "-" + std::to_string(panel.year(t + 1)), "rate",
                       saom::format_fixed(res.rates_hat[t], 4), "", "", ""});
    return table;
}

int cmd_estimate(const cli_state& st) {
    const saom::run_config cfg = saom::run_config::from_file(st.config_path);
    const saom::loaded_panel loaded = load_panel_from_config(cfg);
    const std::uint64_t seed = cfg.require_seed();
    const std::vector<saom::effect_spec> effects = saom::parse_effects(cfg);
    const saom::estimation_options opt = saom::parse_estimation_options(cfg);

    const saom::estimation_result res = saom::estimate(loaded.panel, loaded.covariates, effects, seed, opt);

    const saom::text_table table = estimation_to_table(res, loaded.panel);
    std::cout << table.aligned();
    std::cout << (res.converged ? "converged\n" : "NOT converged\n");
    for (const std::string& note : res.notes) std::cout << "note: " << note << "\n";

    const fs::path dir = resolve_output_dir(&cfg, st.out_override) / "estimate";
    fs::create_directories(dir);
    write_table(dir, "estimate", table);
    saom::detail::write_text_file(dir / "estimate.json", estimation_to_json(res, loaded.panel).dump(2) + "\n");
    write_metadata(dir, "estimate", &cfg, seed,
                   json{{"phase3_chains", opt.phase3_chains}, {"subphases", opt.subphases}});
    return res.converged ? 0 : 3;
}

// ---------------------------------------------------------------------------
// simulate

int cmd_simulate(const cli_state& st) {
    const saom::run_config cfg = saom::run_config::from_file(st.config_path);
    const saom::loaded_panel loaded = load_panel_from_config(cfg);
    const std::uint64_t seed = cfg.require_seed();
    std::vector<saom::effect_spec> effects = saom::parse_effects(cfg);
    saom::validate_effects(effects, loaded.covariates);
    if (!cfg.has("model", "rates"))
        throw saom::config_error("[model] rates (one per period) is required for simulate");
    const std::vector<double> rate_values = saom::parse_double_list(cfg.require("model", "rates"), "model.rates");
    if (static_cast<int>(rate_values.size()) != loaded.panel.wave_count() - 1)
        throw saom::config_error("model.rates needs exactly " +
                                 std::to_string(loaded.panel.wave_count() - 1) + " entries");
    const saom::rate_schedule rates(rate_values);
    const int chains = static_cast<int>(cfg.get_int("simulation", "chains", 100));
    if (chains < 1) throw saom::config_error("simulation.chains must be >= 1");

    const saom::panel_simulation sim =
        saom::simulate_panel(loaded.panel, loaded.covariates, effects, rates, chains, seed);

    // Per-chain statistics, long form.
    std::string per_chain = "period,chain,effect,statistic,changed_dyads\n";
    for (std::size_t t = 0; t < sim.periods.size(); ++t) {
        const std::string period = std::to_string(loaded.panel.year(int(t))) + "-" +
                                   std::to_string(loaded.panel.year(int(t) + 1));
        for (std::size_t c = 0; c < sim.periods[t].per_chain.size(); ++c)
            for (std::size_t k = 0; k < effects.size(); ++k)
                per_chain += period + "," + std::to_string(c) + "," + saom::csv::quote_field(effects[k].label()) +
                             "," + saom::csv::format_double(sim.periods[t].per_chain[c][k]) + "," +
                             std::to_string(sim.periods[t].per_chain_changed[c]) + "\n";
    }

    saom::text_table agg;
    agg.title = "Simulated change statistics (mean over chains)";
    agg.header = {"period", "effect", "observed", "mean", "sd"};
    json jperiods = json::array();
    for (std::size_t t = 0; t < sim.periods.size(); ++t) {
        const std::string period = std::to_string(loaded.panel.year(int(t))) + "-" +
                                   std::to_string(loaded.panel.year(int(t) + 1));
        const std::vector<double> obs =
            saom::observed_period_statistics(loaded.panel, loaded.covariates, effects, int(t));
        json jstats = json::array();
        for (std::size_t k = 0; k < effects.size(); ++k) {
            const double sd = sim.periods[t].covariance_defined
                                  ? std::sqrt(std::max(0.0, sim.periods[t].covariance(int(k), int(k))))
                                  : 0.0;
            agg.add_row({period, effects[k].label(), saom::format_fixed(obs[k], 3),
                         saom::format_fixed(sim.periods[t].mean[k], 3),
                         sim.periods[t].covariance_defined ? saom::format_fixed(sd, 3) : "NA"});
            jstats.push_back({{"effect", effects[k].label()},
                              {"observed", obs[k]},
                              {"mean", sim.periods[t].mean[k]},
                              {"sd", sim.periods[t].covariance_defined ? json(sd) : json()}});
        }
        jperiods.push_back({{"period", period},
                            {"statistics", jstats},
                            {"mean_changed_dyads", sim.periods[t].mean_changed},
                            {"covariance_defined", sim.periods[t].covariance_defined}});
    }
    std::cout << agg.aligned();

    const fs::path dir = resolve_output_dir(&cfg, st.out_override) / "simulate";
    fs::create_directories(dir);
    saom::detail::write_text_file(dir / "per_chain.csv", per_chain);
    write_table(dir, "aggregate", agg);
    json sim_meta = {{"chains", chains}, {"rates", rate_values}, {"seed", seed}, {"periods", jperiods}};
    saom::detail::write_text_file(dir / "simulate.json", sim_meta.dump(2) + "\n");
    write_metadata(dir, "simulate", &cfg, seed, json{{"chains", chains}, {"rates", rate_values}});
    return 0;
}

// ---------------------------------------------------------------------------
// magnitude

int cmd_magnitude(const cli_state& st) {
    if (st.betas.empty() || st.deltas.empty())
        throw saom::config_error("magnitude needs at least one --beta and one --delta");
    saom::text_table table;
    table.title = "Effect magnitudes exp(beta * delta_s)";
    table.header = {"beta", "delta_s", "magnitude"};
    json jrows = json::array();
    for (double beta : st.betas)
        for (double delta : st.deltas) {
            const double m = saom::effect_magnitude(beta, delta);
            table.add_row({saom::format_fixed(beta, 4), saom::format_fixed(delta, 4), saom::format_fixed(m, 2)});
            jrows.push_back({{"beta", beta}, {"delta_s", delta}, {"magnitude", m}});
        }
    std::cout << table.aligned();

    if (!st.out_override.empty() || std::getenv("SAOM_OUTPUT_DIR")) {
        const fs::path dir = resolve_output_dir(nullptr, st.out_override) / "magnitude";
        fs::create_directories(dir);
        // CSV keeps full precision; the aligned table rounds for reading.
        std::string csv = "beta,delta_s,magnitude\n";
        for (const auto& row : jrows)
            csv += saom::csv::format_double(row["beta"].get<double>()) + "," +
                   saom::csv::format_double(row["delta_s"].get<double>()) + "," +
                   saom::csv::format_double(row["magnitude"].get<double>()) + "\n";
        saom::detail::write_text_file(dir / "magnitude.csv", csv);
        saom::detail::write_text_file(dir / "magnitude.txt", table.aligned());
        saom::detail::write_text_file(dir / "magnitude.json", json{{"rows", jrows}}.dump(2) + "\n");
        write_metadata(dir, "magnitude", nullptr, std::nullopt);
    }
    return 0;
}

// ---------------------------------------------------------------------------
// sweep

int cmd_sweep(const cli_state& st) {
    const saom::run_config cfg = saom::run_config::from_file(st.config_path);
    const std::uint64_t seed = cfg.require_seed();
    if (cfg.get_or("prep", "scheme", "relative") != "relative")
        throw saom::config_error("sweep requires the relative dichotomization scheme");
    if (!cfg.has("sweep", "thresholds")) throw saom::config_error("[sweep] thresholds is required");
    const std::vector<double> thresholds =
        saom::parse_double_list(cfg.require("sweep", "thresholds"), "sweep.thresholds");
    if (thresholds.empty()) throw saom::config_error("sweep.thresholds must list at least one value");
    const std::vector<saom::effect_spec> effects = saom::parse_effects(cfg);
    bool has_tmt = false;
    for (const auto& e : effects) has_tmt |= e.kind == saom::effect_kind::transitive_mediated_triads;
    if (!has_tmt)
        throw saom::config_error("sweep reports the transitive_mediated_triads effect; add it to [model]");
    const saom::estimation_options opt = saom::parse_estimation_options(cfg);

    saom::text_table table;
    table.title = "Tie-inclusion threshold sweep";
    table.header = {"threshold_percent", "effect", "parametrization", "estimate", "s.e.", "converged"};
    json jrows = json::array();
    for (std::size_t idx = 0; idx < thresholds.size(); ++idx) {
        const double a = thresholds[idx];
        const std::uint64_t run_seed = saom::rng::derive(seed, 0x5EED + idx);
        std::string error;
        try {
            const prep_products products = run_prep(cfg, a);
            const saom::estimation_result res =
                saom::estimate(products.panel, products.covariates, effects, run_seed, opt);
            for (std::size_t k = 0; k < res.effects.size(); ++k) {
                if (res.effects[k].kind != saom::effect_kind::transitive_mediated_triads) continue;
                table.add_row({saom::format_fixed(a, 2), res.effects[k].label(),
                               saom::to_string(res.effects[k].param), saom::format_fixed(res.beta_hat[k], 4),
                               saom::format_fixed(res.standard_errors[k], 4), res.converged ? "yes" : "no"});
                json j = {{"threshold_percent", a},
                          {"effect", res.effects[k].label()},
                          {"parametrization", saom::to_string(res.effects[k].param)},
                          {"estimate", res.beta_hat[k]},
                          {"converged", res.converged}};
                if (!std::isnan(res.standard_errors[k])) j["standard_error"] = res.standard_errors[k];
                jrows.push_back(j);
            }
            continue;
        } catch (const saom::error& ex) {
            error = ex.what();
        }
        table.add_row({saom::format_fixed(a, 2), "-", "-", "NA", "NA", "error"});
        jrows.push_back({{"threshold_percent", a}, {"error", error}});
    }
    std::cout << table.aligned();

    const fs::path dir = resolve_output_dir(&cfg, st.out_override) / "sweep";
    fs::create_directories(dir);
    write_table(dir, "sweep", table);
    saom::detail::write_text_file(dir / "sweep.json", json{{"rows", jrows}}.dump(2) + "\n");
    write_metadata(dir, "sweep", &cfg, seed, json{{"thresholds", thresholds}});
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Actor-oriented longitudinal network models for trade panels"};
    app.set_version_flag("--version", std::string("saom ") + saom::version);
    app.require_subcommand(1);

    cli_state st;
    auto add_config = [&st](CLI::App* sub, bool required = true) {
        auto* opt = sub->add_option("--config", st.config_path, "Run configuration file (INI)");
        if (required) opt->required();
        sub->add_option("--out", st.out_override, "Output directory (overrides config and SAOM_OUTPUT_DIR)");
    };

    CLI::App* prep = app.add_subcommand("prep", "Dichotomize raw trade flows into a network panel");
    add_config(prep);
    CLI::App* describe = app.add_subcommand("describe", "Per-wave network descriptives");
    add_config(describe);
    CLI::App* nonparam = app.add_subcommand("nonparam", "Common-influence history by tie category, with KS tests");
    add_config(nonparam);
    CLI::App* estimate = app.add_subcommand("estimate", "Method-of-moments estimation of the configured model");
    add_config(estimate);
    CLI::App* simulate = app.add_subcommand("simulate", "Forward-simulate the configured model between waves");
    add_config(simulate);
    CLI::App* sweep = app.add_subcommand("sweep", "Re-prep and re-estimate across tie-inclusion thresholds");
    add_config(sweep);
    CLI::App* magnitude = app.add_subcommand("magnitude", "exp(beta * delta_s) odds multipliers");
    magnitude->add_option("--beta", st.betas, "Effect parameter(s)")->required();
    magnitude->add_option("--delta", st.deltas, "Statistic change(s)")->required();
    magnitude->add_option("--out", st.out_override, "Optional output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (prep->parsed()) return cmd_prep(st);
        if (describe->parsed()) return cmd_describe(st);
        if (nonparam->parsed()) return cmd_nonparam(st);
        if (estimate->parsed()) return cmd_estimate(st);
        if (simulate->parsed()) return cmd_simulate(st);
        if (sweep->parsed()) return cmd_sweep(st);
        if (magnitude->parsed()) return cmd_magnitude(st);
    } catch (const saom::config_error& ex) {
        std::cerr << "config error: " << ex.what() << "\n";
        return 1;
    } catch (const saom::convergence_error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 3;
    } catch (const saom::data_error& ex) {
        std::cerr << "data error: " << ex.what() << "\n";
        return 2;
    } catch (const saom::error& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 2;
    }
    return 0;
}
