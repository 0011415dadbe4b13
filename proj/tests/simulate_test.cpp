// Micro-step choice probabilities against a naive softmax oracle, empirical
// frequencies, masks, determinism, and the exact two-actor stationary
// distribution of the density-only process.
#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "saom/effects.hpp"
#include "saom/rng.hpp"
#include "saom/simulate.hpp"
#include "support/synth.hpp"

using namespace saom;

namespace {

const covariate_set no_covs;

std::vector<effect_spec> density_recip(double b_density, double b_recip) {
    effect_spec d;
    d.kind = effect_kind::density;
    d.beta = b_density;
    effect_spec r;
    r.kind = effect_kind::reciprocity;
    r.beta = b_recip;
    return {d, r};
}

// Naive oracle: score every alternative by full recomputation of the gated
// objective on the post-choice network, then normalize.
std::vector<double> oracle_probabilities(const binary_matrix& x, const binary_matrix& mask,
                                         const covariate_set& covs, int wave,
                                         const std::vector<effect_spec>& effects, int i) {
    const int n = x.dim();
    std::vector<double> f(std::size_t(n) + 1, 0.0);
    std::vector<bool> allowed(std::size_t(n) + 1, false);
    f[0] = objective(x, covs, wave, i, effects, choice_kind::keep);
    allowed[0] = true;
    for (int j = 0; j < n; ++j) {
        if (j == i || mask(i, j)) continue;
        binary_matrix y = x;
        y.set(i, j, !x(i, j));
        f[std::size_t(j) + 1] =
            objective(y, covs, wave, i, effects, x(i, j) ? choice_kind::del : choice_kind::add);
        allowed[std::size_t(j) + 1] = true;
    }
    double zmax = f[0];
    for (std::size_t a = 0; a < f.size(); ++a)
        if (allowed[a]) zmax = std::max(zmax, f[a]);
    double z = 0.0;
    std::vector<double> p(f.size(), 0.0);
    for (std::size_t a = 0; a < f.size(); ++a)
        if (allowed[a]) z += p[a] = std::exp(f[a] - zmax);
    for (double& v : p) v /= z;
    return p;
}

}  // namespace

TEST(simulate, probabilities_match_oracle_and_sum_to_one) {
    rng gen(61);
    std::vector<effect_spec> effects = density_recip(-0.8, 0.9);
    effect_spec cr;
    cr.kind = effect_kind::transitive_mediated_triads;
    cr.param = parametrization::creation;
    cr.beta = 0.4;
    effects.push_back(cr);
    effect_spec en;
    en.kind = effect_kind::reciprocity;
    en.param = parametrization::endowment;
    en.beta = 0.6;
    effects.push_back(en);

    for (int rep = 0; rep < 20; ++rep) {
        const int n = 4 + int(gen.uniform_int(5));
        const binary_matrix x = synth::random_graph(n, 0.35, gen);
        binary_matrix mask(n);
        if (rep % 2) mask.set(0, 1, true);
        for (int i = 0; i < n; ++i) {
            const auto p = ministep_probabilities(x, mask, no_covs, 0, effects, i);
            const auto want = oracle_probabilities(x, mask, no_covs, 0, effects, i);
            ASSERT_EQ(p.size(), std::size_t(n) + 1);
            double sum = 0.0;
            for (std::size_t a = 0; a < p.size(); ++a) {
                sum += p[a];
                EXPECT_NEAR(p[a], want[a], 1e-12) << "actor " << i << " alt " << a;
            }
            EXPECT_NEAR(sum, 1.0, 1e-12);
            EXPECT_EQ(p[std::size_t(i) + 1], 0.0);  // self tie never offered
            if (rep % 2 && i == 0) {
                EXPECT_EQ(p[2], 0.0);  // masked dyad never offered
            }
        }
    }
}

TEST(simulate, zero_parameters_give_uniform_choice) {
    effect_spec d;
    d.kind = effect_kind::density;  // beta = 0
    binary_matrix x(5);
    x.set(0, 3, true);
    const auto p = ministep_probabilities(x, binary_matrix(5), no_covs, 0, {d}, 0);
    for (int a = 0; a < 6; ++a) {
        if (a != 1) {
            EXPECT_NEAR(p[a], 0.2, 1e-12);  // keep + 4 toggles, uniform
        }
    }
}

TEST(simulate, two_actor_density_probabilities_are_exact) {
    // One cell per actor: from an empty row the probability of creating the
    // tie is e^b / (1 + e^b); from a full row, keeping it is e^b / (1 + e^b).
    const double b = -1.0;
    std::vector<effect_spec> effects = density_recip(b, 0.0);
    effects.pop_back();
    binary_matrix empty(2);
    auto p = ministep_probabilities(empty, binary_matrix(2), no_covs, 0, effects, 0);
    EXPECT_NEAR(p[2], std::exp(b) / (1.0 + std::exp(b)), 1e-12);
    EXPECT_NEAR(p[0], 1.0 / (1.0 + std::exp(b)), 1e-12);
    binary_matrix full(2);
    full.set(0, 1, true);
    p = ministep_probabilities(full, binary_matrix(2), no_covs, 0, effects, 0);
    EXPECT_NEAR(p[0], std::exp(b) / (1.0 + std::exp(b)), 1e-12);
    EXPECT_NEAR(p[2], 1.0 / (1.0 + std::exp(b)), 1e-12);
}

TEST(simulate, ministep_frequencies_match_probabilities) {
    rng pick(8675309);
    const std::vector<effect_spec> effects = density_recip(-0.5, 1.2);
    binary_matrix x(3);
    x.set(0, 1, true);
    x.set(1, 0, true);
    x.set(2, 0, true);
    const binary_matrix mask(3);

    // (actor, alternative) histogram over many draws from the same state.
    const int n = 3, reps = 150000;
    std::vector<long> counts(std::size_t(n) * (n + 1), 0);
    for (int r = 0; r < reps; ++r) {
        binary_matrix y = x;
        const ministep_result ms = ministep(y, mask, no_covs, 0, effects, pick);
        const int alt = ms.target < 0 ? 0 : ms.target + 1;
        ++counts[std::size_t(ms.actor) * (n + 1) + alt];
    }
    for (int i = 0; i < n; ++i) {
        const auto p = ministep_probabilities(x, mask, no_covs, 0, effects, i);
        for (int a = 0; a <= n; ++a) {
            const double want = p[a] / n;  // uniform actor choice
            const double got = double(counts[std::size_t(i) * (n + 1) + a]) / reps;
            EXPECT_NEAR(got, want, 0.006) << "actor " << i << " alt " << a;
        }
    }
}

TEST(simulate, fully_masked_actor_keeps_state) {
    effect_spec d;
    d.kind = effect_kind::density;
    d.beta = 3.0;  // would otherwise add ties eagerly
    binary_matrix mask(2);
    mask.set(0, 1, true);
    mask.set(1, 0, true);
    binary_matrix x(2);
    rng gen(4);
    for (int s = 0; s < 50; ++s) {
        const ministep_result ms = ministep(x, mask, no_covs, 0, {d}, gen);
        EXPECT_EQ(ms.target, -1);
    }
    EXPECT_EQ(x.tie_count(), 0);
}

TEST(simulate, period_mask_is_union_of_wave_masks) {
    // c2 is born at wave 1 (masked in wave 0); c0 dies at wave 1 (masked in
    // waves 1 and 2). A period spanning the event masks both endpoints.
    composition_event birth{"c2", composition_event::kind::birth, "", 1};
    composition_event death{"c0", composition_event::kind::death, "", 1};
    const network_panel p = synth::panel_from_waves(
        {binary_matrix(4), binary_matrix(4), binary_matrix(4)}, {birth, death});
    const binary_matrix m0 = period_mask(p, 0);
    EXPECT_TRUE(m0(2, 1));   // born later: masked at the period start
    EXPECT_TRUE(m0(1, 2));
    EXPECT_TRUE(m0(0, 1));   // dead later: masked at the period end
    EXPECT_TRUE(m0(1, 0));
    EXPECT_FALSE(m0(1, 3));  // untouched pair stays available
    const binary_matrix m1 = period_mask(p, 1);
    EXPECT_FALSE(m1(2, 1));  // c2 present in both waves of period 1
    EXPECT_TRUE(m1(0, 1));   // c0 still out
    EXPECT_FALSE(m1(1, 3));
}

TEST(simulate, simulate_period_is_deterministic_and_respects_mask) {
    rng gen(77);
    const int n = 12;
    const binary_matrix x0 = synth::random_graph(n, 0.2, gen);
    binary_matrix mask(n);
    for (int j = 1; j < n; ++j) mask.set(0, j, true), mask.set(j, 0, true);
    const std::vector<effect_spec> effects = density_recip(-1.2, 0.8);

    const period_result a = simulate_period(x0, mask, no_covs, 0, effects, 2.5, 999);
    const period_result b = simulate_period(x0, mask, no_covs, 0, effects, 2.5, 999);
    EXPECT_EQ(a.x_end, b.x_end);
    EXPECT_EQ(a.statistics, b.statistics);
    EXPECT_EQ(a.microsteps, b.microsteps);

    const period_result c = simulate_period(x0, mask, no_covs, 0, effects, 2.5, 1000);
    EXPECT_NE(a.x_end, c.x_end);  // different seed, different path (overwhelmingly)

    for (int j = 0; j < n; ++j) {
        EXPECT_FALSE(a.x_end(0, j));
        EXPECT_FALSE(a.x_end(j, 0));
    }
    // Statistics are the period change statistics of the endpoint.
    const binary_matrix start_masked = apply_mask(x0, mask);
    EXPECT_EQ(a.statistics, period_change_statistics(start_masked, a.x_end, no_covs, 0, effects));
    EXPECT_EQ(a.changed_dyads, start_masked.hamming_distance(a.x_end));
}

TEST(simulate, zero_rate_means_no_change) {
    rng gen(5);
    const binary_matrix x0 = synth::random_graph(6, 0.3, gen);
    const period_result r =
        simulate_period(x0, binary_matrix(6), no_covs, 0, density_recip(1.0, 1.0), 0.0, 1);
    EXPECT_EQ(r.x_end, x0);
    EXPECT_EQ(r.microsteps, 0);
    EXPECT_EQ(r.changed_dyads, 0);
    for (double s : r.statistics) EXPECT_EQ(s, 0.0);
}

TEST(simulate, panel_chains_start_from_observed_waves) {
    rng gen(21);
    // Wave 1 differs a lot from wave 0; chains for period 1 must start at
    // wave 1, so with rate 0 the simulated endpoint change is exactly zero
    // even though wave 0 is far away.
    const binary_matrix w0 = synth::random_graph(9, 0.1, gen);
    const binary_matrix w1 = synth::random_graph(9, 0.6, gen);
    const binary_matrix w2 = synth::random_graph(9, 0.3, gen);
    const network_panel p = synth::panel_from_waves({w0, w1, w2});
    const panel_simulation sim =
        simulate_panel(p, no_covs, density_recip(0.5, 0.5), rate_schedule({1.0, 0.0}), 3, 42);
    ASSERT_EQ(sim.periods.size(), 2u);
    for (const auto& chain : sim.periods[1].per_chain)
        for (double s : chain) EXPECT_EQ(s, 0.0);
    EXPECT_EQ(sim.periods[1].mean_changed, 0.0);
    // Period 0 did move.
    EXPECT_GT(sim.periods[0].mean_changed, 0.0);
}

TEST(simulate, rate_schedule_validation) {
    EXPECT_THROW(rate_schedule({1.0, -0.5}), config_error);
    EXPECT_THROW(rate_schedule(std::vector<double>{}), config_error);
    const rate_schedule r({2.0, 3.0});
    EXPECT_EQ(r.periods(), 2);
    EXPECT_EQ(r[1], 3.0);
}

TEST(simulate, two_actor_density_stationary_distribution) {
    // Single-cell rows regenerate as Bernoulli(e^b/(1+e^b)) on every
    // opportunity, so chain endpoints are exact draws from the stationary
    // distribution once each actor has moved at least once.
    const double b = -1.0;
    const double p_expect = std::exp(b) / (1.0 + std::exp(b));
    std::vector<effect_spec> effects = density_recip(b, 0.0);
    effects.pop_back();
    const binary_matrix empty(2), mask(2);
    const int chains = 150, steps_rate = 50;  // ~100 ministeps per chain
    long ones = 0, cells = 0;
    for (int c = 0; c < chains; ++c) {
        const period_result r =
            simulate_period(empty, mask, no_covs, 0, effects, steps_rate, rng::derive(33, c));
        ones += r.x_end(0, 1) + r.x_end(1, 0);
        cells += 2;
    }
    const double se = std::sqrt(p_expect * (1.0 - p_expect) / double(cells));
    EXPECT_NEAR(double(ones) / double(cells), p_expect, 3.0 * se);
}
