#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "saom/effects.hpp"
#include "saom/matrix.hpp"
#include "saom/panel.hpp"
#include "saom/rng.hpp"

namespace saom {

/// Expected change opportunities per actor, one entry per period.
class rate_schedule {
  public:
    rate_schedule() = default;
    explicit rate_schedule(std::vector<double> rates) : rates_(std::move(rates)) {
        if (rates_.empty()) throw config_error("rate schedule must cover at least one period");
        for (double r : rates_)
            if (!(r >= 0.0)) throw config_error("rate parameters must be non-negative");
    }
    int periods() const { return static_cast<int>(rates_.size()); }
    double operator[](int t) const { return rates_.at(t); }
    double& at(int t) { return rates_.at(t); }
    const std::vector<double>& values() const { return rates_; }

  private:
    std::vector<double> rates_;
};

/// Cells untouchable during a period: the union of the structural-zero masks
/// at both endpoints, so ties of countries entering or leaving between the
/// waves are neither simulated nor scored.
inline binary_matrix period_mask(const network_panel& panel, int t) {
    binary_matrix m = panel.mask(t);
    const binary_matrix& next = panel.mask(t + 1);
    for (int i = 0; i < m.dim(); ++i)
        for (int j = 0; j < m.dim(); ++j)
            if (next(i, j)) m.set(i, j, true);
    return m;
}

inline binary_matrix apply_mask(binary_matrix x, const binary_matrix& mask) {
    for (int i = 0; i < x.dim(); ++i)
        for (int j = 0; j < x.dim(); ++j)
            if (mask(i, j)) x.set(i, j, false);
    return x;
}

/// Choice distribution for actor i over the keep alternative (index 0) and
/// each permitted toggle j (index j+1). Forbidden/self entries are 0.
/// Probability of alternative a is exp(f_i(x_a)) normalized, where f_i scores
/// the post-choice network and creation/endowment effects enter only for
/// adds/deletes respectively.
inline std::vector<double> ministep_probabilities(const binary_matrix& x, const binary_matrix& mask,
                                                  const covariate_set& covs, int wave,
                                                  const std::vector<effect_spec>& effects, int i,
                                                  std::vector<double>* delta_scratch = nullptr) {
    const int n = x.dim();
    const std::size_t K = effects.size();
    std::vector<double> local_delta;
    std::vector<double>& delta = delta_scratch ? *delta_scratch : local_delta;
    actor_toggle_deltas(x, covs, wave, effects, i, delta);

    std::vector<double> s_now(K);
    for (std::size_t k = 0; k < K; ++k) s_now[k] = actor_statistic(effects[k], x, covs, wave, i);

    std::vector<double> f(std::size_t(n) + 1, -std::numeric_limits<double>::infinity());
    double f_keep = 0.0;
    for (std::size_t k = 0; k < K; ++k)
        if (effect_active(effects[k], choice_kind::keep)) f_keep += effects[k].beta * s_now[k];
    f[0] = f_keep;
    for (int j = 0; j < n; ++j) {
        if (j == i || mask(i, j)) continue;
        const choice_kind choice = x(i, j) ? choice_kind::del : choice_kind::add;
        double fj = 0.0;
        for (std::size_t k = 0; k < K; ++k)
            if (effect_active(effects[k], choice))
                fj += effects[k].beta * (s_now[k] + delta[std::size_t(j) * K + k]);
        f[std::size_t(j) + 1] = fj;
    }

    double fmax = f[0];
    for (double v : f) fmax = std::max(fmax, v);
    std::vector<double> p(f.size(), 0.0);
    double z = 0.0;
    for (std::size_t a = 0; a < f.size(); ++a) {
        if (f[a] == -std::numeric_limits<double>::infinity()) continue;
        p[a] = std::exp(f[a] - fmax);
        z += p[a];
    }
    for (double& v : p) v /= z;
    return p;
}

struct ministep_result {
    int actor = -1;
    int target = -1;  // -1: kept current state (or skipped: no permitted alternative)
};

/// One change opportunity: a uniformly chosen actor toggles one permitted
/// outgoing tie or keeps the status quo, multinomial over exp(f).
/// Mutates x in place.
inline ministep_result ministep(binary_matrix& x, const binary_matrix& mask, const covariate_set& covs,
                                int wave, const std::vector<effect_spec>& effects, rng& gen,
                                std::vector<double>* delta_scratch = nullptr) {
    const int n = x.dim();
    ministep_result res;
    res.actor = static_cast<int>(gen.uniform_int(std::uint64_t(n)));

    bool any = false;
    for (int j = 0; j < n && !any; ++j)
        if (j != res.actor && !mask(res.actor, j)) any = true;
    if (!any) return res;  // every outgoing dyad structurally forbidden: no-op

    const std::vector<double> p =
        ministep_probabilities(x, mask, covs, wave, effects, res.actor, delta_scratch);
    const double u = gen.next_unit();
    double acc = 0.0;
    std::size_t pick = 0;
    for (std::size_t a = 0; a < p.size(); ++a) {
        acc += p[a];
        if (u < acc) {
            pick = a;
            break;
        }
        if (a + 1 == p.size()) pick = a;  // guard against accumulated rounding
    }
    if (pick > 0) {
        res.target = static_cast<int>(pick - 1);
        x.set(res.actor, res.target, !x(res.actor, res.target));
    }
    return res;
}

struct period_result {
    binary_matrix x_end;
    std::vector<double> statistics;   // period change statistics vs x_start
    long changed_dyads = 0;           // Hamming distance x_start -> x_end
    long microsteps = 0;
};

/// Simulate one inter-wave period from x_start: M ~ Poisson(n * rate)
/// micro-steps, then score the endpoint against the start.
inline period_result simulate_period(const binary_matrix& x_start, const binary_matrix& mask,
                                     const covariate_set& covs, int wave,
                                     const std::vector<effect_spec>& effects, double rate,
                                     std::uint64_t seed) {
    rng gen(seed);
    period_result res;
    res.x_end = apply_mask(x_start, mask);
    const binary_matrix start = res.x_end;
    res.microsteps = gen.poisson(double(x_start.dim()) * rate);
    std::vector<double> scratch;
    for (long m = 0; m < res.microsteps; ++m) ministep(res.x_end, mask, covs, wave, effects, gen, &scratch);
    res.statistics = period_change_statistics(start, res.x_end, covs, wave, effects);
    res.changed_dyads = start.hamming_distance(res.x_end);
    return res;
}

/// Observed change statistics for period t, masked to the period's active
/// cells at both endpoints.
inline std::vector<double> observed_period_statistics(const network_panel& panel, const covariate_set& covs,
                                                      const std::vector<effect_spec>& effects, int t) {
    const binary_matrix m = period_mask(panel, t);
    return period_change_statistics(apply_mask(panel.wave(t), m), apply_mask(panel.wave(t + 1), m), covs, t,
                                    effects);
}

inline long observed_changed_dyads(const network_panel& panel, int t) {
    const binary_matrix m = period_mask(panel, t);
    return apply_mask(panel.wave(t), m).hamming_distance(apply_mask(panel.wave(t + 1), m));
}

struct period_simulation {
    std::vector<std::vector<double>> per_chain;  // chains x effects
    std::vector<long> per_chain_changed;
    std::vector<double> mean;
    real_matrix covariance;          // sample covariance, denominator chains-1
    bool covariance_defined = true;  // false when chains == 1
    double mean_changed = 0.0;
};

struct panel_simulation {
    std::vector<period_simulation> periods;
};

inline period_simulation summarize_chains(std::vector<std::vector<double>> per_chain,
                                          std::vector<long> per_chain_changed) {
    period_simulation out;
    const int chains = static_cast<int>(per_chain.size());
    const int K = chains ? static_cast<int>(per_chain[0].size()) : 0;
    out.per_chain = std::move(per_chain);
    out.per_chain_changed = std::move(per_chain_changed);
    out.mean.assign(K, 0.0);
    for (const auto& row : out.per_chain)
        for (int k = 0; k < K; ++k) out.mean[k] += row[k];
    for (int k = 0; k < K; ++k) out.mean[k] /= chains;
    for (long h : out.per_chain_changed) out.mean_changed += double(h);
    out.mean_changed /= chains;
    out.covariance = real_matrix(K, K);
    if (chains < 2) {
        out.covariance_defined = false;
        return out;
    }
    for (const auto& row : out.per_chain)
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b)
                out.covariance(a, b) += (row[a] - out.mean[a]) * (row[b] - out.mean[b]);
    for (int a = 0; a < K; ++a)
        for (int b = 0; b < K; ++b) out.covariance(a, b) /= (chains - 1);
    return out;
}

/// Conditional simulation: every period starts from the OBSERVED earlier
/// wave, never from a simulated state. Chains are independent with seeds
/// derived per (period, chain), so results do not depend on scheduling.
inline panel_simulation simulate_panel(const network_panel& panel, const covariate_set& covs,
                                       const std::vector<effect_spec>& effects, const rate_schedule& rates,
                                       int chains, std::uint64_t seed) {
    if (chains < 1) throw config_error("simulate_panel: chains must be >= 1");
    if (rates.periods() != panel.wave_count() - 1)
        throw config_error("simulate_panel: need one rate per period");
    panel_simulation out;
    for (int t = 0; t + 1 < panel.wave_count(); ++t) {
        const binary_matrix m = period_mask(panel, t);
        const binary_matrix start = apply_mask(panel.wave(t), m);
        const std::uint64_t period_seed = rng::derive(seed, std::uint64_t(t));
        std::vector<std::vector<double>> per_chain(chains);
        std::vector<long> per_chain_changed(chains);
        for (int c = 0; c < chains; ++c) {
            period_result r = simulate_period(start, m, covs, t, effects, rates[t],
                                              rng::derive(period_seed, std::uint64_t(c)));
            per_chain[c] = std::move(r.statistics);
            per_chain_changed[c] = r.changed_dyads;
        }
        out.periods.push_back(summarize_chains(std::move(per_chain), std::move(per_chain_changed)));
    }
    return out;
}

}  // namespace saom
