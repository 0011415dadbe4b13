#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "saom/effects.hpp"
#include "saom/linalg.hpp"
#include "saom/simulate.hpp"

namespace saom {

struct estimation_options {
    // Phase 0: multiplicative rate warm-up at the initial parameters.
    int rate_warmup_iterations = 20;
    double rate_gain = 0.5;

    // Phase 1: derivative matrix by common-random-number forward differences.
    int derivative_reps = 30;
    double derivative_delta = 0.1;

    // Phase 2: Robbins-Monro subphases with halved gain and iterate averaging.
    int subphases = 4;
    double initial_gain = 0.2;
    int subphase_base_iterations = 40;  // doubled each subphase
    double max_step = 5.0;
    // Any |beta| beyond this during phase 2 marks the attempt as diverged;
    // parameters reset and a restart (halved gain, fresh derivative matrix)
    // is consumed. Per-toggle log-odds beyond 10 are already deterministic
    // choices, so nothing estimable lives out there.
    double divergence_bound = 10.0;

    // Phase 3: convergence check and standard errors.
    int phase3_chains = 1000;
    double t_threshold = 0.1;

    int max_restarts = 2;
    bool default_initial_values = true;  // density starts at the observed logit

    double rate_floor = 1e-2;
    double rate_ceiling = 1e3;
};

struct estimation_result {
    std::vector<effect_spec> effects;      // beta holds the estimate (fixed effects keep their input value)
    std::vector<double> beta_hat;          // per effect, same order as `effects`
    std::vector<double> standard_errors;   // NaN for fixed effects
    std::vector<double> t_convergence;     // per effect; fixed effects are monitored, not matched
    rate_schedule rates_hat;
    bool converged = false;

    // Phase-3 diagnostics, aligned with `effects`.
    std::vector<double> observed_totals;
    std::vector<double> simulated_means;
    std::vector<double> simulated_sds;
    real_matrix covariance_beta;  // full order, zero rows/cols for fixed effects

    int subphases_run = 0;
    int iterations_total = 0;
    int restarts_used = 0;
    int phase3_chains = 0;
    int steps_clipped = 0;
    std::vector<std::string> notes;
};

namespace detail {

/// Precomputed per-period inputs and observed targets.
struct estimation_context {
    const network_panel* panel = nullptr;
    const covariate_set* covs = nullptr;
    int periods = 0;
    std::vector<binary_matrix> masks;
    std::vector<binary_matrix> starts;
    std::vector<double> observed_totals;   // per effect, summed over periods
    std::vector<long> observed_changed;    // per period
};

inline estimation_context make_context(const network_panel& panel, const covariate_set& covs,
                                       const std::vector<effect_spec>& effects) {
    if (panel.wave_count() < 2) throw data_error("estimation needs at least two waves");
    validate_effects(effects, covs);
    covs.validate_against(panel.actor_count(), panel.wave_count());
    estimation_context ctx;
    ctx.panel = &panel;
    ctx.covs = &covs;
    ctx.periods = panel.wave_count() - 1;
    ctx.observed_totals.assign(effects.size(), 0.0);
    for (int t = 0; t < ctx.periods; ++t) {
        ctx.masks.push_back(period_mask(panel, t));
        ctx.starts.push_back(apply_mask(panel.wave(t), ctx.masks.back()));
        const std::vector<double> s = period_change_statistics(
            ctx.starts.back(), apply_mask(panel.wave(t + 1), ctx.masks.back()), covs, t, effects);
        for (std::size_t k = 0; k < s.size(); ++k) ctx.observed_totals[k] += s[k];
        ctx.observed_changed.push_back(
            ctx.starts.back().hamming_distance(apply_mask(panel.wave(t + 1), ctx.masks.back())));
    }
    return ctx;
}

struct sim_draw {
    std::vector<double> totals;   // per effect, summed over periods
    std::vector<long> changed;    // per period
};

inline sim_draw simulate_draw(const estimation_context& ctx, const std::vector<effect_spec>& effects,
                              const rate_schedule& rates, std::uint64_t seed) {
    sim_draw d;
    d.totals.assign(effects.size(), 0.0);
    d.changed.resize(ctx.periods);
    for (int t = 0; t < ctx.periods; ++t) {
        period_result r = simulate_period(ctx.starts[t], ctx.masks[t], *ctx.covs, t, effects, rates[t],
                                          rng::derive(seed, std::uint64_t(t)));
        for (std::size_t k = 0; k < r.statistics.size(); ++k) d.totals[k] += r.statistics[k];
        d.changed[t] = r.changed_dyads;
    }
    return d;
}

inline void update_rates(rate_schedule& rates, const sim_draw& d, const estimation_context& ctx, double gain,
                         const estimation_options& opt) {
    for (int t = 0; t < ctx.periods; ++t) {
        const double obs = double(ctx.observed_changed[t]);
        const double dev = (double(d.changed[t]) - obs) / std::max(1.0, obs);
        rates.at(t) = std::clamp(rates.at(t) * std::exp(-gain * dev), opt.rate_floor, opt.rate_ceiling);
    }
}

inline std::vector<std::string> labels_of(const std::vector<effect_spec>& effects,
                                          const std::vector<int>& idx) {
    std::vector<std::string> out;
    for (int k : idx) out.push_back(std::string(to_string(effects[k].param)) + " " + effects[k].label());
    return out;
}

/// dE[s_free]/d(beta_free) by forward differences sharing seeds between the
/// base and each perturbed run (common random numbers).
inline real_matrix derivative_matrix_once(const estimation_context& ctx, std::vector<effect_spec> effects,
                                          const std::vector<int>& free_idx, const rate_schedule& rates,
                                          int reps, double delta, std::uint64_t seed) {
    const int F = static_cast<int>(free_idx.size());
    real_matrix D(F, F);
    for (int rep = 0; rep < reps; ++rep) {
        const std::uint64_t rep_seed = rng::derive(seed, std::uint64_t(rep));
        const sim_draw base = simulate_draw(ctx, effects, rates, rep_seed);
        for (int m = 0; m < F; ++m) {
            effect_spec& pert = effects[free_idx[m]];
            const double keep = pert.beta;
            pert.beta = keep + delta;
            const sim_draw bumped = simulate_draw(ctx, effects, rates, rep_seed);
            pert.beta = keep;
            for (int k = 0; k < F; ++k)
                D(k, m) += (bumped.totals[free_idx[k]] - base.totals[free_idx[k]]) / delta;
        }
    }
    for (int k = 0; k < F; ++k)
        for (int m = 0; m < F; ++m) D(k, m) /= reps;
    return D;
}

/// Common-random-number forward differences. On sparse or small data a
/// small bump may flip no micro-decision at all, leaving a column of the
/// estimated derivative exactly zero or badly under-scaled; such estimates
/// are retried with doubled replications and bump size (deterministically
/// seeded). A derivative that stays degenerate through the escalation ladder
/// means the model is unidentifiable on these data.
inline real_matrix derivative_matrix(const estimation_context& ctx, const std::vector<effect_spec>& effects,
                                     const std::vector<int>& free_idx, const rate_schedule& rates,
                                     const estimation_options& opt, std::uint64_t seed) {
    const int F = static_cast<int>(free_idx.size());
    int reps = opt.derivative_reps;
    double delta = opt.derivative_delta;
    for (int attempt = 0;; ++attempt) {
        const real_matrix D =
            derivative_matrix_once(ctx, effects, free_idx, rates, reps, delta, rng::derive(seed, attempt));
        double diag_min = std::numeric_limits<double>::infinity(), diag_max = 0.0;
        for (int k = 0; k < F; ++k) {
            diag_min = std::min(diag_min, D(k, k));
            diag_max = std::max(diag_max, D(k, k));
        }
        bool degenerate = !(diag_min > 1e-6);
        if (!degenerate) {
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(to_eigen(D));
            degenerate = !lu.isInvertible();
        }
        // A diagonal entry far smaller than the rest is usually a noisy
        // draw (too few decision flips), not structure; escalate if we can.
        const bool suspect = F > 0 && diag_min < 0.02 * diag_max;
        if (!degenerate && (!suspect || attempt == 3)) return D;
        if (attempt == 3) {
            const Eigen::FullPivLU<Eigen::MatrixXd> lu(to_eigen(D));
            throw config_error("singular derivative matrix; collinear effects: " +
                               collinear_column_names(lu, labels_of(effects, free_idx)));
        }
        reps *= 2;
        delta *= 2.0;
    }
}

}  // namespace detail

/// One deterministic Robbins-Monro step: beta_new = beta - gain * D^{-1} dev,
/// each component clipped to +-max_step. Exposed for direct unit testing.
inline std::vector<double> rm_step(const std::vector<double>& beta, const real_matrix& D,
                                   const std::vector<double>& deviation, double gain, double max_step,
                                   const std::vector<std::string>& labels, int* clipped = nullptr) {
    std::vector<double> direction = solve_linear(D, deviation, labels);
    std::vector<double> out(beta.size());
    for (std::size_t k = 0; k < beta.size(); ++k) {
        double step = gain * direction[k];
        if (std::abs(step) > max_step) {
            step = step > 0 ? max_step : -max_step;
            if (clipped) ++*clipped;
        }
        out[k] = beta[k] - step;
    }
    return out;
}

/// Method-of-moments fit: match expected simulated change statistics (summed
/// over periods) to their observed values in the free parameters, and
/// expected changed-dyad counts to observed ones in the per-period rates.
inline estimation_result estimate(const network_panel& panel, const covariate_set& covs,
                                  std::vector<effect_spec> effects, std::uint64_t seed,
                                  const estimation_options& opt = {}) {
    using namespace detail;
    const estimation_context ctx = make_context(panel, covs, effects);
    const std::size_t K = effects.size();

    std::vector<int> free_idx;
    for (std::size_t k = 0; k < K; ++k)
        if (!effects[k].fixed) free_idx.push_back(static_cast<int>(k));
    const int F = static_cast<int>(free_idx.size());
    const std::vector<std::string> free_labels = labels_of(effects, free_idx);

    estimation_result res;
    res.observed_totals = ctx.observed_totals;

    // Starting values: observed density logit for density effects driving
    // tie presence or formation; zero elsewhere unless the caller set one.
    if (opt.default_initial_values) {
        long ties = 0, cells = 0;
        for (int t = 0; t < panel.wave_count(); ++t) {
            const binary_matrix& x = panel.wave(t);
            const binary_matrix& m = panel.mask(t);
            for (int i = 0; i < x.dim(); ++i)
                for (int j = 0; j < x.dim(); ++j) {
                    if (i == j || m(i, j)) continue;
                    ++cells;
                    ties += x(i, j);
                }
        }
        const double p = std::clamp(double(ties) / std::max(1L, cells), 1e-4, 1.0 - 1e-4);
        const double logit = std::log(p / (1.0 - p));
        for (int k : free_idx)
            if (effects[k].kind == effect_kind::density && effects[k].beta == 0.0 &&
                effects[k].param != parametrization::endowment)
                effects[k].beta = std::clamp(logit, -8.0, 8.0);
    }

    // Initial rates: observed flip count per actor, padded for reversals.
    std::vector<double> rate0(ctx.periods);
    for (int t = 0; t < ctx.periods; ++t)
        rate0[t] = std::clamp(1.5 * double(ctx.observed_changed[t]) / panel.actor_count() + 0.2,
                              opt.rate_floor, opt.rate_ceiling);
    rate_schedule rates(rate0);

    // Phase 0: rates only.
    const std::uint64_t seed_ph0 = rng::derive(seed, 0xA0);
    for (int it = 0; it < opt.rate_warmup_iterations; ++it) {
        const sim_draw d = simulate_draw(ctx, effects, rates, rng::derive(seed_ph0, std::uint64_t(it)));
        update_rates(rates, d, ctx, opt.rate_gain, opt);
    }

    // Restart point: post-warm-up rates and initial parameters.
    std::vector<double> beta_start(K);
    for (std::size_t k = 0; k < K; ++k) beta_start[k] = effects[k].beta;
    const rate_schedule rates_start = rates;

    // Best phase-3 checkpoint across attempts; restarts resume from it and
    // the final report is taken from it.
    struct checkpoint {
        bool valid = false;
        bool ok = false;
        double max_t = 0.0;
        std::vector<double> beta;
        std::vector<double> rate_values;
        std::vector<double> simulated_means, simulated_sds, t_convergence, standard_errors;
        real_matrix covariance_beta;
    } best;

    real_matrix D;
    int attempt = 0;
    while (true) {
        const std::uint64_t attempt_seed = rng::derive(seed, 0xB0 + std::uint64_t(attempt));

        if (F > 0) {
            // Phase 1: derivative at this attempt's starting point. Restarts
            // double the replications — a noisy derivative estimate is a prime
            // cause of a failed attempt.
            estimation_options dopt = opt;
            if (attempt > 0) dopt.derivative_reps *= 2;
            D = derivative_matrix(ctx, effects, free_idx, rates, dopt, rng::derive(attempt_seed, 1));

            // Phase 2.
            double gain = opt.initial_gain / double(1 << std::min(attempt, 3));
            int iterations = opt.subphase_base_iterations;
            const std::uint64_t seed_ph2 = rng::derive(attempt_seed, 2);
            int iter_serial = 0;
            bool runaway = false;
            for (int sp = 0; sp < opt.subphases && !runaway; ++sp) {
                std::vector<double> beta_sum(K, 0.0);
                std::vector<double> rate_sum(ctx.periods, 0.0);
                for (int it = 0; it < iterations && !runaway; ++it, ++iter_serial) {
                    const sim_draw d =
                        simulate_draw(ctx, effects, rates, rng::derive(seed_ph2, std::uint64_t(iter_serial)));
                    std::vector<double> beta_free(F), dev_free(F);
                    for (int m = 0; m < F; ++m) {
                        beta_free[m] = effects[free_idx[m]].beta;
                        dev_free[m] = d.totals[free_idx[m]] - ctx.observed_totals[free_idx[m]];
                    }
                    const std::vector<double> stepped =
                        rm_step(beta_free, D, dev_free, gain, opt.max_step, free_labels, &res.steps_clipped);
                    for (int m = 0; m < F; ++m) effects[free_idx[m]].beta = stepped[m];
                    for (int m = 0; m < F; ++m)
                        if (!std::isfinite(stepped[m]) || std::abs(stepped[m]) > opt.divergence_bound)
                            runaway = true;
                    update_rates(rates, d, ctx, gain, opt);
                    for (std::size_t k = 0; k < K; ++k) beta_sum[k] += effects[k].beta;
                    for (int t = 0; t < ctx.periods; ++t) rate_sum[t] += rates[t];
                    ++res.iterations_total;
                }
                if (runaway) break;
                // Polyak averaging within the subphase.
                for (int m = 0; m < F; ++m) effects[free_idx[m]].beta = beta_sum[free_idx[m]] / iterations;
                for (int t = 0; t < ctx.periods; ++t)
                    rates.at(t) = std::clamp(rate_sum[t] / iterations, opt.rate_floor, opt.rate_ceiling);
                ++res.subphases_run;
                gain *= 0.5;
                iterations *= 2;
            }

            if (runaway) {
                // The iteration left any plausible parameter region (the
                // simulated process saturates and carries no gradient
                // information out there). Reset and retry with halved gain
                // and a freshly estimated derivative, spending one restart.
                res.notes.push_back("phase 2 diverged at attempt " + std::to_string(attempt + 1) +
                                    "; parameters reset");
                const bool resume_best = best.valid && best.max_t < 1.0;
                for (std::size_t k = 0; k < K; ++k)
                    effects[k].beta = resume_best ? best.beta[k] : beta_start[k];
                rates = resume_best ? rate_schedule(best.rate_values) : rates_start;
                if (attempt < opt.max_restarts) {
                    ++attempt;
                    ++res.restarts_used;
                    continue;
                }
                // Out of restarts: fall through and report honest
                // non-convergence diagnostics at the reset point.
            }
        } else if (attempt == 0) {
            // No free parameters: a longer rate-only pass plays phase 2.
            const std::uint64_t seed_ph2 = rng::derive(attempt_seed, 2);
            for (int it = 0; it < opt.subphase_base_iterations; ++it) {
                const sim_draw d = simulate_draw(ctx, effects, rates, rng::derive(seed_ph2, std::uint64_t(it)));
                update_rates(rates, d, ctx, opt.rate_gain * 0.5, opt);
                ++res.iterations_total;
            }
        }

        // Phase 3: frozen parameters, convergence check, standard errors.
        const std::uint64_t seed_ph3 = rng::derive(attempt_seed, 3);
        std::vector<std::vector<double>> draws(opt.phase3_chains);
        for (int c = 0; c < opt.phase3_chains; ++c)
            draws[c] = simulate_draw(ctx, effects, rates, rng::derive(seed_ph3, std::uint64_t(c))).totals;
        res.phase3_chains = opt.phase3_chains;

        res.simulated_means.assign(K, 0.0);
        for (const auto& d : draws)
            for (std::size_t k = 0; k < K; ++k) res.simulated_means[k] += d[k];
        for (std::size_t k = 0; k < K; ++k) res.simulated_means[k] /= opt.phase3_chains;
        const real_matrix sigma_full = sample_covariance(draws);
        res.simulated_sds.assign(K, 0.0);
        res.t_convergence.assign(K, 0.0);
        for (std::size_t k = 0; k < K; ++k) {
            res.simulated_sds[k] = std::sqrt(std::max(0.0, sigma_full(int(k), int(k))));
            res.t_convergence[k] = res.simulated_sds[k] > 0.0
                                       ? (res.simulated_means[k] - ctx.observed_totals[k]) / res.simulated_sds[k]
                                       : (res.simulated_means[k] == ctx.observed_totals[k] ? 0.0 : HUGE_VAL);
        }

        double max_t = 0.0;
        for (int k : free_idx) max_t = std::max(max_t, std::abs(res.t_convergence[k]));
        const bool ok = max_t < opt.t_threshold;

        if (F > 0) {
            // Re-estimate the derivative at the final point for honest SEs.
            D = derivative_matrix(ctx, effects, free_idx, rates, opt, rng::derive(attempt_seed, 4));
            real_matrix sigma_free(F, F);
            for (int a = 0; a < F; ++a)
                for (int b = 0; b < F; ++b) sigma_free(a, b) = sigma_full(free_idx[a], free_idx[b]);
            const real_matrix cov_free = sandwich_inverse(D, sigma_free, free_labels);
            res.covariance_beta = real_matrix(int(K), int(K));
            res.standard_errors.assign(K, std::numeric_limits<double>::quiet_NaN());
            for (int a = 0; a < F; ++a) {
                for (int b = 0; b < F; ++b) res.covariance_beta(free_idx[a], free_idx[b]) = cov_free(a, b);
                res.standard_errors[free_idx[a]] = std::sqrt(std::max(0.0, cov_free(a, a)));
            }
        } else {
            res.covariance_beta = real_matrix(int(K), int(K));
            res.standard_errors.assign(K, std::numeric_limits<double>::quiet_NaN());
        }

        if (!best.valid || max_t < best.max_t) {
            best.valid = true;
            best.ok = ok;
            best.max_t = max_t;
            best.beta.resize(K);
            for (std::size_t k = 0; k < K; ++k) best.beta[k] = effects[k].beta;
            best.rate_values = rates.values();
            best.simulated_means = res.simulated_means;
            best.simulated_sds = res.simulated_sds;
            best.t_convergence = res.t_convergence;
            best.standard_errors = res.standard_errors;
            best.covariance_beta = res.covariance_beta;
        }

        if (ok || attempt >= opt.max_restarts) break;
        ++attempt;
        ++res.restarts_used;
        // Resume from the best point seen if it is roughly in the right
        // region (moment deviations within one simulation sd); a checkpoint
        // worse than that is a stuck iterate, not a head start.
        const bool resume_best = best.max_t < 1.0;
        for (std::size_t k = 0; k < K; ++k) effects[k].beta = resume_best ? best.beta[k] : beta_start[k];
        rates = resume_best ? rate_schedule(best.rate_values) : rates_start;
    }

    res.converged = best.ok;
    if (!best.ok)
        res.notes.push_back("not converged: max |t| = " + std::to_string(best.max_t) + " after " +
                            std::to_string(attempt + 1) + " attempt(s)");
    for (std::size_t k = 0; k < K; ++k) effects[k].beta = best.beta[k];
    res.simulated_means = best.simulated_means;
    res.simulated_sds = best.simulated_sds;
    res.t_convergence = best.t_convergence;
    res.standard_errors = best.standard_errors;
    res.covariance_beta = best.covariance_beta;

    res.effects = effects;
    res.beta_hat.resize(K);
    for (std::size_t k = 0; k < K; ++k) res.beta_hat[k] = effects[k].beta;
    res.rates_hat = rate_schedule(best.rate_values);
    return res;
}

struct score_test_result {
    std::string tested_label;
    double statistic = 0.0;  // c, 1 df chi-square under the null
    double p_value = 1.0;
    double deviation = 0.0;  // orthogonalized mean deviation of the tested statistic
    double variance = 0.0;
};

/// Chi-square(1) upper tail.
inline double chi_square_1df_tail(double c) {
    if (c <= 0.0) return 1.0;
    return std::erfc(std::sqrt(c / 2.0));
}

/// Rao-type score test for one effect held at zero in a converged restricted
/// fit. The tested statistic is monitored in simulations at the restricted
/// estimate; its deviation from the observed value is orthogonalized against
/// the estimated effects' deviations and standardized.
inline score_test_result score_test(const network_panel& panel, const covariate_set& covs,
                                    const estimation_result& restricted_fit, std::uint64_t seed,
                                    int chains = 1000) {
    using namespace detail;
    if (!restricted_fit.converged)
        throw convergence_error("score test refused: restricted fit did not converge");
    const std::vector<effect_spec>& effects = restricted_fit.effects;

    std::vector<int> tested_idx, est_idx;
    for (std::size_t k = 0; k < effects.size(); ++k) {
        if (effects[k].fixed && effects[k].beta == 0.0)
            tested_idx.push_back(static_cast<int>(k));
        else if (!effects[k].fixed)
            est_idx.push_back(static_cast<int>(k));
    }
    if (tested_idx.size() != 1)
        throw config_error("score test needs exactly one effect fixed at zero; found " +
                           std::to_string(tested_idx.size()));
    const int tk = tested_idx[0];
    const int F = static_cast<int>(est_idx.size());

    const estimation_context ctx = make_context(panel, covs, effects);
    std::vector<std::vector<double>> draws(chains);
    for (int c = 0; c < chains; ++c)
        draws[c] = simulate_draw(ctx, effects, restricted_fit.rates_hat, rng::derive(seed, std::uint64_t(c))).totals;

    std::vector<double> mean(effects.size(), 0.0);
    for (const auto& d : draws)
        for (std::size_t k = 0; k < effects.size(); ++k) mean[k] += d[k];
    for (double& m : mean) m /= chains;
    const real_matrix sigma = sample_covariance(draws);

    const double z2 = mean[tk] - ctx.observed_totals[tk];
    double e = z2, v = sigma(tk, tk);
    if (F > 0) {
        real_matrix s11(F, F);
        std::vector<double> s21(F), z1(F);
        for (int a = 0; a < F; ++a) {
            z1[a] = mean[est_idx[a]] - ctx.observed_totals[est_idx[a]];
            s21[a] = sigma(tk, est_idx[a]);
            for (int b = 0; b < F; ++b) s11(a, b) = sigma(est_idx[a], est_idx[b]);
        }
        const std::vector<std::string> labels = labels_of(effects, est_idx);
        const std::vector<double> w = solve_linear(s11, s21, labels);  // Sigma11^{-1} Sigma12
        for (int a = 0; a < F; ++a) {
            e -= w[a] * z1[a];
            v -= w[a] * s21[a];
        }
    }
    v *= 1.0 + 1.0 / chains;  // observed draw vs mean of `chains` simulated draws

    score_test_result out;
    out.tested_label = effects[tk].label();
    out.deviation = e;
    out.variance = v;
    out.statistic = v > 0.0 ? e * e / v : (e == 0.0 ? 0.0 : HUGE_VAL);
    out.p_value = chi_square_1df_tail(out.statistic);
    return out;
}

/// Multiplier on the odds of a tie from a change delta_s in one statistic.
inline double effect_magnitude(double beta, double delta_s) { return std::exp(beta * delta_s); }

}  // namespace saom
