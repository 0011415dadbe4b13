#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "saom/common.hpp"
#include "saom/matrix.hpp"
#include "saom/panel.hpp"

namespace saom {

enum class effect_kind {
    density,
    reciprocity,
    transitive_mediated_triads,
    transitive_triads,
    three_cycles,
    outdeg_assortativity,
    outdeg_activity,
    dyadic_covariate,
    covariate_ego,
    covariate_alter,
};

enum class assort_variant { linear, sqrt };

/// Which part of tie dynamics a parameter drives: evaluation effects enter
/// every choice, creation effects only choices that add a tie, endowment
/// effects only choices that delete one (maintenance accounting).
enum class parametrization { evaluation, creation, endowment };

inline const char* to_string(effect_kind k) {
    switch (k) {
        case effect_kind::density: return "density";
        case effect_kind::reciprocity: return "reciprocity";
        case effect_kind::transitive_mediated_triads: return "transitive_mediated_triads";
        case effect_kind::transitive_triads: return "transitive_triads";
        case effect_kind::three_cycles: return "three_cycles";
        case effect_kind::outdeg_assortativity: return "outdeg_assortativity";
        case effect_kind::outdeg_activity: return "outdeg_activity";
        case effect_kind::dyadic_covariate: return "dyadic_covariate";
        case effect_kind::covariate_ego: return "covariate_ego";
        case effect_kind::covariate_alter: return "covariate_alter";
    }
    return "?";
}

inline const char* to_string(parametrization p) {
    switch (p) {
        case parametrization::evaluation: return "evaluation";
        case parametrization::creation: return "creation";
        case parametrization::endowment: return "endowment";
    }
    return "?";
}

/// One model term: a statistic, the dynamic it drives, and its parameter.
struct effect_spec {
    effect_kind kind = effect_kind::density;
    parametrization param = parametrization::evaluation;
    assort_variant variant = assort_variant::linear;  // outdeg_assortativity only
    std::string covariate;                            // covariate effects only
    double beta = 0.0;
    bool fixed = false;  // held at its beta (score-test restriction)

    bool needs_dyadic_covariate() const { return kind == effect_kind::dyadic_covariate; }
    bool needs_actor_covariate() const {
        return kind == effect_kind::covariate_ego || kind == effect_kind::covariate_alter;
    }

    /// Stable display/report name, e.g. "outdeg_assortativity_sqrt" or
    /// "dyadic_covariate:distance".
    std::string label() const {
        std::string s = to_string(kind);
        if (kind == effect_kind::outdeg_assortativity && variant == assort_variant::sqrt) s += "_sqrt";
        if (!covariate.empty()) s += ":" + covariate;
        return s;
    }
};

inline effect_kind parse_effect_kind(const std::string& s) {
    for (effect_kind k : {effect_kind::density, effect_kind::reciprocity, effect_kind::transitive_mediated_triads,
                          effect_kind::transitive_triads, effect_kind::three_cycles,
                          effect_kind::outdeg_assortativity, effect_kind::outdeg_activity,
                          effect_kind::dyadic_covariate, effect_kind::covariate_ego, effect_kind::covariate_alter})
        if (s == to_string(k)) return k;
    throw config_error("unknown effect kind '" + s + "'");
}

inline parametrization parse_parametrization(const std::string& s) {
    for (parametrization p : {parametrization::evaluation, parametrization::creation, parametrization::endowment})
        if (s == to_string(p)) return p;
    throw config_error("unknown parametrization '" + s + "'");
}

/// Model-level sanity: covariates exist, (kind, parametrization, covariate,
/// variant) unique.
inline void validate_effects(const std::vector<effect_spec>& effects, const covariate_set& covs) {
    for (std::size_t a = 0; a < effects.size(); ++a) {
        const effect_spec& e = effects[a];
        if (e.needs_dyadic_covariate()) {
            if (e.covariate.empty()) throw config_error(e.label() + ": covariate name required");
            if (!covs.has_dyadic(e.covariate)) throw config_error(e.label() + ": no dyadic covariate '" + e.covariate + "'");
        }
        if (e.needs_actor_covariate()) {
            if (e.covariate.empty()) throw config_error(e.label() + ": covariate name required");
            if (!covs.has_actor(e.covariate)) throw config_error(e.label() + ": no actor covariate '" + e.covariate + "'");
        }
        if (!e.needs_dyadic_covariate() && !e.needs_actor_covariate() && !e.covariate.empty())
            throw config_error(e.label() + ": effect takes no covariate");
        for (std::size_t b = a + 1; b < effects.size(); ++b) {
            const effect_spec& f = effects[b];
            if (e.kind == f.kind && e.param == f.param && e.covariate == f.covariate && e.variant == f.variant)
                throw config_error("duplicate effect " + std::string(to_string(e.param)) + " " + e.label());
        }
    }
}

/// Contribution of the single tie i->j to effect k's statistic, given the
/// rest of network x. Summing this over i's outgoing ties gives the actor
/// statistic s_ki; summing over all ties gives the network total.
inline double dyad_statistic(const effect_spec& effect, const binary_matrix& x, const covariate_set& covs,
                             int wave, int i, int j) {
    if (i == j) throw data_error("dyad_statistic: i == j");
    const int n = x.dim();
    switch (effect.kind) {
        case effect_kind::density:
            return 1.0;
        case effect_kind::reciprocity:
            return x(j, i) ? 1.0 : 0.0;
        case effect_kind::transitive_mediated_triads: {
            long c = 0;
            for (int h = 0; h < n; ++h)
                if (h != i && h != j && x(h, i) && x(h, j)) ++c;
            return double(c);
        }
        case effect_kind::transitive_triads: {
            long c = 0;
            for (int h = 0; h < n; ++h)
                if (h != i && h != j && x(i, h) && x(h, j)) ++c;
            return double(c);
        }
        case effect_kind::three_cycles: {
            long c = 0;
            for (int h = 0; h < n; ++h)
                if (h != i && h != j && x(j, h) && x(h, i)) ++c;
            return double(c);
        }
        case effect_kind::outdeg_assortativity: {
            const double di = x.out_degree(i), dj = x.out_degree(j);
            return effect.variant == assort_variant::sqrt ? std::sqrt(di) * std::sqrt(dj) : di * dj;
        }
        case effect_kind::outdeg_activity:
            return double(x.out_degree(i));
        case effect_kind::dyadic_covariate:
            return covs.dyadic(effect.covariate)(i, j);
        case effect_kind::covariate_ego:
            return covs.actor(effect.covariate)(i, wave);
        case effect_kind::covariate_alter:
            return covs.actor(effect.covariate)(j, wave);
    }
    throw data_error("dyad_statistic: unknown effect kind");
}

/// Actor i's statistic s_ki = sum over i's outgoing ties of dyad_statistic.
inline double actor_statistic(const effect_spec& effect, const binary_matrix& x, const covariate_set& covs,
                              int wave, int i) {
    double s = 0.0;
    for (int j = 0; j < x.dim(); ++j)
        if (j != i && x(i, j)) s += dyad_statistic(effect, x, covs, wave, i, j);
    return s;
}

/// Network total: sum of actor statistics over all actors.
inline double total_statistic(const effect_spec& effect, const binary_matrix& x, const covariate_set& covs,
                              int wave) {
    double s = 0.0;
    for (int i = 0; i < x.dim(); ++i) s += actor_statistic(effect, x, covs, wave, i);
    return s;
}

enum class choice_kind { keep, add, del };

inline bool effect_active(const effect_spec& effect, choice_kind choice) {
    switch (effect.param) {
        case parametrization::evaluation: return true;
        case parametrization::creation: return choice == choice_kind::add;
        case parametrization::endowment: return choice == choice_kind::del;
    }
    return false;
}

/// Actor i's objective f_i = sum_k beta_k s_ki(x) over evaluation effects.
inline double objective(const binary_matrix& x, const covariate_set& covs, int wave, int i,
                        const std::vector<effect_spec>& effects) {
    double f = 0.0;
    for (const auto& e : effects)
        if (e.param == parametrization::evaluation) f += e.beta * actor_statistic(e, x, covs, wave, i);
    return f;
}

/// Objective used to score one micro-step alternative: x is the POST-choice
/// network, `choice` says whether the alternative added or deleted a tie.
/// Creation/endowment effects enter only for the matching choice kind.
inline double objective(const binary_matrix& x, const covariate_set& covs, int wave, int i,
                        const std::vector<effect_spec>& effects, choice_kind choice) {
    double f = 0.0;
    for (const auto& e : effects)
        if (effect_active(e, choice)) f += e.beta * actor_statistic(e, x, covs, wave, i);
    return f;
}

/// Per-effect totals over a period, accounted per dyad transition:
///   created (0->1):    statistic of the tie in x_next
///   lost (1->0):       minus its statistic in x_prev
///   maintained (1->1): statistic in x_next minus statistic in x_prev
/// evaluation = created + maintained + lost terms, which telescopes to
/// total(x_next) - total(x_prev); creation keeps only created terms;
/// endowment keeps maintained + lost. So creation + endowment = evaluation
/// exactly, mirroring the split reported in creation/endowment model tables.
inline std::vector<double> period_change_statistics(const binary_matrix& x_prev, const binary_matrix& x_next,
                                                    const covariate_set& covs, int wave,
                                                    const std::vector<effect_spec>& effects) {
    if (x_prev.dim() != x_next.dim()) throw data_error("period_change_statistics: wave dimension mismatch");
    const int n = x_prev.dim();
    std::vector<double> out(effects.size(), 0.0);
    for (std::size_t k = 0; k < effects.size(); ++k) {
        const effect_spec& e = effects[k];
        double created = 0.0, maintained_delta = 0.0, lost = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                if (i == j) continue;
                const bool before = x_prev(i, j), after = x_next(i, j);
                if (!before && after)
                    created += dyad_statistic(e, x_next, covs, wave, i, j);
                else if (before && !after)
                    lost -= dyad_statistic(e, x_prev, covs, wave, i, j);
                else if (before && after)
                    maintained_delta += dyad_statistic(e, x_next, covs, wave, i, j) -
                                        dyad_statistic(e, x_prev, covs, wave, i, j);
            }
        switch (e.param) {
            case parametrization::evaluation: out[k] = created + maintained_delta + lost; break;
            case parametrization::creation: out[k] = created; break;
            case parametrization::endowment: out[k] = maintained_delta + lost; break;
        }
    }
    return out;
}

/// Delta engine for the micro-step hot loop: for actor i, fills
/// delta[j * K + k] with the change in s_ki caused by toggling x_ij
/// (for every permitted alternative j != i), where K = effects.size().
/// Self-dyads are left as 0. O(n) per (j, triadic effect), O(1) otherwise.
///
/// Correctness hinges on each formula touching only terms of s_ki that the
/// single toggled cell can reach; the full-recompute actor_statistic above
/// is the testing oracle.
inline void actor_toggle_deltas(const binary_matrix& x, const covariate_set& covs, int wave,
                                const std::vector<effect_spec>& effects, int i, std::vector<double>& delta) {
    const int n = x.dim();
    const std::size_t K = effects.size();
    delta.assign(std::size_t(n) * K, 0.0);

    const int od_i = x.out_degree(i);
    for (std::size_t k = 0; k < K; ++k) {
        const effect_spec& e = effects[k];
        switch (e.kind) {
            case effect_kind::density:
                for (int j = 0; j < n; ++j)
                    if (j != i) delta[std::size_t(j) * K + k] = x(i, j) ? -1.0 : 1.0;
                break;
            case effect_kind::reciprocity:
                for (int j = 0; j < n; ++j)
                    if (j != i && x(j, i)) delta[std::size_t(j) * K + k] = x(i, j) ? -1.0 : 1.0;
                break;
            case effect_kind::transitive_mediated_triads:
                for (int j = 0; j < n; ++j) {
                    if (j == i) continue;
                    long c = 0;
                    for (int h = 0; h < n; ++h)
                        if (h != i && h != j && x(h, i) && x(h, j)) ++c;
                    delta[std::size_t(j) * K + k] = x(i, j) ? -double(c) : double(c);
                }
                break;
            case effect_kind::transitive_triads:
                for (int j = 0; j < n; ++j) {
                    if (j == i) continue;
                    // direct term i->h->j plus indirect: toggling x_ij changes
                    // the h=j mediator inside every other outgoing tie's count
                    long c = 0;
                    for (int h = 0; h < n; ++h)
                        if (h != i && h != j && x(i, h) && x(h, j)) ++c;
                    long indirect = 0;
                    for (int jp = 0; jp < n; ++jp)
                        if (jp != i && jp != j && x(i, jp) && x(j, jp)) ++indirect;
                    delta[std::size_t(j) * K + k] =
                        x(i, j) ? -double(c + indirect) : double(c + indirect);
                }
                break;
            case effect_kind::three_cycles:
                for (int j = 0; j < n; ++j) {
                    if (j == i) continue;
                    long c = 0;
                    for (int h = 0; h < n; ++h)
                        if (h != i && h != j && x(j, h) && x(h, i)) ++c;
                    delta[std::size_t(j) * K + k] = x(i, j) ? -double(c) : double(c);
                }
                break;
            case effect_kind::outdeg_assortativity: {
                const bool root = e.variant == assort_variant::sqrt;
                auto deg = [&](int a) { return root ? std::sqrt(double(x.out_degree(a))) : double(x.out_degree(a)); };
                double sum_nbr = 0.0;  // sum of (transformed) out-degrees over i's current targets
                for (int jp = 0; jp < n; ++jp)
                    if (jp != i && x(i, jp)) sum_nbr += deg(jp);
                const double ego_now = root ? std::sqrt(double(od_i)) : double(od_i);
                for (int j = 0; j < n; ++j) {
                    if (j == i) continue;
                    if (!x(i, j)) {
                        const double ego_new = root ? std::sqrt(double(od_i + 1)) : double(od_i + 1);
                        delta[std::size_t(j) * K + k] = ego_new * (sum_nbr + deg(j)) - ego_now * sum_nbr;
                    } else {
                        const double ego_new = root ? std::sqrt(double(od_i - 1)) : double(od_i - 1);
                        delta[std::size_t(j) * K + k] = ego_new * (sum_nbr - deg(j)) - ego_now * sum_nbr;
                    }
                }
                break;
            }
            case effect_kind::outdeg_activity:
                for (int j = 0; j < n; ++j)
                    if (j != i) delta[std::size_t(j) * K + k] = x(i, j) ? double(1 - 2 * od_i) : double(2 * od_i + 1);
                break;
            case effect_kind::dyadic_covariate: {
                const real_matrix& c = covs.dyadic(e.covariate);
                for (int j = 0; j < n; ++j)
                    if (j != i) delta[std::size_t(j) * K + k] = x(i, j) ? -c(i, j) : c(i, j);
                break;
            }
            case effect_kind::covariate_ego: {
                const double v = covs.actor(e.covariate)(i, wave);
                for (int j = 0; j < n; ++j)
                    if (j != i) delta[std::size_t(j) * K + k] = x(i, j) ? -v : v;
                break;
            }
            case effect_kind::covariate_alter: {
                const real_matrix& c = covs.actor(e.covariate);
                for (int j = 0; j < n; ++j)
                    if (j != i) delta[std::size_t(j) * K + k] = x(i, j) ? -c(j, wave) : c(j, wave);
                break;
            }
        }
    }
}

}  // namespace saom
