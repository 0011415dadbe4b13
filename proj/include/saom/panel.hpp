#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "saom/common.hpp"
#include "saom/matrix.hpp"

namespace saom {

/// Exogenous change to the set of modelled countries. A birth forces
/// structural zeros on the country's row and column in all waves before
/// `effective_wave`; a death (or merge into a parent) forces them from
/// `effective_wave` on.
struct composition_event {
    enum class kind { birth, death, merge_into };

    std::string country;
    kind event_kind = kind::birth;
    std::string parent;  // merge_into only
    int effective_wave = 0;

    bool operator==(const composition_event&) const = default;
};

inline const char* to_string(composition_event::kind k) {
    switch (k) {
        case composition_event::kind::birth: return "birth";
        case composition_event::kind::death: return "death";
        case composition_event::kind::merge_into: return "merge_into";
    }
    return "?";
}

/// One labeled observation of the directed binary network.
struct wave_observation {
    int year = 0;
    binary_matrix adjacency;
};

/// Immutable longitudinal panel: an ordered country set, one adjacency matrix
/// per observation year, and a structural-zero mask per wave derived from
/// composition events. Masked cells always hold 0.
class network_panel {
  public:
    network_panel() = default;

    network_panel(std::vector<std::string> countries, std::vector<int> years,
                  std::vector<binary_matrix> waves, std::vector<binary_matrix> masks,
                  std::vector<composition_event> events)
        : countries_(std::move(countries)),
          years_(std::move(years)),
          waves_(std::move(waves)),
          masks_(std::move(masks)),
          events_(std::move(events)) {}

    int actor_count() const { return static_cast<int>(countries_.size()); }
    int wave_count() const { return static_cast<int>(waves_.size()); }

    const std::vector<std::string>& countries() const { return countries_; }
    const std::vector<int>& years() const { return years_; }
    const std::vector<composition_event>& events() const { return events_; }

    const binary_matrix& wave(int t) const { return waves_.at(t); }
    const binary_matrix& mask(int t) const { return masks_.at(t); }
    int year(int t) const { return years_.at(t); }

    std::optional<int> index_of(const std::string& country) const {
        for (std::size_t i = 0; i < countries_.size(); ++i)
            if (countries_[i] == country) return static_cast<int>(i);
        return std::nullopt;
    }

    bool operator==(const network_panel&) const = default;

  private:
    std::vector<std::string> countries_;
    std::vector<int> years_;
    std::vector<binary_matrix> waves_;
    std::vector<binary_matrix> masks_;
    std::vector<composition_event> events_;
};

/// Dyadic constants plus actor-by-wave covariates, keyed by name. Indicator
/// matrices may be validated to {0,1} on insertion.
class covariate_set {
  public:
    void add_dyadic(const std::string& name, real_matrix m, bool indicator = false) {
        if (m.rows() != m.cols()) throw data_error("covariate '" + name + "': dyadic matrix must be square");
        if (indicator) {
            for (int i = 0; i < m.rows(); ++i)
                for (int j = 0; j < m.cols(); ++j)
                    if (m(i, j) != 0.0 && m(i, j) != 1.0)
                        throw data_error("covariate '" + name + "': indicator value " + std::to_string(m(i, j)) +
                                         " at (" + std::to_string(i) + "," + std::to_string(j) + ") is not 0/1");
        }
        dyadic_.insert_or_assign(name, std::move(m));
    }

    void add_actor(const std::string& name, real_matrix m) {
        actor_.insert_or_assign(name, std::move(m));
    }

    bool has_dyadic(const std::string& name) const { return dyadic_.count(name) != 0; }
    bool has_actor(const std::string& name) const { return actor_.count(name) != 0; }

    const real_matrix& dyadic(const std::string& name) const {
        auto it = dyadic_.find(name);
        if (it == dyadic_.end()) throw data_error("unknown dyadic covariate '" + name + "'");
        return it->second;
    }

    const real_matrix& actor(const std::string& name) const {
        auto it = actor_.find(name);
        if (it == actor_.end()) throw data_error("unknown actor covariate '" + name + "'");
        return it->second;
    }

    const std::map<std::string, real_matrix>& dyadic_all() const { return dyadic_; }
    const std::map<std::string, real_matrix>& actor_all() const { return actor_; }

    /// Dimension checks against a panel (n for dyadic, n x waves for actor).
    void validate_against(int n, int waves) const {
        for (const auto& [name, m] : dyadic_)
            if (m.rows() != n)
                throw data_error("dyadic covariate '" + name + "' has dimension " + std::to_string(m.rows()) +
                                 ", panel has " + std::to_string(n) + " actors");
        for (const auto& [name, m] : actor_)
            if (m.rows() != n || m.cols() != waves)
                throw data_error("actor covariate '" + name + "' has shape " + std::to_string(m.rows()) + "x" +
                                 std::to_string(m.cols()) + ", panel needs " + std::to_string(n) + "x" +
                                 std::to_string(waves));
    }

  private:
    std::map<std::string, real_matrix> dyadic_;
    std::map<std::string, real_matrix> actor_;
};

/// Validates labeled adjacency matrices and assembles a panel. Structural-zero
/// masks are derived from the composition events and masked cells are zeroed.
///
/// Country indices follow the order of `countries`; wave order follows
/// `observations`, whose year labels must be strictly increasing.
inline network_panel build_panel(std::vector<std::string> countries,
                                 std::vector<wave_observation> observations,
                                 std::vector<composition_event> events = {}) {
    const int n = static_cast<int>(countries.size());
    if (n == 0) throw data_error("build_panel: empty country list");
    if (observations.empty()) throw data_error("build_panel: no waves");

    for (std::size_t a = 0; a < countries.size(); ++a)
        for (std::size_t b = a + 1; b < countries.size(); ++b)
            if (countries[a] == countries[b]) throw data_error("build_panel: duplicate country '" + countries[a] + "'");

    std::vector<int> years;
    std::vector<binary_matrix> waves;
    for (const auto& obs : observations) {
        if (obs.adjacency.dim() != n)
            throw data_error("build_panel: wave " + std::to_string(obs.year) + " has dimension " +
                             std::to_string(obs.adjacency.dim()) + ", expected " + std::to_string(n));
        if (!years.empty() && obs.year <= years.back())
            throw data_error("build_panel: wave labels not strictly increasing at " + std::to_string(obs.year));
        for (int i = 0; i < n; ++i) {
            if (obs.adjacency(i, i))
                throw data_error("build_panel: nonzero diagonal at (" + countries[i] + "," + countries[i] +
                                 ") in wave " + std::to_string(obs.year));
            for (int j = 0; j < n; ++j) {
                const auto v = obs.adjacency.value(i, j);
                if (v != 0 && v != 1)
                    throw data_error("build_panel: non-binary entry " + std::to_string(int(v)) + " at (" +
                                     countries[i] + "," + countries[j] + ") in wave " + std::to_string(obs.year));
            }
        }
        years.push_back(obs.year);
        waves.push_back(obs.adjacency);
    }

    const int wave_total = static_cast<int>(waves.size());
    std::vector<binary_matrix> masks(wave_total, binary_matrix(n));
    for (const auto& ev : events) {
        auto idx = [&]() -> int {
            for (int i = 0; i < n; ++i)
                if (countries[i] == ev.country) return i;
            throw data_error("build_panel: event references unknown country '" + ev.country + "'");
        }();
        if (ev.effective_wave < 0 || ev.effective_wave >= wave_total)
            throw data_error("build_panel: event for '" + ev.country + "' has wave index " +
                             std::to_string(ev.effective_wave) + " out of range");
        const bool before = ev.event_kind == composition_event::kind::birth;
        for (int t = 0; t < wave_total; ++t) {
            const bool masked = before ? (t < ev.effective_wave) : (t >= ev.effective_wave);
            if (!masked) continue;
            for (int k = 0; k < n; ++k) {
                if (k == idx) continue;
                masks[t].set(idx, k, true);
                masks[t].set(k, idx, true);
            }
        }
    }
    for (int t = 0; t < wave_total; ++t)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                if (masks[t](i, j)) waves[t].set(i, j, false);

    return network_panel(std::move(countries), std::move(years), std::move(waves), std::move(masks),
                         std::move(events));
}

/// Per-wave summary row matching the network-descriptives table schema.
struct wave_summary {
    int year = 0;
    long tie_count = 0;
    int max_out_degree = 0;
    int actors_with_out_degree_1 = 0;
    int actors_with_out_degree_0 = 0;
};

inline std::vector<wave_summary> describe(const network_panel& panel) {
    std::vector<wave_summary> out;
    out.reserve(panel.wave_count());
    for (int t = 0; t < panel.wave_count(); ++t) {
        const binary_matrix& x = panel.wave(t);
        wave_summary s;
        s.year = panel.year(t);
        for (int i = 0; i < x.dim(); ++i) {
            const int d = x.out_degree(i);
            s.tie_count += d;
            if (d > s.max_out_degree) s.max_out_degree = d;
            if (d == 1) ++s.actors_with_out_degree_1;
            if (d == 0) ++s.actors_with_out_degree_0;
        }
        out.push_back(s);
    }
    return out;
}

}  // namespace saom
