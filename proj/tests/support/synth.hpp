// Synthetic fixtures shared across tests: random graphs with a target
// density, and panels whose later waves are forward-simulated from known
// parameters so recovery tests have a ground truth.
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "saom/effects.hpp"
#include "saom/panel.hpp"
#include "saom/rng.hpp"
#include "saom/simulate.hpp"

namespace synth {

inline saom::binary_matrix random_graph(int n, double density, saom::rng& gen) {
    saom::binary_matrix x(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && gen.next_unit() < density) x.set(i, j, true);
    return x;
}

inline std::vector<std::string> country_names(int n) {
    std::vector<std::string> names;
    for (int i = 0; i < n; ++i) names.push_back("c" + std::to_string(i));
    return names;
}

/// Panel whose wave t+1 is simulated from wave t under `effects` at `rate`
/// opportunities per actor per period. No composition change.
inline saom::network_panel model_panel(int n, int waves, const std::vector<saom::effect_spec>& effects,
                                       double rate, std::uint64_t seed, double initial_density = 0.15) {
    saom::rng gen(seed);
    std::vector<saom::wave_observation> obs;
    saom::binary_matrix x = random_graph(n, initial_density, gen);
    obs.push_back({2000, x});
    const saom::covariate_set no_covs;
    const saom::binary_matrix no_mask(n);
    for (int t = 1; t < waves; ++t) {
        const saom::period_result r =
            saom::simulate_period(x, no_mask, no_covs, t - 1, effects, rate, saom::rng::derive(seed, 1000 + t));
        x = r.x_end;
        obs.push_back({2000 + 5 * t, x});
    }
    return saom::build_panel(country_names(n), std::move(obs), {});
}

/// Panel assembled directly from explicit adjacency matrices, years 2000,
/// 2005, ... No composition change unless events are given.
inline saom::network_panel panel_from_waves(std::vector<saom::binary_matrix> waves,
                                            std::vector<saom::composition_event> events = {}) {
    const int n = waves.front().dim();
    std::vector<saom::wave_observation> obs;
    for (std::size_t t = 0; t < waves.size(); ++t) obs.push_back({2000 + 5 * int(t), std::move(waves[t])});
    return saom::build_panel(country_names(n), std::move(obs), std::move(events));
}

}  // namespace synth
