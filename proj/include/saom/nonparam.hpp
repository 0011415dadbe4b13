#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "saom/panel.hpp"
#include "saom/rng.hpp"
#include "saom/simulate.hpp"

namespace saom {

/// Tie history over one transition: (x_{t-1}, x_t) = (1,1) maintained,
/// (1,0) lost, (0,1) new, (0,0) none.
enum class tie_category { maintained, lost, new_tie, none };

inline const char* to_string(tie_category c) {
    switch (c) {
        case tie_category::maintained: return "maintained";
        case tie_category::lost: return "lost";
        case tie_category::new_tie: return "new";
        case tie_category::none: return "none";
    }
    return "?";
}

struct dyad_category {
    tie_category category = tie_category::none;
    int i = 0;
    int j = 0;
    int period = 0;  // transition t-1 -> t, stored as t
};

/// Every ordered dyad's category for the transition into wave t; dyads
/// structurally zero at either endpoint are excluded.
inline std::vector<dyad_category> classify_dyads(const network_panel& panel, int t) {
    if (t < 1) throw data_error("classify_dyads: no observed history before the first wave");
    if (t >= panel.wave_count()) throw data_error("classify_dyads: wave index out of range");
    const binary_matrix m = period_mask(panel, t - 1);
    const binary_matrix& prev = panel.wave(t - 1);
    const binary_matrix& next = panel.wave(t);
    std::vector<dyad_category> out;
    for (int i = 0; i < prev.dim(); ++i)
        for (int j = 0; j < prev.dim(); ++j) {
            if (i == j || m(i, j)) continue;
            dyad_category d;
            d.i = i;
            d.j = j;
            d.period = t;
            const bool before = prev(i, j), after = next(i, j);
            d.category = before ? (after ? tie_category::maintained : tie_category::lost)
                                : (after ? tie_category::new_tie : tie_category::none);
            out.push_back(d);
        }
    return out;
}

struct common_influence_summary {
    double total_years = 0.0;
    std::vector<double> durations;  // per influencer with positive exposure
    int count = 0;                  // influencers with positive exposure
};

/// Years of shared exposure before wave t: for each third country h, sum the
/// inter-observation gap over earlier waves in which h sent to both i and j.
inline common_influence_summary common_influences(const network_panel& panel, int i, int j, int t) {
    if (t < 1) throw data_error("common_influences: no observed history before the first wave");
    if (t >= panel.wave_count()) throw data_error("common_influences: wave index out of range");
    common_influence_summary out;
    const int n = panel.actor_count();
    for (int h = 0; h < n; ++h) {
        if (h == i || h == j) continue;
        double years = 0.0;
        for (int tp = 0; tp < t; ++tp)
            if (panel.wave(tp)(h, i) && panel.wave(tp)(h, j))
                years += panel.year(tp + 1) - panel.year(tp);
        if (years > 0.0) {
            out.durations.push_back(years);
            out.total_years += years;
            ++out.count;
        }
    }
    return out;
}

enum class ks_p_method { permutation, asymptotic };

namespace detail {

/// Two-sample KS distance as an exact rational: returns the maximum of
/// |i*n2 - j*n1| over the merged order; divide by n1*n2 for D. Exact integer
/// arithmetic keeps ties between permutation replicates comparable.
inline long long ks_numerator(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const long long n1 = static_cast<long long>(a.size()), n2 = static_cast<long long>(b.size());
    long long i = 0, j = 0, best = 0;
    while (i < n1 || j < n2) {
        const double v = (i < n1 && (j >= n2 || a[i] <= b[j])) ? a[i] : b[j];
        while (i < n1 && a[i] == v) ++i;
        while (j < n2 && b[j] == v) ++j;
        best = std::max(best, std::llabs(i * n2 - j * n1));
    }
    return best;
}

inline double ks_asymptotic_tail(double lambda) {
    if (lambda <= 0.0) return 1.0;
    double sum = 0.0;
    for (int k = 1; k <= 100; ++k) {
        const double term = 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
        sum += term;
        if (std::abs(term) < 1e-12) break;
    }
    return std::clamp(sum, 0.0, 1.0);
}

}  // namespace detail

struct ks_result {
    double d = 0.0;
    double p_value = 1.0;
};

/// Two-sample Kolmogorov-Smirnov test. The default permutation p-value suits
/// the heavily tied discrete samples this pipeline produces; the asymptotic
/// formula is available for large untied samples.
inline ks_result ks_two_sample(const std::vector<double>& a, const std::vector<double>& b,
                               ks_p_method method = ks_p_method::permutation, int resamples = 10000,
                               std::uint64_t seed = 1) {
    if (a.empty() || b.empty()) throw data_error("ks_two_sample: empty sample");
    const long long n1 = static_cast<long long>(a.size()), n2 = static_cast<long long>(b.size());
    const long long num = detail::ks_numerator(a, b);
    ks_result out;
    out.d = double(num) / double(n1 * n2);
    if (method == ks_p_method::asymptotic) {
        const double ne = double(n1) * double(n2) / double(n1 + n2);
        const double root = std::sqrt(ne);
        out.p_value = detail::ks_asymptotic_tail((root + 0.12 + 0.11 / root) * out.d);
        return out;
    }
    std::vector<double> pool(a);
    pool.insert(pool.end(), b.begin(), b.end());
    rng gen(seed);
    long hits = 0;
    std::vector<double> ra(a.size()), rb(b.size());
    for (int r = 0; r < resamples; ++r) {
        for (std::size_t k = pool.size(); k > 1; --k)
            std::swap(pool[k - 1], pool[gen.uniform_int(k)]);
        ra.assign(pool.begin(), pool.begin() + n1);
        rb.assign(pool.begin() + n1, pool.end());
        if (detail::ks_numerator(ra, rb) >= num) ++hits;
    }
    out.p_value = double(1 + hits) / double(resamples + 1);
    return out;
}

struct category_summary {
    tie_category category = tie_category::none;
    long n = 0;
    double mean_total = 0.0;     // years of common influence
    double mean_duration = 0.0;  // pooled: total years / total influence count
    double mean_count = 0.0;     // influencers per dyad
};

struct ks_comparison {
    std::string measure;  // total | duration | count
    tie_category first = tie_category::none;
    tie_category second = tie_category::none;
    bool applicable = false;  // false when a category is empty
    ks_result result;
};

struct influence_report {
    std::vector<category_summary> categories;  // maintained, lost, new, none
    std::vector<ks_comparison> comparisons;    // maintained-lost and new-none x 3 measures
};

/// Common-history summary by tie category, pooled over all transitions, with
/// KS comparisons of the per-dyad distributions. A dyad's per-influencer
/// duration is total/count, taken as 0 when it had no common influencer.
inline influence_report influence_table(const network_panel& panel,
                                        ks_p_method method = ks_p_method::permutation, int resamples = 10000,
                                        std::uint64_t seed = 1) {
    if (panel.wave_count() < 2) throw data_error("influence_table: need at least two waves");
    constexpr tie_category cats[4] = {tie_category::maintained, tie_category::lost, tie_category::new_tie,
                                      tie_category::none};
    std::vector<double> totals[4], durations[4], counts[4];
    for (int t = 1; t < panel.wave_count(); ++t) {
        for (const dyad_category& d : classify_dyads(panel, t)) {
            const common_influence_summary s = common_influences(panel, d.i, d.j, t);
            const int c = static_cast<int>(d.category);
            totals[c].push_back(s.total_years);
            durations[c].push_back(s.count > 0 ? s.total_years / s.count : 0.0);
            counts[c].push_back(double(s.count));
        }
    }

    influence_report report;
    for (int c = 0; c < 4; ++c) {
        category_summary cs;
        cs.category = cats[c];
        cs.n = static_cast<long>(totals[c].size());
        if (cs.n > 0) {
            double sum_total = 0.0, sum_count = 0.0;
            for (double v : totals[c]) sum_total += v;
            for (double v : counts[c]) sum_count += v;
            cs.mean_total = sum_total / cs.n;
            cs.mean_count = sum_count / cs.n;
            cs.mean_duration = sum_count > 0.0 ? sum_total / sum_count : 0.0;
        }
        report.categories.push_back(cs);
    }

    const std::pair<tie_category, tie_category> pairs[2] = {
        {tie_category::maintained, tie_category::lost}, {tie_category::new_tie, tie_category::none}};
    const char* measures[3] = {"total", "duration", "count"};
    std::uint64_t comparison_serial = 0;
    for (const auto& [ca, cb] : pairs) {
        const std::vector<double>* sets[3][2] = {
            {&totals[int(ca)], &totals[int(cb)]},
            {&durations[int(ca)], &durations[int(cb)]},
            {&counts[int(ca)], &counts[int(cb)]},
        };
        for (int m = 0; m < 3; ++m) {
            ks_comparison cmp;
            cmp.measure = measures[m];
            cmp.first = ca;
            cmp.second = cb;
            ++comparison_serial;
            if (!sets[m][0]->empty() && !sets[m][1]->empty()) {
                cmp.applicable = true;
                cmp.result = ks_two_sample(*sets[m][0], *sets[m][1], method, resamples,
                                           rng::derive(seed, comparison_serial));
            }
            report.comparisons.push_back(cmp);
        }
    }
    return report;
}

}  // namespace saom
