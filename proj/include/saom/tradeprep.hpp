#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "saom/csv.hpp"
#include "saom/linalg.hpp"
#include "saom/panel.hpp"

namespace saom {

/// One audit-trail line for the prep pipeline (drops, clamps, exclusions),
/// serialized as line-delimited JSON.
struct provenance_entry {
    std::string event;
    nlohmann::json detail;
};

using provenance_log = std::vector<provenance_entry>;

inline std::string to_jsonl(const provenance_log& log) {
    std::string out;
    for (const auto& e : log) {
        nlohmann::json j;
        j["event"] = e.event;
        j["detail"] = e.detail;
        out += j.dump() + "\n";
    }
    return out;
}

/// One raw trade report. Export reports describe reporter -> partner;
/// import reports describe partner -> reporter and are kept only to mirror
/// flows of exporters that do not self-report.
struct flow_record {
    std::string reporter;
    std::string partner;
    int year = 0;
    double gross_exports = 0.0;
    double re_exports = 0.0;
    bool import_report = false;
};

/// Partner designations that name no modellable country.
inline const std::vector<std::string>& indefinite_partner_designations() {
    static const std::vector<std::string> names = {"World", "Areas, nes"};
    return names;
}

inline constexpr const char* taiwan_designation = "Other Asia, nes";
inline constexpr const char* taiwan_name = "Taiwan";

/// Normalizes reporter/partner identities:
///   - "Other Asia, nes" is the customary designation for Taiwan; remapped.
///   - indefinite designations (World, Areas nes) are dropped, counted.
///   - import reports whose implied exporter is Taiwan become mirrored
///     export records (Taiwan files no export reports of its own); other
///     import reports duplicate exporters' own reports and are ignored.
/// Output records are all export-oriented. Mirror values are used as-is
/// (no CIF/FOB adjustment), which the provenance log flags.
inline std::vector<flow_record> resolve_partners(std::vector<flow_record> records, provenance_log& log) {
    long remapped = 0, dropped_indefinite = 0, mirrored = 0, ignored_imports = 0;
    std::vector<flow_record> out;
    out.reserve(records.size());
    for (flow_record& r : records) {
        if (r.reporter == taiwan_designation) {
            r.reporter = taiwan_name;
            ++remapped;
        }
        if (r.partner == taiwan_designation) {
            r.partner = taiwan_name;
            ++remapped;
        }
        const auto& indefinite = indefinite_partner_designations();
        if (std::find(indefinite.begin(), indefinite.end(), r.reporter) != indefinite.end() ||
            std::find(indefinite.begin(), indefinite.end(), r.partner) != indefinite.end()) {
            ++dropped_indefinite;
            continue;
        }
        if (r.import_report) {
            if (r.partner == taiwan_name) {
                flow_record mirror = r;
                mirror.reporter = taiwan_name;
                mirror.partner = r.reporter;
                mirror.import_report = false;
                out.push_back(std::move(mirror));
                ++mirrored;
            } else {
                ++ignored_imports;
            }
            continue;
        }
        out.push_back(std::move(r));
    }
    if (remapped) log.push_back({"partner_remapped_to_taiwan", {{"rows", remapped}}});
    if (dropped_indefinite) log.push_back({"indefinite_partner_dropped", {{"rows", dropped_indefinite}}});
    if (mirrored)
        log.push_back({"taiwan_exports_mirrored_from_import_reports",
                       {{"rows", mirrored}, {"note", "mirror values used as-is, no CIF/FOB adjustment"}}});
    if (ignored_imports) log.push_back({"import_reports_ignored", {{"rows", ignored_imports}}});
    return out;
}

/// Net export value: gross minus re-exports, clamped at zero.
inline double net_exports(const flow_record& r, provenance_log* log = nullptr) {
    const double net = r.gross_exports - r.re_exports;
    if (net < 0.0) {
        if (log)
            log->push_back({"net_exports_clamped",
                            {{"reporter", r.reporter},
                             {"partner", r.partner},
                             {"year", r.year},
                             {"gross", r.gross_exports},
                             {"re_exports", r.re_exports}}});
        return 0.0;
    }
    return net;
}

/// One net valued flow within a single year.
struct valued_flow {
    std::string exporter;
    std::string importer;
    double value = 0.0;
};

using yearly_flows = std::map<int, std::vector<valued_flow>>;

/// Sums net values per (year, exporter, importer); drops zero-valued and
/// self-flows. Output order is deterministic (year, exporter, importer).
inline yearly_flows aggregate_net_flows(const std::vector<flow_record>& records, provenance_log& log) {
    std::map<int, std::map<std::pair<std::string, std::string>, double>> acc;
    long self_flows = 0;
    for (const flow_record& r : records) {
        if (r.reporter == r.partner) {
            ++self_flows;
            continue;
        }
        acc[r.year][{r.reporter, r.partner}] += net_exports(r, &log);
    }
    if (self_flows) log.push_back({"self_flows_dropped", {{"rows", self_flows}}});
    yearly_flows out;
    for (const auto& [year, pairs] : acc)
        for (const auto& [key, value] : pairs)
            if (value > 0.0) out[year].push_back({key.first, key.second, value});
    return out;
}

/// Log-log market-size regression: ln(market) on ln(gdp per capita) and
/// ln(population) with intercept.
struct market_size_model {
    double intercept = 0.0;
    double coef_ln_gdp_per_capita = 0.0;
    double coef_ln_population = 0.0;
    int n = 0;
    double adjusted_r2 = 0.0;
};

struct market_observation {
    double market = 0.0;
    double gdp_per_capita = 0.0;
    double population = 0.0;
};

inline market_size_model fit_market_model(const std::vector<market_observation>& obs) {
    if (obs.size() < 3) throw data_error("market model: need at least 3 observations");
    std::vector<std::vector<double>> design;
    std::vector<double> y;
    for (const auto& o : obs) {
        if (!(o.market > 0.0 && o.gdp_per_capita > 0.0 && o.population > 0.0))
            throw data_error("market model: all observations must be positive");
        design.push_back({1.0, std::log(o.gdp_per_capita), std::log(o.population)});
        y.push_back(std::log(o.market));
    }
    const ols_fit fit = fit_ols(design, y);
    market_size_model m;
    m.intercept = fit.coefficients[0];
    m.coef_ln_gdp_per_capita = fit.coefficients[1];
    m.coef_ln_population = fit.coefficients[2];
    m.n = fit.n;
    m.adjusted_r2 = fit.adjusted_r2;
    return m;
}

inline double predict_market_size(const market_size_model& m, double gdp_per_capita, double population) {
    if (!(gdp_per_capita > 0.0 && population > 0.0))
        throw data_error("predict_market_size: inputs must be positive");
    return std::exp(m.intercept + m.coef_ln_gdp_per_capita * std::log(gdp_per_capita) +
                    m.coef_ln_population * std::log(population));
}

struct country_stat {
    double gdp_per_capita = 0.0;
    double population = 0.0;
};

/// (country, year) -> economic covariates used for market prediction.
using country_stats = std::map<std::string, std::map<int, country_stat>>;

/// A composition event whose wave index is still a calendar year; resolved
/// once the wave grid is known.
struct pending_event {
    std::string country;
    composition_event::kind kind = composition_event::kind::birth;
    std::string parent;
    int effective_year = 0;
};

/// Tie sets per year produced by a dichotomization scheme.
using yearly_ties = std::map<int, std::set<std::pair<std::string, std::string>>>;

/// Relative scheme: a flow becomes a tie when its value strictly exceeds
/// a% of the predicted size of the importing country's market that year.
/// Importers without GDP/population data cannot be coded and their inbound
/// flows are excluded (logged).
inline yearly_ties relative_tie_sets(const yearly_flows& flows, const market_size_model& model,
                                     double a_percent, const country_stats& stats, provenance_log& log) {
    if (!(a_percent > 0.0 && a_percent < 100.0)) throw config_error("relative threshold must be in (0, 100)");
    yearly_ties out;
    std::set<std::pair<std::string, int>> missing;
    for (const auto& [year, list] : flows) {
        auto& ties = out[year];
        for (const valued_flow& f : list) {
            auto country_it = stats.find(f.importer);
            const country_stat* st = nullptr;
            if (country_it != stats.end()) {
                auto year_it = country_it->second.find(year);
                if (year_it != country_it->second.end()) st = &year_it->second;
            }
            if (!st) {
                missing.insert({f.importer, year});
                continue;
            }
            const double market = predict_market_size(model, st->gdp_per_capita, st->population);
            if (f.value > (a_percent / 100.0) * market) ties.insert({f.exporter, f.importer});
        }
    }
    for (const auto& [country, year] : missing)
        log.push_back({"importer_excluded_missing_stats", {{"country", country}, {"year", year}}});
    return out;
}

/// Absolute scheme: per year, code flows as ties in descending value order
/// until their cumulative value first reaches coverage x the global total;
/// the crossing flow counts, and every flow tied with it in value counts too
/// (equivalently: all flows with value >= the crossing value).
inline yearly_ties absolute_tie_sets(const yearly_flows& flows, double coverage, provenance_log& log) {
    if (!(coverage > 0.0 && coverage <= 1.0)) throw config_error("coverage must be in (0, 1]");
    (void)log;
    yearly_ties out;
    for (const auto& [year, list] : flows) {
        auto& ties = out[year];
        if (list.empty()) continue;
        std::vector<double> values;
        double total = 0.0;
        for (const valued_flow& f : list) {
            values.push_back(f.value);
            total += f.value;
        }
        std::sort(values.begin(), values.end(), std::greater<>());
        double cum = 0.0;
        double crossing = values.back();
        for (double v : values) {
            cum += v;
            if (cum >= coverage * total) {
                crossing = v;
                break;
            }
        }
        for (const valued_flow& f : list)
            if (f.value >= crossing) ties.insert({f.exporter, f.importer});
    }
    return out;
}

/// Builds the panel from per-year tie sets: the country universe is every
/// country in any wave's ties (constant across time, lexicographic order);
/// pending composition events are resolved to the first wave at or after
/// their calendar year.
inline network_panel assemble_panel(const yearly_ties& ties, const std::vector<int>& years,
                                    const std::vector<pending_event>& pending, provenance_log& log) {
    std::set<std::string> universe;
    for (int year : years) {
        auto it = ties.find(year);
        if (it == ties.end()) continue;
        for (const auto& [exporter, importer] : it->second) {
            universe.insert(exporter);
            universe.insert(importer);
        }
    }
    if (universe.empty()) throw data_error("assemble_panel: no country ever crosses the threshold");
    std::vector<std::string> countries(universe.begin(), universe.end());
    const int n = static_cast<int>(countries.size());
    auto index_of = [&](const std::string& c) {
        return static_cast<int>(std::lower_bound(countries.begin(), countries.end(), c) - countries.begin());
    };

    std::vector<wave_observation> observations;
    for (int year : years) {
        wave_observation obs;
        obs.year = year;
        obs.adjacency = binary_matrix(n);
        auto it = ties.find(year);
        if (it != ties.end())
            for (const auto& [exporter, importer] : it->second)
                obs.adjacency.set(index_of(exporter), index_of(importer), true);
        observations.push_back(std::move(obs));
    }

    std::vector<composition_event> events;
    for (const pending_event& p : pending) {
        if (universe.count(p.country) == 0) {
            log.push_back({"composition_event_country_absent", {{"country", p.country}}});
            continue;
        }
        int wave = -1;
        for (std::size_t t = 0; t < years.size(); ++t)
            if (years[t] >= p.effective_year) {
                wave = static_cast<int>(t);
                break;
            }
        if (wave < 0) {
            log.push_back({"composition_event_beyond_panel",
                           {{"country", p.country}, {"year", p.effective_year}}});
            continue;
        }
        events.push_back({p.country, p.kind, p.parent, wave});
    }
    return build_panel(std::move(countries), std::move(observations), std::move(events));
}

inline network_panel dichotomize_relative(const yearly_flows& flows, const market_size_model& model,
                                          double a_percent, const country_stats& stats,
                                          const std::vector<int>& years, provenance_log& log,
                                          const std::vector<pending_event>& pending = {}) {
    return assemble_panel(relative_tie_sets(flows, model, a_percent, stats, log), years, pending, log);
}

inline network_panel dichotomize_absolute(const yearly_flows& flows, double coverage,
                                          const std::vector<int>& years, provenance_log& log,
                                          const std::vector<pending_event>& pending = {}) {
    return assemble_panel(absolute_tie_sets(flows, coverage, log), years, pending, log);
}

/// Country split: the parent's identifier continues through the largest
/// child (by population) unless `continuer` picks one explicitly; smaller
/// children are born at the event year.
struct split_spec {
    std::string parent;
    std::vector<std::pair<std::string, double>> children;  // (name, population)
    int year = 0;
    std::string continuer;  // optional explicit choice
};

/// Country unification: `merged_name` continues the `survivor` identifier;
/// the absorbed country is structurally zero from the event year on.
struct merge_spec {
    std::string survivor;
    std::string absorbed;
    std::string merged_name;
    int year = 0;
};

struct continuity_spec {
    std::vector<split_spec> splits;
    std::vector<merge_spec> merges;
};

struct continuity_result {
    std::map<std::string, std::string> rename;  // raw name -> panel identifier
    std::vector<pending_event> events;
};

inline continuity_result continuity_map(const continuity_spec& spec) {
    continuity_result out;
    for (const split_spec& s : spec.splits) {
        if (s.children.empty()) throw config_error("split of '" + s.parent + "' lists no children");
        std::string chosen = s.continuer;
        if (chosen.empty()) {
            double best = -1.0;
            bool tie = false;
            for (const auto& [name, pop] : s.children) {
                if (pop > best) {
                    best = pop;
                    chosen = name;
                    tie = false;
                } else if (pop == best) {
                    tie = true;
                }
            }
            if (tie)
                throw config_error("split of '" + s.parent +
                                   "': children tied in population; set an explicit continuer");
        } else {
            bool found = false;
            for (const auto& [name, pop] : s.children) found = found || name == chosen;
            if (!found) throw config_error("split of '" + s.parent + "': continuer '" + chosen + "' not a child");
        }
        out.rename[chosen] = s.parent;
        for (const auto& [name, pop] : s.children)
            if (name != chosen) out.events.push_back({name, composition_event::kind::birth, "", s.year});
    }
    for (const merge_spec& m : spec.merges) {
        out.rename[m.merged_name] = m.survivor;
        out.events.push_back({m.absorbed, composition_event::kind::death, m.survivor, m.year});
    }
    return out;
}

/// Continuity spec file: {"splits": [{"parent", "year", "children":
/// [{"name", "population"}], "continuer"?}], "merges": [{"survivor",
/// "absorbed", "merged_name", "year"}]}.
inline continuity_spec read_continuity_spec(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot open continuity spec '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& ex) {
        throw data_error("malformed continuity spec '" + path + "': " + ex.what());
    }
    continuity_spec spec;
    try {
        for (const auto& s : j.value("splits", nlohmann::json::array())) {
            split_spec sp;
            sp.parent = s.at("parent").get<std::string>();
            sp.year = s.at("year").get<int>();
            for (const auto& c : s.at("children"))
                sp.children.emplace_back(c.at("name").get<std::string>(), c.at("population").get<double>());
            sp.continuer = s.value("continuer", "");
            spec.splits.push_back(std::move(sp));
        }
        for (const auto& m : j.value("merges", nlohmann::json::array())) {
            merge_spec ms;
            ms.survivor = m.at("survivor").get<std::string>();
            ms.absorbed = m.at("absorbed").get<std::string>();
            ms.merged_name = m.at("merged_name").get<std::string>();
            ms.year = m.at("year").get<int>();
            spec.merges.push_back(std::move(ms));
        }
    } catch (const nlohmann::json::exception& ex) {
        throw data_error("continuity spec '" + path + "': " + ex.what());
    }
    return spec;
}

/// Applies the continuity rename map to reporter and partner names.
inline std::vector<flow_record> apply_renames(std::vector<flow_record> records,
                                              const std::map<std::string, std::string>& rename) {
    for (flow_record& r : records) {
        auto it = rename.find(r.reporter);
        if (it != rename.end()) r.reporter = it->second;
        it = rename.find(r.partner);
        if (it != rename.end()) r.partner = it->second;
    }
    return records;
}

/// Actor-by-wave covariate: ln predicted market size; countries lacking data
/// in a wave get 0 and a provenance note.
inline real_matrix log_market_size_covariate(const network_panel& panel, const market_size_model& model,
                                             const country_stats& stats, provenance_log& log) {
    real_matrix m(panel.actor_count(), panel.wave_count());
    for (int i = 0; i < panel.actor_count(); ++i) {
        const std::string& country = panel.countries()[i];
        auto country_it = stats.find(country);
        for (int t = 0; t < panel.wave_count(); ++t) {
            const country_stat* st = nullptr;
            if (country_it != stats.end()) {
                auto year_it = country_it->second.find(panel.year(t));
                if (year_it != country_it->second.end()) st = &year_it->second;
            }
            if (st) {
                m(i, t) = std::log(predict_market_size(model, st->gdp_per_capita, st->population));
            } else {
                m(i, t) = 0.0;
                log.push_back({"market_size_covariate_missing",
                               {{"country", country}, {"year", panel.year(t)}}});
            }
        }
    }
    return m;
}

// ---------------------------------------------------------------------------
// File readers (delimited text with caller-declared column names).

struct flow_columns {
    std::string reporter = "reporter";
    std::string partner = "partner";
    std::string year = "year";
    std::string value = "value";
    std::string re_exports = "re_exports";  // optional in the file
    std::string direction = "direction";    // optional; absent = all export reports
    std::string commodity = "commodity";    // optional; used only when filtering
};

inline std::vector<flow_record> read_flows(const std::string& path, const flow_columns& cols,
                                           const std::optional<std::string>& commodity_filter,
                                           provenance_log& log) {
    const csv::table t = csv::read_file(path);
    const int c_rep = t.column(cols.reporter);
    const int c_par = t.column(cols.partner);
    const int c_year = t.column(cols.year);
    const int c_val = t.column(cols.value);
    const int c_re = t.has_column(cols.re_exports) ? t.column(cols.re_exports) : -1;
    const int c_dir = t.has_column(cols.direction) ? t.column(cols.direction) : -1;
    const int c_com = t.has_column(cols.commodity) ? t.column(cols.commodity) : -1;
    if (commodity_filter && c_com < 0)
        throw config_error("flows file lacks commodity column '" + cols.commodity + "'");

    std::vector<flow_record> out;
    long filtered = 0;
    for (const auto& row : t.rows) {
        if (commodity_filter && row[c_com] != *commodity_filter) {
            ++filtered;
            continue;
        }
        flow_record r;
        r.reporter = row[c_rep];
        r.partner = row[c_par];
        r.year = csv::to_int(row[c_year], path + ": year");
        r.gross_exports = csv::to_double(row[c_val], path + ": value");
        r.re_exports = c_re >= 0 && !row[c_re].empty() ? csv::to_double(row[c_re], path + ": re_exports") : 0.0;
        if (c_dir >= 0) {
            if (row[c_dir] == "import")
                r.import_report = true;
            else if (row[c_dir] != "export")
                throw data_error(path + ": direction must be 'export' or 'import', got '" + row[c_dir] + "'");
        }
        if (r.gross_exports < 0.0 || r.re_exports < 0.0) throw data_error(path + ": negative trade value");
        out.push_back(std::move(r));
    }
    if (filtered) log.push_back({"commodity_filtered_out", {{"rows", filtered}}});
    return out;
}

inline country_stats read_country_stats(const std::string& path) {
    const csv::table t = csv::read_file(path);
    const int c_country = t.column("country");
    const int c_year = t.column("year");
    const int c_gdp = t.column("gdp_per_capita");
    const int c_pop = t.column("population");
    country_stats out;
    for (const auto& row : t.rows) {
        country_stat s;
        s.gdp_per_capita = csv::to_double(row[c_gdp], path + ": gdp_per_capita");
        s.population = csv::to_double(row[c_pop], path + ": population");
        out[row[c_country]][csv::to_int(row[c_year], path + ": year")] = s;
    }
    return out;
}

/// Long-format dyadic covariate (country_a, country_b, value) -> matrix over
/// the panel's universe; unlisted pairs stay 0.
inline real_matrix read_dyadic_covariate(const std::string& path, const network_panel& panel) {
    const csv::table t = csv::read_file(path);
    const int c_a = t.column("country_a");
    const int c_b = t.column("country_b");
    const int c_v = t.column("value");
    real_matrix m(panel.actor_count(), panel.actor_count());
    for (const auto& row : t.rows) {
        const auto i = panel.index_of(row[c_a]);
        const auto j = panel.index_of(row[c_b]);
        if (!i || !j) continue;  // covariate files may cover more countries than the panel
        m(*i, *j) = csv::to_double(row[c_v], path + ": value");
    }
    return m;
}

inline std::vector<market_observation> read_market_observations(const std::string& path) {
    const csv::table t = csv::read_file(path);
    const int c_m = t.column("market");
    const int c_g = t.column("gdp_per_capita");
    const int c_p = t.column("population");
    std::vector<market_observation> out;
    for (const auto& row : t.rows)
        out.push_back({csv::to_double(row[c_m], path + ": market"),
                       csv::to_double(row[c_g], path + ": gdp_per_capita"),
                       csv::to_double(row[c_p], path + ": population")});
    return out;
}

}  // namespace saom
