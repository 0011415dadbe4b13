#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "saom/csv.hpp"
#include "saom/panel.hpp"

namespace saom {

namespace detail {

inline void write_text_file(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw data_error("cannot write " + path.string());
    out << body;
    if (!out) throw data_error("write failed for " + path.string());
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw data_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace detail

/// On-disk layout of a panel directory:
///   manifest.json                   countries, wave years, composition events
///   wave_<year>.csv                 edge list (exporter,importer), row-major order
///   covariates/dyadic_<name>.csv    n x n matrix, no header
///   covariates/actor_<name>.csv     n x waves matrix, no header
///
/// Masks are not stored: they are a pure function of the manifest events and
/// are rebuilt on load, so save -> load reproduces the panel bit for bit.
inline void save_panel(const network_panel& panel, const covariate_set& covariates,
                       const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);

    nlohmann::json manifest;
    manifest["countries"] = panel.countries();
    manifest["years"] = panel.years();
    manifest["events"] = nlohmann::json::array();
    for (const auto& ev : panel.events()) {
        nlohmann::json e;
        e["country"] = ev.country;
        e["kind"] = to_string(ev.event_kind);
        if (ev.event_kind == composition_event::kind::merge_into) e["parent"] = ev.parent;
        e["wave"] = ev.effective_wave;
        manifest["events"].push_back(e);
    }
    detail::write_text_file(dir / "manifest.json", manifest.dump(2) + "\n");

    for (int t = 0; t < panel.wave_count(); ++t) {
        std::ostringstream body;
        body << "exporter,importer\n";
        const binary_matrix& x = panel.wave(t);
        for (int i = 0; i < x.dim(); ++i)
            for (int j = 0; j < x.dim(); ++j)
                if (x(i, j))
                    body << csv::quote_field(panel.countries()[i]) << ','
                         << csv::quote_field(panel.countries()[j]) << '\n';
        detail::write_text_file(dir / ("wave_" + std::to_string(panel.year(t)) + ".csv"), body.str());
    }

    if (!covariates.dyadic_all().empty() || !covariates.actor_all().empty())
        fs::create_directories(dir / "covariates");
    auto write_matrix = [](const fs::path& path, const real_matrix& m) {
        std::ostringstream body;
        for (int i = 0; i < m.rows(); ++i) {
            for (int j = 0; j < m.cols(); ++j) {
                if (j) body << ',';
                body << csv::format_double(m(i, j));
            }
            body << '\n';
        }
        detail::write_text_file(path, body.str());
    };
    for (const auto& [name, m] : covariates.dyadic_all())
        write_matrix(dir / "covariates" / ("dyadic_" + name + ".csv"), m);
    for (const auto& [name, m] : covariates.actor_all())
        write_matrix(dir / "covariates" / ("actor_" + name + ".csv"), m);
}

inline void save_panel(const network_panel& panel, const std::filesystem::path& dir) {
    save_panel(panel, covariate_set{}, dir);
}

struct loaded_panel {
    network_panel panel;
    covariate_set covariates;
};

inline loaded_panel load_panel(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const fs::path manifest_path = dir / "manifest.json";
    nlohmann::json manifest;
    try {
        manifest = nlohmann::json::parse(detail::read_text_file(manifest_path));
    } catch (const nlohmann::json::parse_error& ex) {
        throw data_error("malformed " + manifest_path.string() + ": " + ex.what());
    }

    std::vector<std::string> countries = manifest.at("countries").get<std::vector<std::string>>();
    std::vector<int> years = manifest.at("years").get<std::vector<int>>();
    std::vector<composition_event> events;
    for (const auto& e : manifest.value("events", nlohmann::json::array())) {
        composition_event ev;
        ev.country = e.at("country").get<std::string>();
        const std::string kind = e.at("kind").get<std::string>();
        if (kind == "birth")
            ev.event_kind = composition_event::kind::birth;
        else if (kind == "death")
            ev.event_kind = composition_event::kind::death;
        else if (kind == "merge_into")
            ev.event_kind = composition_event::kind::merge_into;
        else
            throw data_error("manifest event has unknown kind '" + kind + "'");
        if (ev.event_kind == composition_event::kind::merge_into) ev.parent = e.at("parent").get<std::string>();
        ev.effective_wave = e.at("wave").get<int>();
        events.push_back(ev);
    }

    const int n = static_cast<int>(countries.size());
    auto index_of = [&](const std::string& name, const fs::path& where) -> int {
        for (int i = 0; i < n; ++i)
            if (countries[i] == name) return i;
        throw data_error(where.string() + ": unknown country '" + name + "'");
    };

    std::vector<wave_observation> observations;
    for (int year : years) {
        const fs::path wave_path = dir / ("wave_" + std::to_string(year) + ".csv");
        csv::table t = csv::read_file(wave_path.string());
        if (t.header.size() != 2 || t.header[0] != "exporter" || t.header[1] != "importer")
            throw data_error(wave_path.string() + ": expected header exporter,importer");
        wave_observation obs;
        obs.year = year;
        obs.adjacency = binary_matrix(n);
        for (const auto& row : t.rows) {
            if (row.size() != 2) throw data_error(wave_path.string() + ": row with wrong field count");
            obs.adjacency.set(index_of(row[0], wave_path), index_of(row[1], wave_path), true);
        }
        observations.push_back(std::move(obs));
    }

    loaded_panel out{build_panel(std::move(countries), std::move(observations), std::move(events)), {}};

    const fs::path cov_dir = dir / "covariates";
    if (fs::exists(cov_dir)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(cov_dir))
            if (entry.path().extension() == ".csv") files.push_back(entry.path());
        std::sort(files.begin(), files.end());
        for (const auto& path : files) {
            const std::string stem = path.stem().string();
            csv::table t = csv::read_file(path.string(), /*has_header=*/false);
            real_matrix m(static_cast<int>(t.rows.size()),
                          t.rows.empty() ? 0 : static_cast<int>(t.rows[0].size()));
            for (int i = 0; i < m.rows(); ++i) {
                if (static_cast<int>(t.rows[i].size()) != m.cols())
                    throw data_error(path.string() + ": ragged matrix");
                for (int j = 0; j < m.cols(); ++j) m(i, j) = csv::to_double(t.rows[i][j], path.string());
            }
            if (stem.rfind("dyadic_", 0) == 0)
                out.covariates.add_dyadic(stem.substr(7), std::move(m));
            else if (stem.rfind("actor_", 0) == 0)
                out.covariates.add_actor(stem.substr(6), std::move(m));
            else
                throw data_error(path.string() + ": covariate file must be named dyadic_* or actor_*");
        }
        out.covariates.validate_against(out.panel.actor_count(), out.panel.wave_count());
    }
    return out;
}

}  // namespace saom
