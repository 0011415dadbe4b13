#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "saom/common.hpp"
#include "saom/effects.hpp"
#include "saom/estimate.hpp"

namespace saom {

/// FNV-1a 64-bit hash, hex-encoded; identifies a config byte-for-byte in run
/// metadata.
inline std::string fnv1a64_hex(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Key-value run configuration in INI form: [section] headers, key = value
/// lines, ';' or '#' comments. Keys are validated against a fixed schema —
/// unknown sections or keys are errors, not warnings, because a silently
/// ignored typo can corrupt a long estimation run.
class run_config {
  public:
    struct entry {
        std::string key;
        std::string value;
        int line = 0;
    };

    static run_config from_string(std::string text, const std::string& origin = "<config>") {
        run_config cfg;
        cfg.raw_ = std::move(text);
        cfg.origin_ = origin;
        cfg.parse();
        cfg.validate_schema();
        return cfg;
    }

    static run_config from_file(const std::string& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw config_error("cannot open config file '" + path + "'");
        std::ostringstream ss;
        ss << in.rdbuf();
        return from_string(ss.str(), path);
    }

    const std::string& raw_text() const { return raw_; }
    std::string hash() const { return fnv1a64_hex(raw_); }

    bool has_section(const std::string& section) const { return sections_.count(section) != 0; }

    bool has(const std::string& section, const std::string& key) const {
        auto it = sections_.find(section);
        if (it == sections_.end()) return false;
        for (const entry& e : it->second)
            if (e.key == key) return true;
        return false;
    }

    std::vector<std::string> get_all(const std::string& section, const std::string& key) const {
        std::vector<std::string> out;
        auto it = sections_.find(section);
        if (it == sections_.end()) return out;
        for (const entry& e : it->second)
            if (e.key == key) out.push_back(e.value);
        return out;
    }

    std::optional<std::string> get(const std::string& section, const std::string& key) const {
        const auto all = get_all(section, key);
        if (all.empty()) return std::nullopt;
        if (all.size() > 1)
            throw config_error(where(section, key) + " given " + std::to_string(all.size()) +
                               " times; expected once");
        return all.front();
    }

    std::string require(const std::string& section, const std::string& key) const {
        auto v = get(section, key);
        if (!v) throw config_error(where(section, key) + " is required");
        return *v;
    }

    std::string get_or(const std::string& section, const std::string& key, const std::string& fallback) const {
        auto v = get(section, key);
        return v ? *v : fallback;
    }

    long get_int(const std::string& section, const std::string& key, long fallback) const {
        auto v = get(section, key);
        if (!v) return fallback;
        try {
            std::size_t pos = 0;
            const long out = std::stol(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("");
            return out;
        } catch (const std::exception&) {
            throw config_error(where(section, key) + ": '" + *v + "' is not an integer");
        }
    }

    double get_double(const std::string& section, const std::string& key, double fallback) const {
        auto v = get(section, key);
        if (!v) return fallback;
        try {
            std::size_t pos = 0;
            const double out = std::stod(*v, &pos);
            if (pos != v->size()) throw std::invalid_argument("");
            return out;
        } catch (const std::exception&) {
            throw config_error(where(section, key) + ": '" + *v + "' is not a number");
        }
    }

    bool get_bool(const std::string& section, const std::string& key, bool fallback) const {
        auto v = get(section, key);
        if (!v) return fallback;
        if (*v == "true" || *v == "1" || *v == "yes") return true;
        if (*v == "false" || *v == "0" || *v == "no") return false;
        throw config_error(where(section, key) + ": '" + *v + "' is not a boolean");
    }

    std::uint64_t require_seed() const {
        const std::string v = require("run", "seed");
        try {
            std::size_t pos = 0;
            const unsigned long long out = std::stoull(v, &pos);
            if (pos != v.size()) throw std::invalid_argument("");
            return out;
        } catch (const std::exception&) {
            throw config_error("run.seed: '" + v + "' is not a nonnegative integer");
        }
    }

    /// Accepted sections/keys; a trailing '*' marks keys that may repeat.
    static const std::map<std::string, std::set<std::string>>& schema() {
        static const std::map<std::string, std::set<std::string>> s = {
            {"run", {"seed", "output_dir"}},
            {"panel", {"path"}},
            {"prep",
             {"flows", "country_stats", "years", "scheme", "relative_percent", "absolute_coverage",
              "commodity", "market_calibration", "market_intercept", "market_coef_gdp", "market_coef_pop",
              "continuity", "dyadic_covariate*", "col_reporter", "col_partner", "col_year", "col_value",
              "col_re_exports", "col_direction", "col_commodity"}},
            {"model", {"effect*", "rates"}},
            {"estimation",
             {"subphases", "initial_gain", "subphase_base_iterations", "derivative_reps", "derivative_delta",
              "phase3_chains", "t_threshold", "max_restarts", "rate_warmup_iterations", "max_step",
              "default_initial_values"}},
            {"simulation", {"chains"}},
            {"nonparam", {"p_method", "resamples"}},
            {"sweep", {"thresholds"}},
        };
        return s;
    }

  private:
    std::string where(const std::string& section, const std::string& key) const {
        return origin_ + ": [" + section + "] " + key;
    }

    static std::string trim(const std::string& s) {
        const auto b = s.find_first_not_of(" \t\r");
        if (b == std::string::npos) return "";
        const auto e = s.find_last_not_of(" \t\r");
        return s.substr(b, e - b + 1);
    }

    void parse() {
        std::istringstream in(raw_);
        std::string line, section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto comment = line.find_first_of(";#");
            if (comment != std::string::npos) line = line.substr(0, comment);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[') {
                if (line.back() != ']')
                    throw config_error(origin_ + ":" + std::to_string(lineno) + ": malformed section header");
                section = trim(line.substr(1, line.size() - 2));
                if (section.empty())
                    throw config_error(origin_ + ":" + std::to_string(lineno) + ": empty section name");
                sections_[section];  // remember even if empty
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw config_error(origin_ + ":" + std::to_string(lineno) + ": expected key = value");
            if (section.empty())
                throw config_error(origin_ + ":" + std::to_string(lineno) + ": key outside any [section]");
            entry e;
            e.key = trim(line.substr(0, eq));
            e.value = trim(line.substr(eq + 1));
            e.line = lineno;
            if (e.key.empty())
                throw config_error(origin_ + ":" + std::to_string(lineno) + ": empty key");
            sections_[section].push_back(std::move(e));
        }
    }

    void validate_schema() {
        for (const auto& [section, entries] : sections_) {
            auto schema_it = schema().find(section);
            if (schema_it == schema().end())
                throw config_error(origin_ + ": unknown section [" + section + "]");
            std::map<std::string, int> counts;
            for (const entry& e : entries) {
                const bool known = schema_it->second.count(e.key) || schema_it->second.count(e.key + "*");
                if (!known)
                    throw config_error(origin_ + ":" + std::to_string(e.line) + ": unknown key '" + e.key +
                                       "' in section [" + section + "]");
                const bool repeatable = schema_it->second.count(e.key + "*") != 0;
                if (++counts[e.key] > 1 && !repeatable)
                    throw config_error(origin_ + ":" + std::to_string(e.line) + ": key '" + e.key +
                                       "' in section [" + section + "] may not repeat");
            }
        }
    }

    std::string raw_;
    std::string origin_;
    std::map<std::string, std::vector<entry>> sections_;
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream in(s);
    std::vector<std::string> out;
    std::string tok;
    while (in >> tok) out.push_back(tok);
    return out;
}

inline std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != ' ' && c != '\t') {
            cur += c;
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

}  // namespace detail

inline std::vector<int> parse_int_list(const std::string& value, const std::string& what) {
    std::vector<int> out;
    for (const std::string& tok : detail::split_list(value)) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stoi(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw config_error(what + ": '" + tok + "' is not an integer");
        }
    }
    return out;
}

inline std::vector<double> parse_double_list(const std::string& value, const std::string& what) {
    std::vector<double> out;
    for (const std::string& tok : detail::split_list(value)) {
        try {
            std::size_t pos = 0;
            out.push_back(std::stod(tok, &pos));
            if (pos != tok.size()) throw std::invalid_argument("");
        } catch (const std::exception&) {
            throw config_error(what + ": '" + tok + "' is not a number");
        }
    }
    return out;
}

/// One `effect = ...` line: "<kind>[:<covariate>] <parametrization>
/// [beta=<v>] [fixed]". Kind "outdeg_assortativity_sqrt" selects the
/// square-root variant.
inline effect_spec parse_effect_line(const std::string& value) {
    const auto toks = detail::split_ws(value);
    if (toks.size() < 2) throw config_error("effect '" + value + "': need '<kind> <parametrization>'");
    effect_spec e;
    std::string kind = toks[0];
    const auto colon = kind.find(':');
    if (colon != std::string::npos) {
        e.covariate = kind.substr(colon + 1);
        kind = kind.substr(0, colon);
    }
    if (kind == "outdeg_assortativity_sqrt") {
        e.kind = effect_kind::outdeg_assortativity;
        e.variant = assort_variant::sqrt;
    } else {
        e.kind = parse_effect_kind(kind);
    }
    e.param = parse_parametrization(toks[1]);
    for (std::size_t i = 2; i < toks.size(); ++i) {
        if (toks[i] == "fixed") {
            e.fixed = true;
        } else if (toks[i].rfind("beta=", 0) == 0) {
            const std::string v = toks[i].substr(5);
            try {
                std::size_t pos = 0;
                e.beta = std::stod(v, &pos);
                if (pos != v.size()) throw std::invalid_argument("");
            } catch (const std::exception&) {
                throw config_error("effect '" + value + "': bad beta value '" + v + "'");
            }
        } else {
            throw config_error("effect '" + value + "': unknown token '" + toks[i] + "'");
        }
    }
    return e;
}

inline std::vector<effect_spec> parse_effects(const run_config& cfg) {
    std::vector<effect_spec> out;
    for (const std::string& line : cfg.get_all("model", "effect")) out.push_back(parse_effect_line(line));
    if (out.empty()) throw config_error("[model] must declare at least one effect");
    return out;
}

inline estimation_options parse_estimation_options(const run_config& cfg) {
    estimation_options opt;
    opt.subphases = static_cast<int>(cfg.get_int("estimation", "subphases", opt.subphases));
    opt.initial_gain = cfg.get_double("estimation", "initial_gain", opt.initial_gain);
    opt.subphase_base_iterations =
        static_cast<int>(cfg.get_int("estimation", "subphase_base_iterations", opt.subphase_base_iterations));
    opt.derivative_reps = static_cast<int>(cfg.get_int("estimation", "derivative_reps", opt.derivative_reps));
    opt.derivative_delta = cfg.get_double("estimation", "derivative_delta", opt.derivative_delta);
    opt.phase3_chains = static_cast<int>(cfg.get_int("estimation", "phase3_chains", opt.phase3_chains));
    opt.t_threshold = cfg.get_double("estimation", "t_threshold", opt.t_threshold);
    opt.max_restarts = static_cast<int>(cfg.get_int("estimation", "max_restarts", opt.max_restarts));
    opt.rate_warmup_iterations =
        static_cast<int>(cfg.get_int("estimation", "rate_warmup_iterations", opt.rate_warmup_iterations));
    opt.max_step = cfg.get_double("estimation", "max_step", opt.max_step);
    opt.default_initial_values =
        cfg.get_bool("estimation", "default_initial_values", opt.default_initial_values);
    if (opt.subphases < 1) throw config_error("estimation.subphases must be >= 1");
    if (!(opt.initial_gain > 0.0)) throw config_error("estimation.initial_gain must be positive");
    if (opt.phase3_chains < 2) throw config_error("estimation.phase3_chains must be >= 2");
    return opt;
}

}  // namespace saom
