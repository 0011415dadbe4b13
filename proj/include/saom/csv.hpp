#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "saom/common.hpp"

namespace saom::csv {

/// Split one CSV line. Handles RFC-4180 quoting ("" escapes a quote inside a
/// quoted field); needed because partner designations like "Other Asia, nes"
/// contain the delimiter.
inline std::vector<std::string> split_line(const std::string& line, char delim = ',') {
    std::vector<std::string> fields;
    std::string field;
    bool quoted = false;
    for (std::size_t p = 0; p < line.size(); ++p) {
        const char c = line[p];
        if (quoted) {
            if (c == '"') {
                if (p + 1 < line.size() && line[p + 1] == '"') {
                    field += '"';
                    ++p;
                } else {
                    quoted = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            fields.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field += c;
        }
    }
    fields.push_back(field);
    return fields;
}

/// Shortest decimal form that parses back to the identical double; keeps
/// serialized numbers bit-faithful and byte-stable across runs.
inline std::string format_double(double v) {
    char buf[64];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) return buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string quote_field(const std::string& s, char delim = ',') {
    if (s.find_first_of(std::string{delim} + "\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

struct table {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    int column(const std::string& name) const {
        for (std::size_t c = 0; c < header.size(); ++c)
            if (header[c] == name) return static_cast<int>(c);
        throw data_error("csv: missing column '" + name + "'");
    }

    bool has_column(const std::string& name) const {
        for (const auto& h : header)
            if (h == name) return true;
        return false;
    }
};

inline table read_file(const std::string& path, bool has_header = true, char delim = ',') {
    std::ifstream in(path);
    if (!in) throw data_error("csv: cannot open '" + path + "'");
    table t;
    std::string line;
    bool want_header = has_header;
    bool saw_any = false;
    while (std::getline(in, line)) {
        if (line.empty() && in.peek() == std::ifstream::traits_type::eof()) break;
        saw_any = true;
        auto fields = split_line(line, delim);
        if (want_header) {
            t.header = std::move(fields);
            want_header = false;
        } else {
            t.rows.push_back(std::move(fields));
        }
    }
    if (has_header && !saw_any) throw data_error("csv: '" + path + "' is empty");
    return t;
}

inline double to_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw data_error("csv: bad numeric value '" + s + "' for " + what);
    }
}

inline int to_int(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw data_error("csv: bad integer value '" + s + "' for " + what);
    }
}

}  // namespace saom::csv
