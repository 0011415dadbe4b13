#pragma once

#include <cmath>
#include <cstdio>
#include <string>
#include <vector>

#include "saom/csv.hpp"

namespace saom {

/// Fixed-decimal formatting; NaN renders as NA (e.g. no standard error for a
/// fixed effect).
inline std::string format_fixed(double v, int decimals) {
    if (std::isnan(v)) return "NA";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*f", decimals, v);
    return buf;
}

/// Small report table rendered both human-aligned and as CSV; every emitted
/// table goes through this so the two forms cannot drift apart.
struct text_table {
    std::string title;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    void add_row(std::vector<std::string> row) { rows.push_back(std::move(row)); }

    /// Aligned text: first column left-aligned, the rest right-aligned.
    std::string aligned() const {
        std::vector<std::size_t> width(header.size(), 0);
        for (std::size_t c = 0; c < header.size(); ++c) width[c] = header[c].size();
        for (const auto& row : rows)
            for (std::size_t c = 0; c < row.size() && c < width.size(); ++c)
                width[c] = std::max(width[c], row[c].size());
        std::string out;
        if (!title.empty()) out += title + "\n";
        auto emit = [&](const std::vector<std::string>& row) {
            for (std::size_t c = 0; c < width.size(); ++c) {
                const std::string& cell = c < row.size() ? row[c] : std::string();
                if (c) out += "  ";
                if (c == 0) {
                    out += cell;
                    out.append(width[c] - cell.size(), ' ');
                } else {
                    out.append(width[c] - cell.size(), ' ');
                    out += cell;
                }
            }
            while (!out.empty() && out.back() == ' ') out.pop_back();
            out += '\n';
        };
        emit(header);
        std::size_t rule = 0;
        for (std::size_t c = 0; c < width.size(); ++c) rule += width[c] + (c ? 2 : 0);
        out += std::string(rule, '-') + "\n";
        for (const auto& row : rows) emit(row);
        return out;
    }

    std::string csv() const {
        std::string out;
        auto emit = [&](const std::vector<std::string>& row) {
            for (std::size_t c = 0; c < row.size(); ++c) {
                if (c) out += ',';
                out += csv::quote_field(row[c]);
            }
            out += '\n';
        };
        emit(header);
        for (const auto& row : rows) emit(row);
        return out;
    }
};

}  // namespace saom
