// Copyright 2026 The hvqa Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     http://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

/**
 * @file
 * CSV artifacts.
 *
 * Schema: lines starting with "# " carry key=value metadata (schema,
 * version, command, config_hash, seed); the first other line is the
 * column header; floats use 17 significant digits.
 */

#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace hvqa::io {

inline constexpr int csv_schema_version = 1;

#ifdef HVQA_VERSION
inline constexpr const char *version = HVQA_VERSION;
#else
inline constexpr const char *version = "unknown";
#endif

/// 64-bit FNV-1a.
inline std::uint64_t fnv1a(std::string_view text) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

inline std::string hex(std::uint64_t value) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
    return buf;
}

inline std::string format_double(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct Metadata {
    std::string command;
    std::uint64_t config_hash = 0;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> extra;
};

using Cell = std::variant<double, long long, std::string>;

inline std::string to_cell(const Cell &c) {
    if (const auto *d = std::get_if<double>(&c)) {
        return format_double(*d);
    }
    if (const auto *i = std::get_if<long long>(&c)) {
        return std::to_string(*i);
    }
    return std::get<std::string>(c);
}

struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;

    void add(std::vector<Cell> row) {
        if (row.size() != header.size()) {
            throw InvalidInput("Table::add: row width differs from header");
        }
        rows.push_back(std::move(row));
    }
};

inline void write_csv(std::ostream &out, const Metadata &meta, const Table &table) {
    out << "# schema=" << csv_schema_version << '\n';
    out << "# version=" << version << '\n';
    out << "# command=" << meta.command << '\n';
    out << "# config_hash=" << hex(meta.config_hash) << '\n';
    out << "# seed=" << meta.seed << '\n';
    for (const auto &[k, v] : meta.extra) {
        out << "# " << k << '=' << v << '\n';
    }
    for (std::size_t i = 0; i < table.header.size(); ++i) {
        out << (i ? "," : "") << table.header[i];
    }
    out << '\n';
    for (const auto &row : table.rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? "," : "") << to_cell(row[i]);
        }
        out << '\n';
    }
}

inline void write_csv(const std::string &path, const Metadata &meta, const Table &table) {
    std::ofstream out(path);
    if (!out) {
        throw ConfigError("cannot write " + path);
    }
    write_csv(out, meta, table);
}

struct CsvFile {
    std::map<std::string, std::string> metadata;
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] std::size_t column(const std::string &name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) {
                return i;
            }
        }
        throw InvalidInput("CSV has no column '" + name + "'");
    }

    [[nodiscard]] std::vector<double> numbers(const std::string &name) const {
        const auto c = column(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto &r : rows) {
            out.push_back(std::stod(r.at(c)));
        }
        return out;
    }
};

inline CsvFile parse_csv(std::istream &in) {
    CsvFile f;
    std::string line;
    auto split = [](const std::string &s) {
        std::vector<std::string> cells;
        std::stringstream ss(s);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        return cells;
    };
    while (std::getline(in, line)) {
        if (line.empty()) {
            continue;
        }
        if (line.rfind("# ", 0) == 0) {
            const auto eq = line.find('=');
            if (eq != std::string::npos) {
                f.metadata[line.substr(2, eq - 2)] = line.substr(eq + 1);
            }
            continue;
        }
        if (f.header.empty()) {
            f.header = split(line);
        } else {
            f.rows.push_back(split(line));
        }
    }
    return f;
}

inline CsvFile read_csv(const std::string &path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot read " + path);
    }
    return parse_csv(in);
}

} // namespace hvqa::io
