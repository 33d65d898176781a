#pragma once

#include <cstdio>
#include <fstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "restrictlab/common.hpp"

namespace restrictlab::report {

inline constexpr const char* schema_version = "1";
inline constexpr const char* code_version = "0.1.0";

/// Fixed 17-significant-digit rendering; the same config and seed always
/// serialize to identical bytes.
inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// One experiment outcome: ordered parameter and scalar key/value lists plus
/// an optional table. Values are pre-formatted strings so that emission is
/// trivially byte-stable. Elapsed time is console metadata and never lands
/// in emitted files.
struct ResultRecord {
    std::string experiment;
    std::uint64_t seed = 0;
    std::vector<std::pair<std::string, std::string>> params;
    std::vector<std::pair<std::string, std::string>> scalars;
    std::vector<std::string> table_header;
    std::vector<std::vector<std::string>> table_rows;
    double elapsed_seconds = 0.0;

    void param(const std::string& k, const std::string& v) { params.emplace_back(k, v); }
    void param(const std::string& k, double v) { params.emplace_back(k, format_double(v)); }
    void param(const std::string& k, std::int64_t v) { params.emplace_back(k, std::to_string(v)); }
    void scalar(const std::string& k, const std::string& v) { scalars.emplace_back(k, v); }
    void scalar(const std::string& k, double v) { scalars.emplace_back(k, format_double(v)); }
    void scalar(const std::string& k, std::int64_t v) { scalars.emplace_back(k, std::to_string(v)); }
};

inline nlohmann::ordered_json to_json(const ResultRecord& rec) {
    nlohmann::ordered_json j;
    j["experiment"] = rec.experiment;
    j["schema_version"] = schema_version;
    j["code_version"] = code_version;
    j["seed"] = rec.seed;
    nlohmann::ordered_json params = nlohmann::ordered_json::object();
    for (const auto& [k, v] : rec.params) params[k] = v;
    j["params"] = params;
    nlohmann::ordered_json scalars = nlohmann::ordered_json::object();
    for (const auto& [k, v] : rec.scalars) scalars[k] = v;
    j["scalars"] = scalars;
    if (!rec.table_header.empty()) {
        j["table_header"] = rec.table_header;
        j["table_rows"] = rec.table_rows;
    }
    return j;
}

inline std::vector<ResultRecord> records_from_json(const nlohmann::ordered_json& j) {
    std::vector<ResultRecord> out;
    for (const auto& rj : j.at("records")) {
        ResultRecord rec;
        rec.experiment = rj.at("experiment").get<std::string>();
        rec.seed = rj.at("seed").get<std::uint64_t>();
        for (const auto& [k, v] : rj.at("params").items())
            rec.params.emplace_back(k, v.get<std::string>());
        for (const auto& [k, v] : rj.at("scalars").items())
            rec.scalars.emplace_back(k, v.get<std::string>());
        if (rj.contains("table_header")) {
            rec.table_header = rj.at("table_header").get<std::vector<std::string>>();
            rec.table_rows = rj.at("table_rows").get<std::vector<std::vector<std::string>>>();
        }
        out.push_back(std::move(rec));
    }
    return out;
}

inline std::string csv_escape(const std::string& s) {
    bool needs = s.find_first_of(",\"\n") != std::string::npos;
    if (!needs) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += "\"";
    return out;
}

/// Long-format CSV: one row per parameter, scalar, or table cell.
/// Header: record,experiment,section,name,value. Table cells use section
/// "table:<row>" and the column name from the table header.
inline void emit_csv(const std::vector<ResultRecord>& records, std::ostream& os) {
    os << "record,experiment,section,name,value\n";
    for (std::size_t i = 0; i < records.size(); ++i) {
        const ResultRecord& rec = records[i];
        auto row = [&](const std::string& section, const std::string& name,
                       const std::string& value) {
            os << i << ',' << csv_escape(rec.experiment) << ',' << csv_escape(section) << ','
               << csv_escape(name) << ',' << csv_escape(value) << '\n';
        };
        row("meta", "schema_version", schema_version);
        row("meta", "code_version", code_version);
        row("meta", "seed", std::to_string(rec.seed));
        for (const auto& [k, v] : rec.params) row("param", k, v);
        for (const auto& [k, v] : rec.scalars) row("scalar", k, v);
        for (std::size_t r = 0; r < rec.table_rows.size(); ++r)
            for (std::size_t c = 0; c < rec.table_rows[r].size(); ++c)
                row("table:" + std::to_string(r), rec.table_header[c], rec.table_rows[r][c]);
    }
}

inline void emit_json(const std::vector<ResultRecord>& records, std::ostream& os) {
    nlohmann::ordered_json j;
    j["schema_version"] = schema_version;
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& rec : records) arr.push_back(to_json(rec));
    j["records"] = arr;
    os << j.dump(2) << '\n';
}

/// Companion plot script: reads the emitted CSV by relative path and plots
/// every numeric table column against the table row index.
inline void emit_plot_script(const std::string& csv_relative, std::ostream& os) {
    os << "#!/usr/bin/env python3\n"
          "# Plots the table columns of " << csv_relative << " against row index.\n"
          "import csv, collections\n"
          "import matplotlib\n"
          "matplotlib.use('Agg')\n"
          "import matplotlib.pyplot as plt\n"
          "series = collections.defaultdict(dict)\n"
          "with open('" << csv_relative << "') as fh:\n"
          "    for row in csv.DictReader(fh):\n"
          "        if not row['section'].startswith('table:'):\n"
          "            continue\n"
          "        idx = int(row['section'].split(':')[1])\n"
          "        key = (row['record'], row['name'])\n"
          "        try:\n"
          "            series[key][idx] = float(row['value'])\n"
          "        except ValueError:\n"
          "            pass\n"
          "fig, ax = plt.subplots()\n"
          "for (rec, name), pts in sorted(series.items()):\n"
          "    xs = sorted(pts)\n"
          "    ax.plot(xs, [pts[x] for x in xs], marker='o', label=f'{rec}:{name}')\n"
          "ax.set_xlabel('row')\n"
          "ax.legend(fontsize=6)\n"
          "fig.savefig('" << csv_relative << ".png', dpi=150)\n";
}

struct EmitPaths {
    std::string data;
    std::string plot;
};

/// Writes records in the requested format; optional plot companion script
/// refers to the data file by its file name (relative path).
inline EmitPaths emit(const std::vector<ResultRecord>& records, const std::string& format,
                      const std::string& path, bool plot) {
    require(format == "csv" || format == "json", "report.format",
            "format must be csv or json");
    EmitPaths out;
    out.data = path;
    {
        std::ofstream os(path, std::ios::binary);
        require(os.good(), "report.io", "cannot open output file " + path);
        if (format == "csv") emit_csv(records, os);
        else emit_json(records, os);
    }
    if (plot) {
        require(format == "csv", "report.plot_source", "plot scripts read the csv format");
        out.plot = path + "_plot.py";
        std::ofstream os(out.plot, std::ios::binary);
        require(os.good(), "report.io", "cannot open plot script " + out.plot);
        std::string rel = path;
        std::size_t slash = rel.find_last_of('/');
        if (slash != std::string::npos) rel = rel.substr(slash + 1);
        emit_plot_script(rel, os);
    }
    return out;
}

} // namespace restrictlab::report
