// SPDX-License-Identifier: Apache-2.0
//
// Flat-file output for sweeps. Reals are printed with 9 significant digits;
// infeasible rows carry "nan" in every metric and power column.

#ifndef ISAC_CSV_HPP
#define ISAC_CSV_HPP

#include "isac/error.hpp"
#include "isac/harness.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace isac {

inline std::string format_real(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string csv_header(std::size_t k_paths)
{
    std::string h = "trial,gamma_db,pt_dbm,solver,status,rate,pd,scnr_est_db,scnr_true_db,iters";
    for (std::size_t k = 0; k < k_paths; ++k)
        h += ",p" + std::to_string(k);
    return h;
}

inline void write_csv(std::ostream& out, const std::vector<TrialRecord>& records, std::size_t k_paths)
{
    out << csv_header(k_paths) << '\n';
    for (const TrialRecord& r : records) {
        out << r.trial << ',' << format_real(r.gamma_db) << ',' << format_real(r.pt_dbm) << ','
            << to_string(r.solver) << ',' << to_string(r.status) << ',' << format_real(r.rate) << ','
            << format_real(r.pd) << ',' << format_real(r.scnr_est_db) << ',' << format_real(r.scnr_true_db) << ','
            << r.solver_iters;
        for (std::size_t k = 0; k < k_paths; ++k)
            out << ',' << format_real(k < r.allocation.size() ? r.allocation[k] : std::nan(""));
        out << '\n';
    }
}

inline void write_csv(const std::vector<TrialRecord>& records, std::size_t k_paths, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError(path, "cannot open for writing");
    write_csv(out, records, k_paths);
    out.flush();
    if (!out)
        throw IoError(path, "write failed");
}

/// Power columns follow the allocation length of the first record.
inline void write_csv(const std::vector<TrialRecord>& records, const std::string& path)
{
    write_csv(records, records.empty() ? 0 : records.front().allocation.size(), path);
}

inline void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path)
{
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError(path, "cannot open for writing");
    const std::size_t k_paths = rows.empty() ? 0 : rows.front().power.size();
    out << "pt_dbm,gamma_db,ok,infeasible,rate,pd,scnr_est_db";
    for (std::size_t k = 0; k < k_paths; ++k)
        out << ",p" << k;
    out << '\n';
    for (const SummaryRow& r : rows) {
        out << format_real(r.pt_dbm) << ',' << format_real(r.gamma_db) << ',' << r.ok << ',' << r.infeasible << ','
            << format_real(r.rate) << ',' << format_real(r.pd) << ',' << format_real(r.scnr_est_db);
        for (double v : r.power)
            out << ',' << format_real(v);
        out << '\n';
    }
    out.flush();
    if (!out)
        throw IoError(path, "write failed");
}

/// Header plus raw string cells.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column(const std::string& name) const
    {
        for (std::size_t i = 0; i < header.size(); ++i)
            if (header[i] == name)
                return i;
        throw std::out_of_range("unknown column '" + name + "'");
    }

    double number(std::size_t row, std::size_t col) const
    {
        const std::string& cell = rows[row].at(col);
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        return (end == cell.c_str()) ? std::nan("") : v;
    }
};

inline std::vector<std::string> split_csv_line(const std::string& line)
{
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ss(line);
    while (std::getline(ss, cell, ','))
        cells.push_back(cell);
    if (!line.empty() && line.back() == ',')
        cells.emplace_back();
    return cells;
}

inline CsvTable read_csv(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(path, "cannot open for reading");
    CsvTable t;
    std::string line;
    if (!std::getline(in, line))
        throw IoError(path, "empty file");
    if (!line.empty() && line.back() == '\r')
        line.pop_back();
    t.header = split_csv_line(line);
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        t.rows.push_back(split_csv_line(line));
    }
    return t;
}

} // namespace isac

#endif // ISAC_CSV_HPP
