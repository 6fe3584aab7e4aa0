#pragma once

/// @file report.hpp
/// @brief Area/delay comparison tables: theory bound and baseline columns
///        from the generators, tool columns from circuit pools.

#include "prefixsyn/baselines.hpp"
#include "prefixsyn/circuit.hpp"
#include "prefixsyn/dse.hpp"

#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace prefixsyn {

/// One table row: a (width, delay bound) cell per circuit source. Baseline
/// cells are filled only where the topology's own delay equals the bound;
/// the tool cell holds the best pool area within the bound.
struct ReportRow {
    int width = 0;
    int delay = 0;
    bool feasible = true; // delay >= ceil(log2 n) + 1
    int theory_bound = 0;
    std::optional<int> sklansky_area;
    std::optional<int> kogge_stone_area;
    std::optional<int> brent_kung_area;
    std::optional<int> tool_area;
};

inline std::vector<ReportRow> build_report(const std::vector<int>& widths,
                                           const std::vector<int>& delays,
                                           const std::vector<CircuitPool>& pools) {
    std::vector<ReportRow> rows;
    for (int n : widths) {
        bool pow2 = n >= 2 && (n & (n - 1)) == 0;
        std::optional<Metrics> sk, ks, bk;
        if (pow2) {
            sk = sklansky(n).metrics();
            ks = kogge_stone(n).metrics();
            bk = brent_kung(n).metrics();
        }
        for (int delay : delays) {
            ReportRow row;
            row.width = n;
            row.delay = delay;
            row.feasible = delay >= ceil_log2(n) + 1;
            row.theory_bound = row.feasible ? area_lower_bound(n, delay) : 0;
            if (sk && sk->delay == delay)
                row.sklansky_area = sk->area;
            if (ks && ks->delay == delay)
                row.kogge_stone_area = ks->area;
            if (bk && bk->delay == delay)
                row.brent_kung_area = bk->area;
            for (const CircuitPool& pool : pools)
                for (const CircuitPool::Entry& e : pool.entries()) {
                    if (e.circuit.width() != n || e.metrics.delay > delay)
                        continue;
                    if (!row.tool_area || e.metrics.area < *row.tool_area)
                        row.tool_area = e.metrics.area;
                }
            rows.push_back(row);
        }
    }
    return rows;
}

namespace detail {
inline std::string cell(const std::optional<int>& v) {
    return v ? std::to_string(*v) : "-";
}
} // namespace detail

/// Aligned text table.
inline std::string render_report(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << std::setw(6) << "width" << std::setw(7) << "delay" << std::setw(7) << "bound"
        << std::setw(10) << "sklansky" << std::setw(13) << "kogge-stone" << std::setw(12)
        << "brent-kung" << std::setw(7) << "tool" << "\n";
    for (const ReportRow& row : rows) {
        out << std::setw(6) << row.width << std::setw(7) << row.delay;
        if (!row.feasible) {
            out << std::setw(7) << "-" << std::setw(10) << "-" << std::setw(13) << "-"
                << std::setw(12) << "-" << std::setw(7) << "-" << "  (infeasible)\n";
            continue;
        }
        out << std::setw(7) << row.theory_bound << std::setw(10) << detail::cell(row.sklansky_area)
            << std::setw(13) << detail::cell(row.kogge_stone_area) << std::setw(12)
            << detail::cell(row.brent_kung_area) << std::setw(7) << detail::cell(row.tool_area)
            << "\n";
    }
    return out.str();
}

/// Machine-readable CSV with the same cells.
inline std::string render_report_csv(const std::vector<ReportRow>& rows) {
    std::ostringstream out;
    out << "width,delay,feasible,theory_bound,sklansky,kogge_stone,brent_kung,tool\n";
    for (const ReportRow& row : rows) {
        out << row.width << "," << row.delay << "," << (row.feasible ? 1 : 0) << ","
            << (row.feasible ? std::to_string(row.theory_bound) : "-") << ","
            << detail::cell(row.sklansky_area) << "," << detail::cell(row.kogge_stone_area) << ","
            << detail::cell(row.brent_kung_area) << "," << detail::cell(row.tool_area) << "\n";
    }
    return out.str();
}

} // namespace prefixsyn
