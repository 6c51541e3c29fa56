#include "dscope/report.hpp"

#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <sstream>

namespace dscope {

using nlohmann::json;

namespace {

std::string fmt_r(const CorrelationCell& cell) {
    if (cell.degenerate) return "NaN";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3f", cell.r);
    return buf;
}

/// Lossless double for CSV cells.
std::string fmt_full(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

json cell_to_json(const CorrelationCell& cell) {
    // JSON has no NaN literal; degenerate cells carry null.
    if (cell.degenerate) return json{{"r", nullptr}, {"degenerate", true}};
    return json{{"r", cell.r}, {"degenerate", false}};
}

CorrelationCell cell_from_json(const json& doc) {
    CorrelationCell cell;
    cell.degenerate = doc.at("degenerate").get<bool>();
    if (!cell.degenerate) cell.r = doc.at("r").get<double>();
    return cell;
}

}  // namespace

ReportFormat report_format_from_string(const std::string& name) {
    if (name == "text" || name == "text-table" || name == "txt") return ReportFormat::text_table;
    if (name == "json") return ReportFormat::json;
    if (name == "csv") return ReportFormat::csv;
    throw InvalidInputError("unknown report format '" + name + "'");
}

std::string report_to_text(const CorrelationReport& report) {
    std::ostringstream out;
    out << "Pearson correlations to human judgement (greedy vs expected-value scores)\n";
    char line[160];
    std::snprintf(line, sizeof(line), "%-12s %-10s %10s %10s %8s %12s\n", "Metric",
                  "Ordering", "Greedy r", "E(s) r", "cdf", "significant");
    out << line;
    for (const auto& row : report.rows) {
        for (const auto& o : row.orderings) {
            std::string cdf = "-";
            std::string sig = "-";
            if (o.significance) {
                char buf[32];
                std::snprintf(buf, sizeof(buf), "%.3f", o.significance->cdf_at_r2);
                cdf = buf;
                sig = o.significance->significant ? "yes" : "no";
            }
            std::snprintf(line, sizeof(line), "%-12s %-10s %10s %10s %8s %12s\n",
                          row.metric.c_str(), o.ordering.c_str(), fmt_r(o.greedy_r).c_str(),
                          fmt_r(o.expected_r).c_str(), cdf.c_str(), sig.c_str());
            out << line;
        }
    }
    std::snprintf(line, sizeof(line),
                  "examples: in=%d scored=%d failed=%d | source=%s T=%g seed=%llu shuffles=%d\n",
                  report.examples_in, report.examples_scored, report.examples_failed,
                  report.source.c_str(), report.temperature,
                  static_cast<unsigned long long>(report.seed), report.shuffles);
    out << line;
    return out.str();
}

json report_to_json(const CorrelationReport& report) {
    json rows = json::array();
    for (const auto& row : report.rows) {
        json orderings = json::array();
        for (const auto& o : row.orderings) {
            json entry{{"ordering", o.ordering},
                       {"greedy", cell_to_json(o.greedy_r)},
                       {"expected", cell_to_json(o.expected_r)}};
            if (o.significance) {
                const auto& v = *o.significance;
                entry["significance"] = json{{"metric", row.metric},
                                             {"r_baseline", v.r1},
                                             {"r_method", v.r2},
                                             {"cdf", v.cdf_at_r2},
                                             {"significant", v.significant},
                                             {"n", report.examples_scored},
                                             {"shuffles", v.shuffles},
                                             {"seed", v.seed}};
            } else {
                entry["significance"] = nullptr;
            }
            orderings.push_back(std::move(entry));
        }
        rows.push_back({{"metric", row.metric}, {"orderings", orderings}});
    }
    return json{{"metrics", rows},
                {"examples",
                 {{"in", report.examples_in},
                  {"scored", report.examples_scored},
                  {"failed", report.examples_failed}}},
                {"shuffles", report.shuffles},
                {"seed", report.seed},
                {"temperature", report.temperature},
                {"source", report.source}};
}

CorrelationReport report_from_json(const json& doc) {
    CorrelationReport report;
    report.examples_in = doc.at("examples").at("in").get<int>();
    report.examples_scored = doc.at("examples").at("scored").get<int>();
    report.examples_failed = doc.at("examples").at("failed").get<int>();
    report.shuffles = doc.at("shuffles").get<int>();
    report.seed = doc.at("seed").get<std::uint64_t>();
    report.temperature = doc.at("temperature").get<double>();
    report.source = doc.at("source").get<std::string>();
    for (const auto& row_doc : doc.at("metrics")) {
        MetricRow row;
        row.metric = row_doc.at("metric").get<std::string>();
        for (const auto& o_doc : row_doc.at("orderings")) {
            OrderingScores o;
            o.ordering = o_doc.at("ordering").get<std::string>();
            o.greedy_r = cell_from_json(o_doc.at("greedy"));
            o.expected_r = cell_from_json(o_doc.at("expected"));
            if (!o_doc.at("significance").is_null()) {
                const json& s = o_doc.at("significance");
                SignificanceVerdict v;
                v.r1 = s.at("r_baseline").get<double>();
                v.r2 = s.at("r_method").get<double>();
                v.cdf_at_r2 = s.at("cdf").get<double>();
                v.significant = s.at("significant").get<bool>();
                v.shuffles = s.at("shuffles").get<int>();
                v.seed = s.at("seed").get<std::uint64_t>();
                o.significance = v;
            }
            row.orderings.push_back(std::move(o));
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

std::string report_to_csv(const CorrelationReport& report) {
    std::ostringstream out;
    out << "metric,ordering,greedy_r,expected_r,cdf,significant,n,shuffles,seed\n";
    for (const auto& row : report.rows) {
        for (const auto& o : row.orderings) {
            out << row.metric << ',' << o.ordering << ','
                << (o.greedy_r.degenerate ? "NaN" : fmt_full(o.greedy_r.r)) << ','
                << (o.expected_r.degenerate ? "NaN" : fmt_full(o.expected_r.r)) << ',';
            if (o.significance) {
                out << fmt_full(o.significance->cdf_at_r2) << ','
                    << (o.significance->significant ? "true" : "false") << ','
                    << report.examples_scored << ',' << o.significance->shuffles << ','
                    << o.significance->seed;
            } else {
                out << ",," << report.examples_scored << ",,";
            }
            out << '\n';
        }
    }
    return out.str();
}

CorrelationReport report_from_csv(const std::string& csv) {
    std::istringstream in(csv);
    std::string line;
    if (!std::getline(in, line)) throw SchemaError("empty CSV");
    CorrelationReport report;
    long line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        while (cells.size() < 9) cells.emplace_back();
        if (cells.size() != 9) throw SchemaError("expected 9 CSV columns", line_no);

        OrderingScores o;
        o.ordering = cells[1];
        if (cells[2] == "NaN")
            o.greedy_r.degenerate = true;
        else
            o.greedy_r.r = std::stod(cells[2]);
        if (cells[3] == "NaN")
            o.expected_r.degenerate = true;
        else
            o.expected_r.r = std::stod(cells[3]);
        report.examples_scored = std::stoi(cells[6]);
        if (!cells[4].empty()) {
            SignificanceVerdict v;
            v.r1 = o.greedy_r.r;
            v.r2 = o.expected_r.r;
            v.cdf_at_r2 = std::stod(cells[4]);
            v.significant = cells[5] == "true";
            v.shuffles = std::stoi(cells[7]);
            v.seed = std::stoull(cells[8]);
            o.significance = v;
        }
        if (report.rows.empty() || report.rows.back().metric != cells[0])
            report.rows.push_back({cells[0], {}});
        report.rows.back().orderings.push_back(std::move(o));
    }
    return report;
}

std::vector<std::filesystem::path> emit_report(const CorrelationReport& report,
                                               const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw Error("cannot create output directory " + out_dir.string() + ": " +
                        ec.message());
    std::vector<std::filesystem::path> written;
    for (ReportFormat format : formats) {
        std::filesystem::path path = out_dir;
        std::string payload;
        switch (format) {
            case ReportFormat::text_table:
                path /= "report.txt";
                payload = report_to_text(report);
                break;
            case ReportFormat::json:
                path /= "report.json";
                payload = report_to_json(report).dump(2) + "\n";
                break;
            case ReportFormat::csv:
                path /= "report.csv";
                payload = report_to_csv(report);
                break;
        }
        std::ofstream out(path, std::ios::binary);
        if (!out) throw Error("cannot write report: " + path.string());
        out << payload;
        written.push_back(path);
    }
    return written;
}

}  // namespace dscope
