#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "dscope/stats.hpp"

namespace dscope {

/// One Pearson correlation, or the explicit degenerate marker used when a
/// score stream was constant (printed as NaN, never silently propagated).
struct CorrelationCell {
    double r = 0.0;
    bool degenerate = false;
};

/// Correlations for one (metric, ordering) pair; "averaged" is the
/// positional-average variant over all configured orderings.
struct OrderingScores {
    std::string ordering;
    CorrelationCell greedy_r;
    CorrelationCell expected_r;
    std::optional<SignificanceVerdict> significance;  // greedy vs expected
};

struct MetricRow {
    std::string metric;
    std::vector<OrderingScores> orderings;
};

struct CorrelationReport {
    std::vector<MetricRow> rows;
    int examples_in = 0;
    int examples_scored = 0;
    int examples_failed = 0;
    int shuffles = 0;
    std::uint64_t seed = 0;
    double temperature = 0.0;
    std::string source;
};

enum class ReportFormat { text_table, json, csv };

ReportFormat report_format_from_string(const std::string& name);

std::string report_to_text(const CorrelationReport& report);
nlohmann::json report_to_json(const CorrelationReport& report);
std::string report_to_csv(const CorrelationReport& report);

CorrelationReport report_from_json(const nlohmann::json& doc);
CorrelationReport report_from_csv(const std::string& csv);

/// Writes report.<ext> under out_dir for each requested format; returns the
/// paths written.
std::vector<std::filesystem::path> emit_report(const CorrelationReport& report,
                                               const std::vector<ReportFormat>& formats,
                                               const std::filesystem::path& out_dir);

}  // namespace dscope
