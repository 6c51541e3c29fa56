#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "dscope/errors.hpp"

namespace dscope {

/// The four summary-quality metrics, in report row order.
inline const std::array<std::string, 4> kMetricNames = {"fluency", "relevance", "consistency",
                                                        "coherence"};

/// One summary with its expert-average human annotations, all in [1, 5].
struct AnnotatedExample {
    std::string id;
    std::string article;
    std::string summary;
    std::map<std::string, double> human;  // metric name -> score

    void validate() const;
};

/// Reads a JSON-lines dataset:
///   {"id", "article", "summary",
///    "human": {"relevance", "fluency", "coherence", "consistency"}}
/// Rejects schema violations (with the line number), out-of-range scores and
/// duplicate ids.
std::vector<AnnotatedExample> ingest_dataset(const std::filesystem::path& path);

void write_dataset(const std::filesystem::path& path,
                   const std::vector<AnnotatedExample>& examples);

/// Converts records from the public SummEval release layout
/// (model_annotations.aligned.paired.jsonl: "id", "model_id", "text",
/// "decoded", "expert_annotations") into the neutral layout above, averaging
/// the expert annotations per metric.
std::vector<AnnotatedExample> convert_summeval(const std::filesystem::path& path);

}  // namespace dscope
