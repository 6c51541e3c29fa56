#include "dscope/dataset.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <unordered_set>

namespace dscope {

using nlohmann::json;

void AnnotatedExample::validate() const {
    if (id.empty()) throw SchemaError("example id is empty");
    for (const auto& metric : kMetricNames) {
        auto it = human.find(metric);
        if (it == human.end())
            throw SchemaError("example '" + id + "' is missing human score for " + metric);
        if (!(it->second >= 1.0 && it->second <= 5.0))
            throw SchemaError("example '" + id + "': human " + metric + " score " +
                              std::to_string(it->second) + " outside [1, 5]");
    }
}

std::vector<AnnotatedExample> ingest_dataset(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open dataset: " + path.string());

    std::vector<AnnotatedExample> examples;
    std::unordered_set<std::string> ids;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaError("invalid JSON: " + std::string(e.what()), line_no);
        }
        AnnotatedExample ex;
        try {
            doc.at("id").get_to(ex.id);
            doc.at("article").get_to(ex.article);
            doc.at("summary").get_to(ex.summary);
            for (const auto& [metric, value] : doc.at("human").items()) {
                if (!value.is_number())
                    throw SchemaError("human score for " + metric + " is not a number",
                                      line_no);
                ex.human[metric] = value.get<double>();
            }
        } catch (const json::exception& e) {
            throw SchemaError(std::string(e.what()), line_no);
        }
        try {
            ex.validate();
        } catch (const SchemaError& e) {
            throw SchemaError(e.what(), line_no);
        }
        if (!ids.insert(ex.id).second)
            throw SchemaError("duplicate example id '" + ex.id + "'", line_no);
        examples.push_back(std::move(ex));
    }
    return examples;
}

void write_dataset(const std::filesystem::path& path,
                   const std::vector<AnnotatedExample>& examples) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write dataset: " + path.string());
    for (const auto& ex : examples) {
        json human = json::object();
        for (const auto& [metric, value] : ex.human) human[metric] = value;
        json doc{{"id", ex.id}, {"article", ex.article}, {"summary", ex.summary},
                 {"human", human}};
        out << doc.dump() << '\n';
    }
}

std::vector<AnnotatedExample> convert_summeval(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open SummEval file: " + path.string());

    std::vector<AnnotatedExample> examples;
    std::unordered_set<std::string> ids;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaError("invalid JSON: " + std::string(e.what()), line_no);
        }
        AnnotatedExample ex;
        try {
            std::string base_id = doc.at("id").get<std::string>();
            if (doc.contains("model_id"))
                ex.id = doc["model_id"].get<std::string>() + "-" + base_id;
            else
                ex.id = base_id;
            if (doc.contains("text"))
                ex.article = doc["text"].get<std::string>();
            else if (doc.contains("article"))
                ex.article = doc["article"].get<std::string>();
            else
                throw SchemaError("record has neither 'text' nor 'article'", line_no);
            ex.summary = doc.at("decoded").get<std::string>();

            const json& experts = doc.at("expert_annotations");
            if (!experts.is_array() || experts.empty())
                throw SchemaError("expert_annotations must be a non-empty array", line_no);
            for (const auto& metric : kMetricNames) {
                double sum = 0.0;
                for (const auto& annotation : experts)
                    sum += annotation.at(metric).get<double>();
                ex.human[metric] = sum / static_cast<double>(experts.size());
            }
        } catch (const json::exception& e) {
            throw SchemaError(std::string(e.what()), line_no);
        }
        try {
            ex.validate();
        } catch (const SchemaError& e) {
            throw SchemaError(e.what(), line_no);
        }
        if (!ids.insert(ex.id).second)
            throw SchemaError("duplicate example id '" + ex.id + "'", line_no);
        examples.push_back(std::move(ex));
    }
    return examples;
}

}  // namespace dscope
