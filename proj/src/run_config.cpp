#include "dscope/run_config.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <limits>

#include "dscope/report.hpp"

namespace dscope {

using nlohmann::json;

namespace {

template <typename T>
void maybe(const json& doc, const char* key, T& out) {
    if (doc.contains(key)) doc.at(key).get_to(out);
}

}  // namespace

RunConfig RunConfig::from_json(const json& doc) {
    RunConfig cfg;
    maybe(doc, "source", cfg.source);
    maybe(doc, "toy_table", cfg.toy_table);
    maybe(doc, "fixtures", cfg.fixtures);
    if (doc.contains("remote")) {
        const json& r = doc.at("remote");
        maybe(r, "base_url", cfg.remote.base_url);
        maybe(r, "path", cfg.remote.path);
        maybe(r, "model", cfg.remote.model);
        maybe(r, "top_logprobs", cfg.remote.top_logprobs);
        maybe(r, "timeout_seconds", cfg.remote.timeout_seconds);
        maybe(r, "max_attempts", cfg.remote.max_attempts);
        maybe(r, "backoff_initial_seconds", cfg.remote.backoff_initial_seconds);
        maybe(r, "backoff_multiplier", cfg.remote.backoff_multiplier);
        maybe(r, "max_in_flight", cfg.remote.max_in_flight);
    }
    maybe(doc, "temperature", cfg.temperature);
    if (doc.contains("orderings")) {
        cfg.orderings.clear();
        for (const auto& name : doc.at("orderings"))
            cfg.orderings.push_back(ordering_from_string(name.get<std::string>()));
    }
    maybe(doc, "seed", cfg.seed);
    maybe(doc, "template_path", cfg.template_path);
    maybe(doc, "choices_path", cfg.choices_path);
    maybe(doc, "out_dir", cfg.out_dir);
    maybe(doc, "workers", cfg.workers);
    maybe(doc, "shuffles", cfg.shuffles);
    maybe(doc, "abort_fail_fraction", cfg.abort_fail_fraction);
    maybe(doc, "record_fixtures", cfg.record_fixtures);
    maybe(doc, "formats", cfg.formats);
    if (doc.contains("label_variants"))
        for (const auto& [label, variants] : doc.at("label_variants").items())
            cfg.label_variants[label] = variants.get<std::vector<std::string>>();
    if (doc.contains("tree")) {
        const json& t = doc.at("tree");
        maybe(t, "top_p", cfg.tree.top_p);
        maybe(t, "temperature", cfg.tree.temperature);
        if (t.contains("alpha") && !t.at("alpha").is_null())
            cfg.tree.min_cum_logprob = t.at("alpha").get<double>();
        maybe(t, "stop_tokens", cfg.tree.stop_tokens);
        maybe(t, "max_steps", cfg.tree.max_steps);
        maybe(t, "max_length", cfg.tree.max_length);
        maybe(t, "nucleus_renormalize", cfg.tree.nucleus_renormalize);
        maybe(t, "min_probability", cfg.tree_min_probability);
    }
    return cfg;
}

RunConfig RunConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open config file: " + path);
    json doc;
    try {
        in >> doc;
    } catch (const json::exception& e) {
        throw SchemaError("invalid config JSON: " + std::string(e.what()));
    }
    return from_json(doc);
}

json RunConfig::to_json() const {
    json orderings = json::array();
    for (ChoiceOrdering o : this->orderings) orderings.push_back(to_string(o));
    json alpha;
    if (std::isfinite(tree.min_cum_logprob)) alpha = tree.min_cum_logprob;
    json doc{{"source", source},
             {"toy_table", toy_table},
             {"fixtures", fixtures},
             {"remote",
              {{"base_url", remote.base_url},
               {"path", remote.path},
               {"model", remote.model},
               {"top_logprobs", remote.top_logprobs},
               {"timeout_seconds", remote.timeout_seconds},
               {"max_attempts", remote.max_attempts},
               {"backoff_initial_seconds", remote.backoff_initial_seconds},
               {"backoff_multiplier", remote.backoff_multiplier},
               {"max_in_flight", remote.max_in_flight}}},
             {"temperature", temperature},
             {"orderings", orderings},
             {"seed", seed},
             {"template_path", template_path},
             {"choices_path", choices_path},
             {"out_dir", out_dir},
             {"workers", workers},
             {"shuffles", shuffles},
             {"abort_fail_fraction", abort_fail_fraction},
             {"record_fixtures", record_fixtures},
             {"formats", formats},
             {"tree",
              {{"top_p", tree.top_p},
               {"temperature", tree.temperature},
               {"alpha", alpha},
               {"stop_tokens", tree.stop_tokens},
               {"max_steps", tree.max_steps},
               {"max_length", tree.max_length},
               {"nucleus_renormalize", tree.nucleus_renormalize},
               {"min_probability", tree_min_probability}}}};
    if (!label_variants.empty()) {
        json lv = json::object();
        for (const auto& [label, variants] : label_variants) lv[label] = variants;
        doc["label_variants"] = lv;
    }
    return doc;
}

void RunConfig::validate() const {
    if (source != "toy" && source != "replay" && source != "remote")
        throw InvalidInputError("source must be toy, replay or remote, got '" + source + "'");
    if (source == "toy" && toy_table.empty())
        throw InvalidInputError("toy source needs a toy_table path");
    if (source == "replay" && fixtures.empty())
        throw InvalidInputError("replay source needs a fixtures path");
    if (source == "remote") remote.validate();
    if (!(temperature > 0.0) || !std::isfinite(temperature))
        throw InvalidInputError("temperature must be positive and finite");
    if (orderings.empty()) throw InvalidInputError("at least one ordering is required");
    for (std::size_t i = 0; i < orderings.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (orderings[i] == orderings[j])
                throw InvalidInputError("duplicate ordering '" + to_string(orderings[i]) + "'");
    if (workers < 1) throw InvalidInputError("workers must be >= 1");
    if (shuffles < 1000) throw InvalidInputError("shuffles must be >= 1000");
    if (!(abort_fail_fraction >= 0.0 && abort_fail_fraction <= 1.0))
        throw InvalidInputError("abort_fail_fraction must lie in [0, 1]");
    for (const auto& f : formats) report_format_from_string(f);
    tree.validate();
    if (tree_min_probability < 0.0)
        throw InvalidInputError("tree min_probability must be >= 0");
}

}  // namespace dscope
