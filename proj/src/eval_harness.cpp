#include "repofid/eval_harness.hpp"

#include <cmath>
#include <cstdio>

#include <nlohmann/json.hpp>

#include "repofid/parallel.hpp"
#include "repofid/util.hpp"

namespace repofid {

using ordered_json = nlohmann::ordered_json;

std::string make_hole_id(const std::string& repo_id, const HoleLocation& location) {
    std::string id;
    if (!repo_id.empty()) {
        id = repo_id + "/";
    }
    id += location.file + ":" + std::to_string(location.line) + ":" + std::to_string(location.col);
    return id;
}

bool exact_match(std::string_view prediction, std::string_view target, bool strict_bytes) {
    size_t nl = prediction.find('\n');
    std::string_view predicted_hole = nl == std::string_view::npos ? prediction : prediction.substr(0, nl);
    if (strict_bytes) {
        return predicted_hole == target;
    }
    return rstrip(predicted_hole) == rstrip(target);
}

double success_stderr(double p, size_t n) {
    if (n == 0) {
        return 0.0;
    }
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

namespace {

EvalResult evaluate_impl(const CompletionProvider& provider,
                         const std::vector<EvalExample>& examples, const EvalOptions& options,
                         int jobs) {
    if (examples.empty()) {
        throw DataError("evaluate: dataset is empty");
    }
    std::vector<EvalOutcome> outcomes(examples.size());
    parallel_for(examples.size(), jobs, [&](size_t i) {
        const EvalExample& example = examples[i];
        EvalOutcome outcome;
        outcome.hole_id = example.hole_id;
        try {
            outcome.prediction = provider.complete(example);
        } catch (const std::exception&) {
            outcome.provider_failed = true;
        }
        outcome.success = !outcome.provider_failed &&
                          exact_match(outcome.prediction, example.record.hole, options.strict_bytes);
        outcomes[i] = std::move(outcome);
    });

    EvalResult result;
    result.n = examples.size();
    for (const EvalOutcome& outcome : outcomes) {
        if (outcome.success) {
            ++result.successes;
        }
    }
    result.success_rate = static_cast<double>(result.successes) / static_cast<double>(result.n);
    result.std_error = success_stderr(result.success_rate, result.n);
    if (options.outcomes != nullptr) {
        *options.outcomes = std::move(outcomes);
    }
    return result;
}

}  // namespace

EvalResult evaluate(const CompletionProvider& provider, const std::vector<EvalExample>& examples,
                    const EvalOptions& options) {
    return evaluate_impl(provider, examples, options, options.jobs);
}

EvalResult evaluate_serial(const CompletionProvider& provider,
                           const std::vector<EvalExample>& examples, const EvalOptions& options) {
    return evaluate_impl(provider, examples, options, 1);
}

std::string OracleCopyProvider::complete(const EvalExample& example) const {
    return example.record.hole;
}

ReplayProvider::ReplayProvider(const std::filesystem::path& path) {
    std::string content = read_file(path);
    size_t line_no = 0;
    for (std::string_view line : split_lines(content)) {
        ++line_no;
        if (rstrip(line).empty()) {
            continue;
        }
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("hole_id") ||
            !j.contains("prediction") || !j["hole_id"].is_string() ||
            !j["prediction"].is_string()) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected {\"hole_id\": ..., \"prediction\": ...}");
        }
        predictions_[j["hole_id"].get<std::string>()] = j["prediction"].get<std::string>();
    }
}

std::string ReplayProvider::complete(const EvalExample& example) const {
    auto it = predictions_.find(example.hole_id);
    if (it == predictions_.end()) {
        throw DataError("replay: no prediction for " + example.hole_id);
    }
    return it->second;
}

std::string PostFirstLineProvider::complete(const EvalExample& example) const {
    if (example.repo_dir.empty()) {
        throw DataError("post-first-line: no source tree for " + example.hole_id);
    }
    std::string content = read_file(example.repo_dir / example.record.location.file);
    SourceFile file = SourceFile::make(example.repo_id, example.record.location.file,
                                       std::move(content));
    size_t next = static_cast<size_t>(example.record.location.line) + 1;
    if (next >= file.line_count()) {
        return std::string();
    }
    return std::string(file.line_text(next));
}

std::vector<EvalExample> examples_from_split(const std::filesystem::path& split_dir,
                                             ContextKind kind) {
    std::vector<EvalExample> examples;
    for (RepoRecords& repo : read_split(split_dir, kind)) {
        for (HoleRecord& record : repo.records) {
            EvalExample example;
            example.repo_id = repo.repo_id;
            example.repo_dir = split_dir / repo.repo_id;
            example.hole_id = make_hole_id(repo.repo_id, record.location);
            example.record = std::move(record);
            examples.push_back(std::move(example));
        }
    }
    return examples;
}

std::string format_eval_result(const EvalResult& result, const std::string& provider_name) {
    char buffer[256];
    std::snprintf(buffer, sizeof(buffer),
                  "provider=%s n=%zu successes=%zu success_rate=%.4f stderr=%.4f",
                  provider_name.c_str(), result.n, result.successes, result.success_rate,
                  result.std_error);
    return std::string(buffer);
}

std::string serialize_outcomes(const std::vector<EvalOutcome>& outcomes) {
    std::string out;
    for (const EvalOutcome& outcome : outcomes) {
        ordered_json j;
        j["hole_id"] = outcome.hole_id;
        j["prediction"] = outcome.prediction;
        j["success"] = outcome.success;
        j["provider_failed"] = outcome.provider_failed;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

}  // namespace repofid
