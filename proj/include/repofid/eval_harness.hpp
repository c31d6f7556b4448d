#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "repofid/dataset_io.hpp"

namespace repofid {

struct EvalExample {
    std::string hole_id;  // "<repo_id>/<file>:<line>:<col>" ("<file>:..." without a repo)
    std::string repo_id;
    std::filesystem::path repo_dir;  // source tree for providers that read files; may be empty
    HoleRecord record;
};

std::string make_hole_id(const std::string& repo_id, const HoleLocation& location);

// A completion source under evaluation. Deterministic providers must be
// reproducible given the example; generation is capped at 128 tokens.
class CompletionProvider {
  public:
    virtual ~CompletionProvider() = default;
    virtual std::string complete(const EvalExample& example) const = 0;
    virtual std::string name() const = 0;
};

// Prediction truncated at its first newline, then compared byte-for-byte
// with the target; trailing whitespace is trimmed on both sides unless
// strict_bytes is set.
bool exact_match(std::string_view prediction, std::string_view target, bool strict_bytes = false);

struct EvalResult {
    size_t n = 0;
    size_t successes = 0;
    double success_rate = 0.0;
    double std_error = 0.0;  // sqrt(p * (1 - p) / n)
};

double success_stderr(double p, size_t n);

struct EvalOutcome {
    std::string hole_id;
    std::string prediction;
    bool success = false;
    bool provider_failed = false;
};

struct EvalOptions {
    bool strict_bytes = false;
    int jobs = 1;
    std::vector<EvalOutcome>* outcomes = nullptr;  // per-example dump, example order
};

// Counts exact matches. A provider exception counts as a failure and never
// aborts the run. Aggregation is a plain count, so the result is
// independent of evaluation order and of jobs.
EvalResult evaluate(const CompletionProvider& provider, const std::vector<EvalExample>& examples,
                    const EvalOptions& options = {});

// Serial reference for the parallel evaluation kernel.
EvalResult evaluate_serial(const CompletionProvider& provider,
                           const std::vector<EvalExample>& examples,
                           const EvalOptions& options = {});

// Always returns the target; pipeline sanity, scores 1.0 by construction.
class OracleCopyProvider : public CompletionProvider {
  public:
    std::string complete(const EvalExample& example) const override;
    std::string name() const override { return "oracle-copy"; }
};

// Replays predictions from an NDJSON file of {"hole_id": ..., "prediction": ...}.
// A missing id counts as a failure.
class ReplayProvider : public CompletionProvider {
  public:
    explicit ReplayProvider(const std::filesystem::path& path);
    std::string complete(const EvalExample& example) const override;
    std::string name() const override { return "replay"; }

  private:
    std::unordered_map<std::string, std::string> predictions_;
};

// Naive baseline: the first line after the hole line, read from the
// preserved source tree.
class PostFirstLineProvider : public CompletionProvider {
  public:
    std::string complete(const EvalExample& example) const override;
    std::string name() const override { return "post-first-line"; }
};

// Examples for every record of a split directory, repo order then file order.
std::vector<EvalExample> examples_from_split(const std::filesystem::path& split_dir,
                                             ContextKind kind);

std::string format_eval_result(const EvalResult& result, const std::string& provider_name);

std::string serialize_outcomes(const std::vector<EvalOutcome>& outcomes);

}  // namespace repofid
