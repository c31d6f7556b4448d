#pragma once

#include <filesystem>

#include "repofid/eval_harness.hpp"
#include "repofid/fid/model.hpp"

namespace repofid::fid {

// Evaluates a trained toy model: encodes the record's repo contexts and
// greedy-decodes the completion (128-token cap).
class FidProvider : public CompletionProvider {
  public:
    FidProvider(Params params, Vocab vocab);
    static FidProvider from_file(const std::filesystem::path& path);

    std::string complete(const EvalExample& example) const override;
    std::string name() const override { return "fid"; }

  private:
    Params params_;
    Vocab vocab_;
};

}  // namespace repofid::fid
