#define EIGEN_DONT_PARALLELIZE

#include "repofid/fid/provider.hpp"

namespace repofid::fid {

FidProvider::FidProvider(Params params, Vocab vocab)
    : params_(std::move(params)), vocab_(std::move(vocab)) {}

FidProvider FidProvider::from_file(const std::filesystem::path& path) {
    LoadedModel model = load_model(path);
    return FidProvider(std::move(model.params), std::move(model.vocab));
}

std::string FidProvider::complete(const EvalExample& example) const {
    return decode(params_, vocab_, example.record.repo_contexts).text;
}

}  // namespace repofid::fid
