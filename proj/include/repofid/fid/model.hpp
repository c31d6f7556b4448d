#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>

#include "repofid/fid/vocab.hpp"

namespace repofid::fid {

// Desk-scale fusion model: each repo context is encoded independently
// (sinusoidal positions restart per context), the encoder states are
// concatenated, and the decoder attends jointly over the concatenation.
// Double precision throughout; built for verification, not speed.
struct ModelConfig {
    int vocab_size = 0;
    int d_model = 64;
    int n_heads = 2;
    int n_enc_layers = 1;
    int n_dec_layers = 1;
    int max_rc_tokens = 0;  // encoder capacity per repo context
    int n_contexts = 0;     // N
    bool cross_position_bias = true;
    int ff_mult = 4;
    int max_target_tokens = 128;

    void validate() const;
};

struct ParamLayout {
    enum class Init : uint8_t { Normal, Zero, One };
    struct Entry {
        std::string name;
        int rows = 0;
        int cols = 0;
        size_t offset = 0;
        Init init = Init::Normal;
    };
    std::vector<Entry> entries;
    std::unordered_map<std::string, size_t> by_name;
    size_t total = 0;

    static std::shared_ptr<const ParamLayout> build(const ModelConfig& config);
    const Entry& at(const std::string& name) const;
};

struct Params {
    ModelConfig config;
    std::shared_ptr<const ParamLayout> layout;
    Eigen::VectorXd flat;

    Eigen::Map<const Eigen::MatrixXd> mat(const std::string& name) const;

    // Scaled-normal init (0.02 std) for weights; zero biases; unit
    // layer-norm gains. Deterministic in the seed.
    static Params init(const ModelConfig& config, uint64_t seed);
    static Params zeros(const ModelConfig& config);
};

Eigen::Map<Eigen::MatrixXd> grad_mat(Eigen::VectorXd& grad, const ParamLayout& layout,
                                     const std::string& name);

struct ToyExample {
    std::vector<std::vector<int>> rc_ids;       // N sequences of exactly T ids (pad-filled)
    std::vector<std::vector<uint8_t>> rc_mask;  // 1 = real token
    std::vector<int> target_ids;                // <= max_target_tokens, no bos/eos
};

// Encodes rc_texts and the target under the config shape; truncates over-
// long contexts, pads short ones.
ToyExample make_example(const Vocab& vocab, const ModelConfig& config,
                        const std::vector<std::string>& rc_texts, const std::string& target);

// Row-wise softmax honoring a key mask and an optional causal constraint.
// Fully masked rows come back as all-zero. Exposed for direct testing.
Eigen::MatrixXd masked_softmax(const Eigen::MatrixXd& scores,
                               const std::vector<uint8_t>* key_mask, bool causal);

struct Memory {
    Eigen::MatrixXd states;          // [N*T x d]
    std::vector<uint8_t> key_mask;   // concatenated rc masks
};

Memory encode_memory(const Params& params, const ToyExample& example);

// Teacher-forced logits: decoder input [bos, target...], one logit row per
// position over the vocabulary.
Eigen::MatrixXd forward_logits(const Params& params, const ToyExample& example);

// Mean cross-entropy of [target..., eos] under forward_logits.
double loss(const Params& params, const ToyExample& example);

// Analytic reverse-mode gradient; returns the loss. grad is resized and
// overwritten.
double loss_and_grad(const Params& params, const ToyExample& example, Eigen::VectorXd& grad);

double cross_entropy(const Eigen::MatrixXd& logits, const std::vector<int>& labels);

struct TrainOptions {
    double lr = 1e-3;
    size_t steps = 0;
    uint64_t seed = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct TrainResult {
    Params params;
    std::vector<double> loss_curve;  // loss at each step before the update
};

// Deterministic single-threaded Adam loop cycling the dataset in order.
// NaN loss aborts with the step number.
TrainResult train(const ModelConfig& config, const std::vector<ToyExample>& dataset,
                  const TrainOptions& options);

struct DecodeResult {
    std::string text;
    std::vector<int> token_ids;
    bool truncated = false;  // generation cap reached
};

// Greedy decode from bos until eos, newline, or the token cap.
DecodeResult decode(const Params& params, const Vocab& vocab,
                    const std::vector<std::string>& rc_texts, int max_new_tokens = 128);

void save_model(const std::filesystem::path& path, const Params& params, const Vocab& vocab);

struct LoadedModel {
    Params params;
    Vocab vocab = Vocab::from_tokens({"<pad>", "<bos>", "<eos>", "\n", "<unk>"});
};

LoadedModel load_model(const std::filesystem::path& path);

}  // namespace repofid::fid
