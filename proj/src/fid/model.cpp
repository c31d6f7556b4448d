#define EIGEN_DONT_PARALLELIZE

#include "repofid/fid/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include <nlohmann/json.hpp>

#include "repofid/tokenize.hpp"
#include "repofid/util.hpp"

namespace repofid::fid {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using ordered_json = nlohmann::ordered_json;

void ModelConfig::validate() const {
    if (vocab_size < 5) {
        throw DataError("model: vocab_size must cover the special tokens");
    }
    if (d_model <= 0 || n_heads <= 0 || d_model % n_heads != 0) {
        throw DataError("model: d_model must be a positive multiple of n_heads");
    }
    if (n_enc_layers < 1 || n_dec_layers < 1) {
        throw DataError("model: need at least one encoder and one decoder layer");
    }
    if (max_rc_tokens < 1 || n_contexts < 1) {
        throw DataError("model: max_rc_tokens and n_contexts must be >= 1");
    }
    if (ff_mult < 1 || max_target_tokens < 1) {
        throw DataError("model: ff_mult and max_target_tokens must be >= 1");
    }
}

namespace {

void add_attention_entries(std::vector<ParamLayout::Entry>& entries, const std::string& prefix,
                           int d) {
    using Init = ParamLayout::Init;
    for (const char* part : {"wq", "wk", "wv", "wo"}) {
        entries.push_back({prefix + "." + part, d, d, 0, Init::Normal});
    }
    for (const char* part : {"bq", "bk", "bv", "bo"}) {
        entries.push_back({prefix + "." + part, 1, d, 0, Init::Zero});
    }
}

void add_ln_entries(std::vector<ParamLayout::Entry>& entries, const std::string& prefix, int d) {
    using Init = ParamLayout::Init;
    entries.push_back({prefix + ".gain", 1, d, 0, Init::One});
    entries.push_back({prefix + ".bias", 1, d, 0, Init::Zero});
}

void add_ffn_entries(std::vector<ParamLayout::Entry>& entries, const std::string& prefix, int d,
                     int f) {
    using Init = ParamLayout::Init;
    entries.push_back({prefix + ".w1", d, f, 0, Init::Normal});
    entries.push_back({prefix + ".b1", 1, f, 0, Init::Zero});
    entries.push_back({prefix + ".w2", f, d, 0, Init::Normal});
    entries.push_back({prefix + ".b2", 1, d, 0, Init::Zero});
}

}  // namespace

std::shared_ptr<const ParamLayout> ParamLayout::build(const ModelConfig& config) {
    config.validate();
    auto layout = std::make_shared<ParamLayout>();
    int d = config.d_model;
    int f = config.ff_mult * d;
    auto& entries = layout->entries;

    entries.push_back({"tok_emb", config.vocab_size, d, 0, Init::Normal});
    for (int e = 0; e < config.n_enc_layers; ++e) {
        std::string prefix = "enc" + std::to_string(e);
        add_attention_entries(entries, prefix + ".attn", d);
        add_ln_entries(entries, prefix + ".ln1", d);
        add_ffn_entries(entries, prefix + ".ff", d, f);
        add_ln_entries(entries, prefix + ".ln2", d);
    }
    for (int e = 0; e < config.n_dec_layers; ++e) {
        std::string prefix = "dec" + std::to_string(e);
        add_attention_entries(entries, prefix + ".self", d);
        add_ln_entries(entries, prefix + ".ln1", d);
        add_attention_entries(entries, prefix + ".cross", d);
        add_ln_entries(entries, prefix + ".ln2", d);
        add_ffn_entries(entries, prefix + ".ff", d, f);
        add_ln_entries(entries, prefix + ".ln3", d);
    }
    if (config.cross_position_bias) {
        entries.push_back({"cross_bias", 1, config.n_contexts * config.max_rc_tokens, 0,
                           Init::Normal});
    }
    entries.push_back({"out.w", d, config.vocab_size, 0, Init::Normal});
    entries.push_back({"out.b", 1, config.vocab_size, 0, Init::Zero});

    size_t offset = 0;
    for (size_t i = 0; i < entries.size(); ++i) {
        entries[i].offset = offset;
        offset += static_cast<size_t>(entries[i].rows) * static_cast<size_t>(entries[i].cols);
        layout->by_name.emplace(entries[i].name, i);
    }
    layout->total = offset;
    return layout;
}

const ParamLayout::Entry& ParamLayout::at(const std::string& name) const {
    auto it = by_name.find(name);
    if (it == by_name.end()) {
        throw DataError("unknown parameter: " + name);
    }
    return entries[it->second];
}

Eigen::Map<const MatrixXd> Params::mat(const std::string& name) const {
    const auto& entry = layout->at(name);
    return Eigen::Map<const MatrixXd>(flat.data() + entry.offset, entry.rows, entry.cols);
}

Eigen::Map<MatrixXd> grad_mat(VectorXd& grad, const ParamLayout& layout, const std::string& name) {
    const auto& entry = layout.at(name);
    return Eigen::Map<MatrixXd>(grad.data() + entry.offset, entry.rows, entry.cols);
}

Params Params::init(const ModelConfig& config, uint64_t seed) {
    Params params;
    params.config = config;
    params.layout = ParamLayout::build(config);
    params.flat.resize(static_cast<Eigen::Index>(params.layout->total));
    Rng rng(mix_seed(seed, 0xf1d));
    for (const auto& entry : params.layout->entries) {
        size_t count = static_cast<size_t>(entry.rows) * static_cast<size_t>(entry.cols);
        double* data = params.flat.data() + entry.offset;
        switch (entry.init) {
            case ParamLayout::Init::Normal:
                for (size_t i = 0; i < count; ++i) {
                    data[i] = 0.02 * rng.normal();
                }
                break;
            case ParamLayout::Init::Zero:
                std::memset(data, 0, count * sizeof(double));
                break;
            case ParamLayout::Init::One:
                for (size_t i = 0; i < count; ++i) {
                    data[i] = 1.0;
                }
                break;
        }
    }
    return params;
}

Params Params::zeros(const ModelConfig& config) {
    Params params;
    params.config = config;
    params.layout = ParamLayout::build(config);
    params.flat = VectorXd::Zero(static_cast<Eigen::Index>(params.layout->total));
    for (const auto& entry : params.layout->entries) {
        if (entry.init == ParamLayout::Init::One) {
            size_t count = static_cast<size_t>(entry.rows) * static_cast<size_t>(entry.cols);
            double* data = params.flat.data() + entry.offset;
            for (size_t i = 0; i < count; ++i) {
                data[i] = 1.0;
            }
        }
    }
    return params;
}

ToyExample make_example(const Vocab& vocab, const ModelConfig& config,
                        const std::vector<std::string>& rc_texts, const std::string& target) {
    config.validate();
    ToyExample example;
    size_t n = static_cast<size_t>(config.n_contexts);
    size_t t = static_cast<size_t>(config.max_rc_tokens);
    example.rc_ids.assign(n, std::vector<int>(t, Vocab::kPad));
    example.rc_mask.assign(n, std::vector<uint8_t>(t, 0));
    for (size_t r = 0; r < n; ++r) {
        if (r >= rc_texts.size()) {
            continue;
        }
        std::vector<int> ids = vocab.encode(rc_texts[r]);
        size_t keep = std::min(ids.size(), t);
        for (size_t i = 0; i < keep; ++i) {
            example.rc_ids[r][i] = ids[i];
            example.rc_mask[r][i] = 1;
        }
    }
    example.target_ids = vocab.encode(target);
    if (example.target_ids.empty()) {
        throw DataError("make_example: target has no tokens");
    }
    if (example.target_ids.size() > static_cast<size_t>(config.max_target_tokens)) {
        example.target_ids.resize(static_cast<size_t>(config.max_target_tokens));
    }
    return example;
}

namespace {

MatrixXd sinusoidal(int len, int d) {
    MatrixXd pe(len, d);
    for (int pos = 0; pos < len; ++pos) {
        for (int i = 0; i < d; ++i) {
            double exponent = static_cast<double>(2 * (i / 2)) / static_cast<double>(d);
            double angle = static_cast<double>(pos) / std::pow(10000.0, exponent);
            pe(pos, i) = (i % 2 == 0) ? std::sin(angle) : std::cos(angle);
        }
    }
    return pe;
}

MatrixXd embed(const Params& params, const std::vector<int>& ids) {
    auto emb = params.mat("tok_emb");
    MatrixXd x(static_cast<Eigen::Index>(ids.size()), params.config.d_model);
    for (size_t i = 0; i < ids.size(); ++i) {
        x.row(static_cast<Eigen::Index>(i)) = emb.row(ids[i]);
    }
    return x;
}

constexpr double kMasked = -1e30;

}  // namespace

MatrixXd masked_softmax(const MatrixXd& scores, const std::vector<uint8_t>* key_mask,
                        bool causal) {
    MatrixXd weights = MatrixXd::Zero(scores.rows(), scores.cols());
    for (Eigen::Index i = 0; i < scores.rows(); ++i) {
        double row_max = kMasked;
        bool any = false;
        for (Eigen::Index j = 0; j < scores.cols(); ++j) {
            bool valid = (key_mask == nullptr || (*key_mask)[static_cast<size_t>(j)] != 0) &&
                         (!causal || j <= i);
            if (valid) {
                any = true;
                row_max = std::max(row_max, scores(i, j));
            }
        }
        if (!any) {
            continue;  // fully masked row stays all-zero
        }
        double denom = 0.0;
        for (Eigen::Index j = 0; j < scores.cols(); ++j) {
            bool valid = (key_mask == nullptr || (*key_mask)[static_cast<size_t>(j)] != 0) &&
                         (!causal || j <= i);
            if (valid) {
                double w = std::exp(scores(i, j) - row_max);
                weights(i, j) = w;
                denom += w;
            }
        }
        for (Eigen::Index j = 0; j < scores.cols(); ++j) {
            if (weights(i, j) != 0.0) {
                weights(i, j) /= denom;
            }
        }
    }
    return weights;
}

namespace {

// ds = w .* (dw - rowdot(dw, w)); zero rows give zero gradients.
MatrixXd softmax_backward(const MatrixXd& weights, const MatrixXd& d_weights) {
    MatrixXd d_scores(weights.rows(), weights.cols());
    for (Eigen::Index i = 0; i < weights.rows(); ++i) {
        double dot = weights.row(i).dot(d_weights.row(i));
        d_scores.row(i) =
            weights.row(i).cwiseProduct(d_weights.row(i) - VectorXd::Constant(weights.cols(), dot).transpose());
    }
    return d_scores;
}

struct AttnCache {
    MatrixXd x_q, x_kv;
    MatrixXd q, k, v;
    std::vector<MatrixXd> weights;  // per head
    MatrixXd concat;
};

struct LnCache {
    MatrixXd input;
    MatrixXd xhat;
    VectorXd inv_std;
};

struct FfnCache {
    MatrixXd input;
    MatrixXd hidden_pre;
    MatrixXd hidden;
};

struct EncLayerCache {
    AttnCache attn;
    LnCache ln1;
    FfnCache ffn;
    LnCache ln2;
};

struct DecLayerCache {
    AttnCache self_attn;
    LnCache ln1;
    AttnCache cross;
    LnCache ln2;
    FfnCache ffn;
    LnCache ln3;
};

struct FullCache {
    std::vector<MatrixXd> enc_inputs;               // embedded + positions, per RC
    std::vector<std::vector<EncLayerCache>> enc;    // [N][layers]
    Memory memory;
    MatrixXd dec_input;
    std::vector<DecLayerCache> dec;
    MatrixXd dec_out;
    MatrixXd logits;
    std::vector<int> dec_ids;
    std::vector<int> labels;
};

constexpr double kLnEps = 1e-5;

MatrixXd attention_forward(const Params& params, const std::string& prefix, const MatrixXd& x_q,
                           const MatrixXd& x_kv, const std::vector<uint8_t>* key_mask, bool causal,
                           const double* bias, AttnCache& cache) {
    int d = params.config.d_model;
    int heads = params.config.n_heads;
    int dh = d / heads;
    double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

    cache.x_q = x_q;
    cache.x_kv = x_kv;
    cache.q = (x_q * params.mat(prefix + ".wq")).rowwise() + params.mat(prefix + ".bq").row(0);
    cache.k = (x_kv * params.mat(prefix + ".wk")).rowwise() + params.mat(prefix + ".bk").row(0);
    cache.v = (x_kv * params.mat(prefix + ".wv")).rowwise() + params.mat(prefix + ".bv").row(0);

    cache.concat.resize(x_q.rows(), d);
    cache.weights.clear();
    cache.weights.reserve(static_cast<size_t>(heads));
    for (int h = 0; h < heads; ++h) {
        MatrixXd qh = cache.q.middleCols(h * dh, dh);
        MatrixXd kh = cache.k.middleCols(h * dh, dh);
        MatrixXd vh = cache.v.middleCols(h * dh, dh);
        MatrixXd scores = qh * kh.transpose() * inv_sqrt;
        if (bias != nullptr) {
            for (Eigen::Index j = 0; j < scores.cols(); ++j) {
                scores.col(j).array() += bias[j];
            }
        }
        MatrixXd weights = masked_softmax(scores, key_mask, causal);
        cache.concat.middleCols(h * dh, dh) = weights * vh;
        cache.weights.push_back(std::move(weights));
    }
    return (cache.concat * params.mat(prefix + ".wo")).rowwise() +
           params.mat(prefix + ".bo").row(0);
}

// Returns d_x_q; accumulates d_x_kv into the provided matrix (useful when
// the key/value source is shared, as with the concatenated memory).
MatrixXd attention_backward(const Params& params, const std::string& prefix,
                            const AttnCache& cache, const MatrixXd& d_out, VectorXd& grad,
                            MatrixXd& d_x_kv_accum, const char* bias_name) {
    const ParamLayout& layout = *params.layout;
    int d = params.config.d_model;
    int heads = params.config.n_heads;
    int dh = d / heads;
    double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(dh));

    grad_mat(grad, layout, prefix + ".wo") += cache.concat.transpose() * d_out;
    grad_mat(grad, layout, prefix + ".bo") += d_out.colwise().sum();
    MatrixXd d_concat = d_out * params.mat(prefix + ".wo").transpose();

    MatrixXd d_q = MatrixXd::Zero(cache.q.rows(), d);
    MatrixXd d_k = MatrixXd::Zero(cache.k.rows(), d);
    MatrixXd d_v = MatrixXd::Zero(cache.v.rows(), d);

    for (int h = 0; h < heads; ++h) {
        MatrixXd qh = cache.q.middleCols(h * dh, dh);
        MatrixXd kh = cache.k.middleCols(h * dh, dh);
        MatrixXd vh = cache.v.middleCols(h * dh, dh);
        const MatrixXd& weights = cache.weights[static_cast<size_t>(h)];
        MatrixXd d_ctx = d_concat.middleCols(h * dh, dh);

        MatrixXd d_weights = d_ctx * vh.transpose();
        d_v.middleCols(h * dh, dh) += weights.transpose() * d_ctx;

        MatrixXd d_scores = softmax_backward(weights, d_weights);
        if (bias_name != nullptr) {
            grad_mat(grad, layout, bias_name) += d_scores.colwise().sum();
        }
        d_q.middleCols(h * dh, dh) += d_scores * kh * inv_sqrt;
        d_k.middleCols(h * dh, dh) += d_scores.transpose() * qh * inv_sqrt;
    }

    grad_mat(grad, layout, prefix + ".wq") += cache.x_q.transpose() * d_q;
    grad_mat(grad, layout, prefix + ".bq") += d_q.colwise().sum();
    grad_mat(grad, layout, prefix + ".wk") += cache.x_kv.transpose() * d_k;
    grad_mat(grad, layout, prefix + ".bk") += d_k.colwise().sum();
    grad_mat(grad, layout, prefix + ".wv") += cache.x_kv.transpose() * d_v;
    grad_mat(grad, layout, prefix + ".bv") += d_v.colwise().sum();

    d_x_kv_accum += d_k * params.mat(prefix + ".wk").transpose();
    d_x_kv_accum += d_v * params.mat(prefix + ".wv").transpose();
    return d_q * params.mat(prefix + ".wq").transpose();
}

MatrixXd layernorm_forward(const Params& params, const std::string& prefix, const MatrixXd& x,
                           LnCache& cache) {
    cache.input = x;
    cache.xhat.resize(x.rows(), x.cols());
    cache.inv_std.resize(x.rows());
    auto gain = params.mat(prefix + ".gain").row(0);
    auto bias = params.mat(prefix + ".bias").row(0);
    MatrixXd out(x.rows(), x.cols());
    double d = static_cast<double>(x.cols());
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        double mean = x.row(i).mean();
        double var = (x.row(i).array() - mean).square().sum() / d;
        double inv_std = 1.0 / std::sqrt(var + kLnEps);
        cache.inv_std(i) = inv_std;
        cache.xhat.row(i) = (x.row(i).array() - mean) * inv_std;
        out.row(i) = cache.xhat.row(i).cwiseProduct(gain) + bias;
    }
    return out;
}

MatrixXd layernorm_backward(const Params& params, const std::string& prefix, const LnCache& cache,
                            const MatrixXd& d_out, VectorXd& grad) {
    const ParamLayout& layout = *params.layout;
    auto gain = params.mat(prefix + ".gain").row(0);
    grad_mat(grad, layout, prefix + ".gain") +=
        (d_out.cwiseProduct(cache.xhat)).colwise().sum();
    grad_mat(grad, layout, prefix + ".bias") += d_out.colwise().sum();

    double d = static_cast<double>(d_out.cols());
    MatrixXd d_x(d_out.rows(), d_out.cols());
    for (Eigen::Index i = 0; i < d_out.rows(); ++i) {
        Eigen::RowVectorXd d_xhat = d_out.row(i).cwiseProduct(gain);
        double mean_dxhat = d_xhat.mean();
        double mean_dxhat_xhat = d_xhat.cwiseProduct(cache.xhat.row(i)).sum() / d;
        d_x.row(i) = cache.inv_std(i) *
                     (d_xhat.array() - mean_dxhat - cache.xhat.row(i).array() * mean_dxhat_xhat);
    }
    return d_x;
}

MatrixXd ffn_forward(const Params& params, const std::string& prefix, const MatrixXd& x,
                     FfnCache& cache) {
    cache.input = x;
    cache.hidden_pre = (x * params.mat(prefix + ".w1")).rowwise() + params.mat(prefix + ".b1").row(0);
    cache.hidden = cache.hidden_pre.cwiseMax(0.0);
    return (cache.hidden * params.mat(prefix + ".w2")).rowwise() + params.mat(prefix + ".b2").row(0);
}

MatrixXd ffn_backward(const Params& params, const std::string& prefix, const FfnCache& cache,
                      const MatrixXd& d_out, VectorXd& grad) {
    const ParamLayout& layout = *params.layout;
    grad_mat(grad, layout, prefix + ".w2") += cache.hidden.transpose() * d_out;
    grad_mat(grad, layout, prefix + ".b2") += d_out.colwise().sum();
    MatrixXd d_hidden = d_out * params.mat(prefix + ".w2").transpose();
    MatrixXd d_hidden_pre =
        d_hidden.cwiseProduct((cache.hidden_pre.array() > 0.0).cast<double>().matrix());
    grad_mat(grad, layout, prefix + ".w1") += cache.input.transpose() * d_hidden_pre;
    grad_mat(grad, layout, prefix + ".b1") += d_hidden_pre.colwise().sum();
    return d_hidden_pre * params.mat(prefix + ".w1").transpose();
}

void check_example(const Params& params, const ToyExample& example) {
    const ModelConfig& config = params.config;
    if (example.rc_ids.size() != static_cast<size_t>(config.n_contexts) ||
        example.rc_mask.size() != example.rc_ids.size()) {
        throw DataError("example shape mismatch: wrong number of contexts");
    }
    for (size_t r = 0; r < example.rc_ids.size(); ++r) {
        if (example.rc_ids[r].size() != static_cast<size_t>(config.max_rc_tokens) ||
            example.rc_mask[r].size() != example.rc_ids[r].size()) {
            throw DataError("example shape mismatch: wrong context length");
        }
        for (size_t i = 0; i < example.rc_ids[r].size(); ++i) {
            if (example.rc_ids[r][i] < 0 || example.rc_ids[r][i] >= config.vocab_size) {
                throw DataError("example id out of vocabulary range");
            }
            if (example.rc_mask[r][i] == 0 && example.rc_ids[r][i] != Vocab::kPad) {
                throw DataError("example mask inconsistent with padding");
            }
        }
    }
    if (example.target_ids.empty()) {
        throw DataError("example has zero target tokens");
    }
    for (int id : example.target_ids) {
        if (id < 0 || id >= config.vocab_size) {
            throw DataError("target id out of vocabulary range");
        }
    }
}

void encode_into(const Params& params, const ToyExample& example, FullCache& cache) {
    const ModelConfig& config = params.config;
    int t = config.max_rc_tokens;
    int d = config.d_model;
    int n = config.n_contexts;
    MatrixXd pe = sinusoidal(t, d);

    cache.memory.states.resize(static_cast<Eigen::Index>(n) * t, d);
    cache.memory.key_mask.clear();
    cache.memory.key_mask.reserve(static_cast<size_t>(n) * static_cast<size_t>(t));
    cache.enc_inputs.resize(static_cast<size_t>(n));
    cache.enc.assign(static_cast<size_t>(n),
                     std::vector<EncLayerCache>(static_cast<size_t>(config.n_enc_layers)));

    for (int r = 0; r < n; ++r) {
        const auto& mask = example.rc_mask[static_cast<size_t>(r)];
        MatrixXd x = embed(params, example.rc_ids[static_cast<size_t>(r)]) + pe;
        cache.enc_inputs[static_cast<size_t>(r)] = x;
        for (int e = 0; e < config.n_enc_layers; ++e) {
            EncLayerCache& layer = cache.enc[static_cast<size_t>(r)][static_cast<size_t>(e)];
            std::string prefix = "enc" + std::to_string(e);
            MatrixXd attn = attention_forward(params, prefix + ".attn", x, x, &mask,
                                              /*causal=*/false, nullptr, layer.attn);
            MatrixXd x1 = layernorm_forward(params, prefix + ".ln1", x + attn, layer.ln1);
            MatrixXd f = ffn_forward(params, prefix + ".ff", x1, layer.ffn);
            x = layernorm_forward(params, prefix + ".ln2", x1 + f, layer.ln2);
        }
        cache.memory.states.middleRows(static_cast<Eigen::Index>(r) * t, t) = x;
        for (uint8_t m : mask) {
            cache.memory.key_mask.push_back(m);
        }
    }
}

void decode_into(const Params& params, const std::vector<int>& dec_ids, const Memory& memory,
                 FullCache& cache) {
    const ModelConfig& config = params.config;
    int d = config.d_model;
    MatrixXd pe = sinusoidal(static_cast<int>(dec_ids.size()), d);
    MatrixXd y = embed(params, dec_ids) + pe;
    cache.dec_input = y;
    cache.dec.assign(static_cast<size_t>(config.n_dec_layers), DecLayerCache{});

    const double* bias = nullptr;
    if (config.cross_position_bias) {
        const auto& entry = params.layout->at("cross_bias");
        bias = params.flat.data() + entry.offset;
    }

    for (int e = 0; e < config.n_dec_layers; ++e) {
        DecLayerCache& layer = cache.dec[static_cast<size_t>(e)];
        std::string prefix = "dec" + std::to_string(e);
        MatrixXd self = attention_forward(params, prefix + ".self", y, y, nullptr,
                                          /*causal=*/true, nullptr, layer.self_attn);
        MatrixXd y1 = layernorm_forward(params, prefix + ".ln1", y + self, layer.ln1);
        MatrixXd cross = attention_forward(params, prefix + ".cross", y1, memory.states,
                                           &memory.key_mask, /*causal=*/false, bias, layer.cross);
        MatrixXd y2 = layernorm_forward(params, prefix + ".ln2", y1 + cross, layer.ln2);
        MatrixXd f = ffn_forward(params, prefix + ".ff", y2, layer.ffn);
        y = layernorm_forward(params, prefix + ".ln3", y2 + f, layer.ln3);
    }
    cache.dec_out = y;
    cache.logits = (y * params.mat("out.w")).rowwise() + params.mat("out.b").row(0);
}

FullCache full_forward(const Params& params, const ToyExample& example) {
    check_example(params, example);
    FullCache cache;
    encode_into(params, example, cache);
    cache.dec_ids.push_back(Vocab::kBos);
    cache.dec_ids.insert(cache.dec_ids.end(), example.target_ids.begin(),
                         example.target_ids.end());
    cache.labels = example.target_ids;
    cache.labels.push_back(Vocab::kEos);
    decode_into(params, cache.dec_ids, cache.memory, cache);
    return cache;
}

}  // namespace

Memory encode_memory(const Params& params, const ToyExample& example) {
    check_example(params, example);
    FullCache cache;
    encode_into(params, example, cache);
    return std::move(cache.memory);
}

MatrixXd forward_logits(const Params& params, const ToyExample& example) {
    return full_forward(params, example).logits;
}

double cross_entropy(const MatrixXd& logits, const std::vector<int>& labels) {
    if (static_cast<size_t>(logits.rows()) != labels.size()) {
        throw DataError("cross_entropy: label count mismatch");
    }
    double total = 0.0;
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        double row_max = logits.row(i).maxCoeff();
        double lse = std::log((logits.row(i).array() - row_max).exp().sum()) + row_max;
        total += lse - logits(i, labels[static_cast<size_t>(i)]);
    }
    return total / static_cast<double>(logits.rows());
}

double loss(const Params& params, const ToyExample& example) {
    FullCache cache = full_forward(params, example);
    return cross_entropy(cache.logits, cache.labels);
}

double loss_and_grad(const Params& params, const ToyExample& example, VectorXd& grad) {
    FullCache cache = full_forward(params, example);
    double value = cross_entropy(cache.logits, cache.labels);

    const ParamLayout& layout = *params.layout;
    const ModelConfig& config = params.config;
    grad = VectorXd::Zero(static_cast<Eigen::Index>(layout.total));

    // d loss / d logits
    MatrixXd d_logits(cache.logits.rows(), cache.logits.cols());
    double inv_n = 1.0 / static_cast<double>(cache.logits.rows());
    for (Eigen::Index i = 0; i < cache.logits.rows(); ++i) {
        double row_max = cache.logits.row(i).maxCoeff();
        Eigen::RowVectorXd p = (cache.logits.row(i).array() - row_max).exp();
        p /= p.sum();
        p(cache.labels[static_cast<size_t>(i)]) -= 1.0;
        d_logits.row(i) = p * inv_n;
    }

    grad_mat(grad, layout, "out.w") += cache.dec_out.transpose() * d_logits;
    grad_mat(grad, layout, "out.b") += d_logits.colwise().sum();
    MatrixXd d_y = d_logits * params.mat("out.w").transpose();

    MatrixXd d_memory = MatrixXd::Zero(cache.memory.states.rows(), cache.memory.states.cols());

    for (int e = config.n_dec_layers - 1; e >= 0; --e) {
        DecLayerCache& layer = cache.dec[static_cast<size_t>(e)];
        std::string prefix = "dec" + std::to_string(e);
        const char* bias_name = config.cross_position_bias ? "cross_bias" : nullptr;

        MatrixXd d_y2_plus_f = layernorm_backward(params, prefix + ".ln3", layer.ln3, d_y, grad);
        MatrixXd d_y2 = d_y2_plus_f;
        d_y2 += ffn_backward(params, prefix + ".ff", layer.ffn, d_y2_plus_f, grad);

        MatrixXd d_y1_plus_cross =
            layernorm_backward(params, prefix + ".ln2", layer.ln2, d_y2, grad);
        MatrixXd d_y1 = d_y1_plus_cross;
        d_y1 += attention_backward(params, prefix + ".cross", layer.cross, d_y1_plus_cross, grad,
                                   d_memory, bias_name);

        MatrixXd d_y0_plus_self =
            layernorm_backward(params, prefix + ".ln1", layer.ln1, d_y1, grad);
        MatrixXd d_y0 = d_y0_plus_self;
        MatrixXd d_self_kv = MatrixXd::Zero(d_y0.rows(), d_y0.cols());
        d_y0 += attention_backward(params, prefix + ".self", layer.self_attn, d_y0_plus_self, grad,
                                   d_self_kv, nullptr);
        d_y0 += d_self_kv;  // queries and keys/values share the input
        d_y = d_y0;
    }

    // decoder embeddings
    {
        auto d_emb = grad_mat(grad, layout, "tok_emb");
        for (size_t i = 0; i < cache.dec_ids.size(); ++i) {
            d_emb.row(cache.dec_ids[i]) += d_y.row(static_cast<Eigen::Index>(i));
        }
    }

    // encoder stacks, per repo context
    int t = config.max_rc_tokens;
    for (int r = 0; r < config.n_contexts; ++r) {
        MatrixXd d_x = d_memory.middleRows(static_cast<Eigen::Index>(r) * t, t);
        for (int e = config.n_enc_layers - 1; e >= 0; --e) {
            EncLayerCache& layer = cache.enc[static_cast<size_t>(r)][static_cast<size_t>(e)];
            std::string prefix = "enc" + std::to_string(e);
            MatrixXd d_x1_plus_f = layernorm_backward(params, prefix + ".ln2", layer.ln2, d_x, grad);
            MatrixXd d_x1 = d_x1_plus_f;
            d_x1 += ffn_backward(params, prefix + ".ff", layer.ffn, d_x1_plus_f, grad);

            MatrixXd d_x0_plus_attn =
                layernorm_backward(params, prefix + ".ln1", layer.ln1, d_x1, grad);
            MatrixXd d_x0 = d_x0_plus_attn;
            MatrixXd d_kv = MatrixXd::Zero(d_x0.rows(), d_x0.cols());
            d_x0 += attention_backward(params, prefix + ".attn", layer.attn, d_x0_plus_attn, grad,
                                       d_kv, nullptr);
            d_x0 += d_kv;
            d_x = d_x0;
        }
        auto d_emb = grad_mat(grad, layout, "tok_emb");
        const auto& ids = example.rc_ids[static_cast<size_t>(r)];
        for (size_t i = 0; i < ids.size(); ++i) {
            d_emb.row(ids[i]) += d_x.row(static_cast<Eigen::Index>(i));
        }
    }

    return value;
}

TrainResult train(const ModelConfig& config, const std::vector<ToyExample>& dataset,
                  const TrainOptions& options) {
    if (dataset.empty()) {
        throw DataError("train: dataset is empty");
    }
    TrainResult result;
    result.params = Params::init(config, options.seed);
    size_t total = result.params.layout->total;
    VectorXd m = VectorXd::Zero(static_cast<Eigen::Index>(total));
    VectorXd v = VectorXd::Zero(static_cast<Eigen::Index>(total));
    VectorXd grad;

    for (size_t step = 0; step < options.steps; ++step) {
        const ToyExample& example = dataset[step % dataset.size()];
        double value = loss_and_grad(result.params, example, grad);
        if (!std::isfinite(value)) {
            throw DataError("training diverged (non-finite loss) at step " + std::to_string(step));
        }
        result.loss_curve.push_back(value);

        double t = static_cast<double>(step + 1);
        double bias1 = 1.0 - std::pow(options.beta1, t);
        double bias2 = 1.0 - std::pow(options.beta2, t);
        for (Eigen::Index i = 0; i < grad.size(); ++i) {
            m(i) = options.beta1 * m(i) + (1.0 - options.beta1) * grad(i);
            v(i) = options.beta2 * v(i) + (1.0 - options.beta2) * grad(i) * grad(i);
            double m_hat = m(i) / bias1;
            double v_hat = v(i) / bias2;
            result.params.flat(i) -= options.lr * m_hat / (std::sqrt(v_hat) + options.eps);
        }
    }
    return result;
}

DecodeResult decode(const Params& params, const Vocab& vocab,
                    const std::vector<std::string>& rc_texts, int max_new_tokens) {
    const ModelConfig& config = params.config;
    ToyExample example = make_example(vocab, config, rc_texts, "<pad>");
    example.target_ids = {Vocab::kPad};  // placeholder; only contexts matter here
    Memory memory = encode_memory(params, example);

    max_new_tokens = std::min(max_new_tokens, config.max_target_tokens);
    std::vector<int> dec_ids = {Vocab::kBos};
    DecodeResult result;
    for (int step = 0; step < max_new_tokens; ++step) {
        FullCache cache;
        decode_into(params, dec_ids, memory, cache);
        Eigen::RowVectorXd logits = cache.logits.row(cache.logits.rows() - 1);
        logits(Vocab::kPad) = kMasked;
        logits(Vocab::kBos) = kMasked;
        logits(Vocab::kUnk) = kMasked;
        Eigen::Index best = 0;
        logits.maxCoeff(&best);
        int token = static_cast<int>(best);
        if (token == Vocab::kEos || token == Vocab::kNewline) {
            result.text = vocab.decode(result.token_ids);
            return result;
        }
        result.token_ids.push_back(token);
        dec_ids.push_back(token);
    }
    result.truncated = true;
    result.text = vocab.decode(result.token_ids);
    return result;
}

void save_model(const std::filesystem::path& path, const Params& params, const Vocab& vocab) {
    ordered_json header;
    header["format"] = "repofid-fid-1";
    header["config"] = {
        {"vocab_size", params.config.vocab_size},
        {"d_model", params.config.d_model},
        {"n_heads", params.config.n_heads},
        {"n_enc_layers", params.config.n_enc_layers},
        {"n_dec_layers", params.config.n_dec_layers},
        {"max_rc_tokens", params.config.max_rc_tokens},
        {"n_contexts", params.config.n_contexts},
        {"cross_position_bias", params.config.cross_position_bias},
        {"ff_mult", params.config.ff_mult},
        {"max_target_tokens", params.config.max_target_tokens},
    };
    header["vocab"] = vocab.tokens();
    header["n_params"] = params.layout->total;

    std::string blob = header.dump();
    blob.push_back('\n');
    size_t bytes = params.layout->total * sizeof(double);
    size_t text_len = blob.size();
    blob.resize(text_len + bytes);
    std::memcpy(blob.data() + text_len, params.flat.data(), bytes);
    write_file(path, blob);
}

LoadedModel load_model(const std::filesystem::path& path) {
    std::string blob = read_file(path);
    size_t nl = blob.find('\n');
    if (nl == std::string::npos) {
        throw DataError("model file has no header: " + path.string());
    }
    ordered_json header = ordered_json::parse(blob.substr(0, nl), nullptr, false);
    if (header.is_discarded() || header.value("format", "") != "repofid-fid-1") {
        throw DataError("not a model file: " + path.string());
    }
    const auto& cfg = header["config"];
    ModelConfig config;
    config.vocab_size = cfg["vocab_size"].get<int>();
    config.d_model = cfg["d_model"].get<int>();
    config.n_heads = cfg["n_heads"].get<int>();
    config.n_enc_layers = cfg["n_enc_layers"].get<int>();
    config.n_dec_layers = cfg["n_dec_layers"].get<int>();
    config.max_rc_tokens = cfg["max_rc_tokens"].get<int>();
    config.n_contexts = cfg["n_contexts"].get<int>();
    config.cross_position_bias = cfg["cross_position_bias"].get<bool>();
    config.ff_mult = cfg["ff_mult"].get<int>();
    config.max_target_tokens = cfg["max_target_tokens"].get<int>();

    LoadedModel model;
    model.vocab = Vocab::from_tokens(header["vocab"].get<std::vector<std::string>>());
    model.params.config = config;
    model.params.layout = ParamLayout::build(config);
    size_t bytes = model.params.layout->total * sizeof(double);
    if (blob.size() != nl + 1 + bytes || header["n_params"].get<size_t>() != model.params.layout->total) {
        throw DataError("model file truncated or inconsistent: " + path.string());
    }
    model.params.flat.resize(static_cast<Eigen::Index>(model.params.layout->total));
    std::memcpy(model.params.flat.data(), blob.data() + nl + 1, bytes);
    return model;
}

}  // namespace repofid::fid
