#include "repofid/retrieval.hpp"

#include <algorithm>
#include <cmath>

#include "repofid/parallel.hpp"
#include "repofid/tokenize.hpp"
#include "repofid/util.hpp"

namespace repofid {

Bm25Index::Bm25Index(const RepoIndex& index, int jobs) {
    for (const auto& [rel, _] : index.files) {
        rel_paths_.push_back(rel);
    }
    term_counts_.resize(rel_paths_.size());
    doc_lens_.assign(rel_paths_.size(), 0);
    parallel_for(rel_paths_.size(), jobs, [&](size_t i) {
        const IndexedFile& file = index.at(rel_paths_[i]);
        std::unordered_map<std::string, size_t> counts;
        size_t len = 0;
        for (std::string_view token : text_tokens(file.source.content)) {
            ++counts[std::string(token)];
            ++len;
        }
        term_counts_[i] = std::move(counts);
        doc_lens_[i] = len;
    });
    for (size_t i = 0; i < rel_paths_.size(); ++i) {
        total_len_ += doc_lens_[i];
        for (const auto& [term, _] : term_counts_[i]) {
            ++doc_freq_[term];
        }
    }
}

std::vector<ScoredFile> Bm25Index::rank_impl(const TargetHole& hole, double k1, double b,
                                             int jobs) const {
    std::vector<size_t> doc_ids;
    size_t current_id = rel_paths_.size();
    for (size_t i = 0; i < rel_paths_.size(); ++i) {
        if (rel_paths_[i] == hole.rel_path) {
            current_id = i;
        } else {
            doc_ids.push_back(i);
        }
    }
    size_t n_docs = doc_ids.size();
    std::vector<ScoredFile> scored(n_docs);
    if (n_docs == 0) {
        return scored;
    }

    size_t corpus_len = total_len_ - (current_id < rel_paths_.size() ? doc_lens_[current_id] : 0);
    double avgdl = static_cast<double>(corpus_len) / static_cast<double>(n_docs);

    std::vector<std::string> query;
    for (std::string_view token : text_tokens(hole.surrounding)) {
        query.emplace_back(token);
    }

    // IDF per query token, with the current file removed from the stats.
    std::vector<double> idf(query.size(), 0.0);
    for (size_t q = 0; q < query.size(); ++q) {
        size_t df = 0;
        auto it = doc_freq_.find(query[q]);
        if (it != doc_freq_.end()) {
            df = it->second;
        }
        if (current_id < rel_paths_.size() && term_counts_[current_id].count(query[q]) > 0) {
            --df;
        }
        double n = static_cast<double>(df);
        double N = static_cast<double>(n_docs);
        idf[q] = std::log((N - n + 0.5) / (n + 0.5) + 1.0);
    }

    parallel_for(n_docs, jobs, [&](size_t d) {
        size_t doc = doc_ids[d];
        double len_norm = avgdl > 0.0 ? static_cast<double>(doc_lens_[doc]) / avgdl : 0.0;
        double denom_base = k1 * (1.0 - b + b * len_norm);
        double score = 0.0;
        for (size_t q = 0; q < query.size(); ++q) {
            auto it = term_counts_[doc].find(query[q]);
            if (it == term_counts_[doc].end()) {
                continue;
            }
            double tf = static_cast<double>(it->second);
            score += idf[q] * tf * (k1 + 1.0) / (tf + denom_base);
        }
        scored[d] = ScoredFile{rel_paths_[doc], score};
    });

    std::stable_sort(scored.begin(), scored.end(), [](const ScoredFile& a, const ScoredFile& b2) {
        if (a.score != b2.score) {
            return a.score > b2.score;
        }
        return a.rel_path < b2.rel_path;
    });
    return scored;
}

std::vector<ScoredFile> Bm25Index::rank(const TargetHole& hole, double k1, double b,
                                        int jobs) const {
    return rank_impl(hole, k1, b, jobs);
}

std::vector<ScoredFile> Bm25Index::rank_serial(const TargetHole& hole, double k1, double b) const {
    return rank_impl(hole, k1, b, 1);
}

std::vector<ScoredFile> bm25_rank(const RepoIndex& index, const TargetHole& hole, double k1,
                                  double b, int jobs) {
    return Bm25Index(index, jobs).rank(hole, k1, b, jobs);
}

std::vector<double> embed_bag(std::string_view text, size_t dim) {
    std::vector<double> vec(dim, 0.0);
    bool any = false;
    for (std::string_view token : text_tokens(text)) {
        size_t bucket = static_cast<size_t>(fnv1a64(token) % dim);
        vec[bucket] += 1.0;
        any = true;
    }
    if (!any) {
        return vec;  // zero vector for token-free text
    }
    double norm = 0.0;
    for (double v : vec) {
        norm += v * v;
    }
    norm = std::sqrt(norm);
    if (norm > 0.0) {
        for (double& v : vec) {
            v /= norm;
        }
    }
    return vec;
}

std::vector<double> HashedBagEmbedder::embed(std::string_view text) const {
    return embed_bag(text, dim_);
}

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) {
        throw DataError("cosine: dimension mismatch");
    }
    double dot = 0.0;
    double na = 0.0;
    double nb = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        return 0.0;
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<Chunk> enumerate_chunks(const RepoIndex& index, size_t chunk_lines) {
    std::vector<Chunk> chunks;
    if (chunk_lines == 0) {
        chunk_lines = 1;
    }
    for (const auto& [rel, file] : index.files) {
        size_t lines = file.source.line_count();
        for (size_t start = 0; start < lines; start += chunk_lines) {
            size_t end = std::min(lines, start + chunk_lines);
            size_t byte_begin = file.source.line_spans[start].first;
            size_t byte_end = file.source.line_spans[end - 1].second;
            chunks.push_back(Chunk{rel, start, end,
                                   file.source.content.substr(byte_begin, byte_end - byte_begin)});
        }
    }
    return chunks;
}

std::vector<std::vector<double>> embed_chunks_serial(const std::vector<Chunk>& chunks,
                                                     const Embedder& embedder) {
    std::vector<std::vector<double>> out(chunks.size());
    serial_for(chunks.size(), [&](size_t i) { out[i] = embedder.embed(chunks[i].text); });
    return out;
}

std::vector<std::vector<double>> embed_chunks(const std::vector<Chunk>& chunks,
                                              const Embedder& embedder, int jobs) {
    std::vector<std::vector<double>> out(chunks.size());
    parallel_for(chunks.size(), jobs, [&](size_t i) { out[i] = embedder.embed(chunks[i].text); });
    return out;
}

std::vector<Chunk> random_nn(const RepoIndex& index, const TargetHole& hole,
                             const RandomNnOptions& options, const Embedder& embedder) {
    if (options.k > options.n_candidates) {
        throw UsageError("random_nn: k must not exceed n_candidates");
    }
    std::vector<Chunk> all = enumerate_chunks(index, options.chunk_lines);
    std::vector<Chunk> pool;
    for (Chunk& chunk : all) {
        if (chunk.rel_path != hole.rel_path) {
            pool.push_back(std::move(chunk));
        }
    }

    Rng rng(mix_seed(options.seed, fnv1a64(hole.rel_path) ^ (hole.line_idx * 1315423911ull) ^
                                       hole.char_start));
    std::vector<size_t> picks = rng.sample_indices(pool.size(), options.n_candidates);
    std::vector<Chunk> candidates;
    candidates.reserve(picks.size());
    for (size_t idx : picks) {
        candidates.push_back(std::move(pool[idx]));
    }

    std::vector<std::vector<double>> embeddings = embed_chunks(candidates, embedder, options.jobs);
    std::vector<double> query = embedder.embed(hole.surrounding);

    std::vector<std::pair<double, size_t>> order(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
        order[i] = {cosine(embeddings[i], query), i};
    }
    std::stable_sort(order.begin(), order.end(), [&](const auto& a, const auto& b) {
        if (a.first != b.first) {
            return a.first > b.first;
        }
        const Chunk& ca = candidates[a.second];
        const Chunk& cb = candidates[b.second];
        if (ca.rel_path != cb.rel_path) {
            return ca.rel_path < cb.rel_path;
        }
        return ca.line_start < cb.line_start;
    });

    size_t take = std::min(options.k, order.size());
    std::vector<Chunk> top;
    top.reserve(take);
    for (size_t i = 0; i < take; ++i) {
        top.push_back(std::move(candidates[order[i].second]));
    }
    return top;
}

}  // namespace repofid
