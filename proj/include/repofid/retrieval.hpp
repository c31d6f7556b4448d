#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "repofid/hole_gen.hpp"
#include "repofid/repo_model.hpp"

namespace repofid {

struct ScoredFile {
    std::string rel_path;
    double score = 0.0;
};

struct Chunk {
    std::string rel_path;
    size_t line_start = 0;
    size_t line_end = 0;  // exclusive; line_end - line_start == chunk_lines except at file end
    std::string text;
};

// Per-document token statistics shared by every hole in a repo.
class Bm25Index {
  public:
    explicit Bm25Index(const RepoIndex& index, int jobs = 1);

    // Okapi BM25 of every file except the current one, descending score,
    // ties by lexicographic rel_path. Query = delimiter tokens of the
    // surrounding context (duplicates keep their weight).
    // IDF(t) = ln((N - n + 0.5) / (n + 0.5) + 1).
    std::vector<ScoredFile> rank(const TargetHole& hole, double k1 = 1.5, double b = 0.75,
                                 int jobs = 1) const;

    // Plain-loop reference for the parallel scoring kernel.
    std::vector<ScoredFile> rank_serial(const TargetHole& hole, double k1 = 1.5,
                                        double b = 0.75) const;

  private:
    std::vector<ScoredFile> rank_impl(const TargetHole& hole, double k1, double b, int jobs) const;

    std::vector<std::string> rel_paths_;
    std::vector<std::unordered_map<std::string, size_t>> term_counts_;
    std::vector<size_t> doc_lens_;
    std::unordered_map<std::string, size_t> doc_freq_;
    size_t total_len_ = 0;
};

std::vector<ScoredFile> bm25_rank(const RepoIndex& index, const TargetHole& hole, double k1 = 1.5,
                                  double b = 0.75, int jobs = 1);

class Embedder {
  public:
    virtual ~Embedder() = default;
    virtual std::vector<double> embed(std::string_view text) const = 0;
    virtual size_t dim() const = 0;
};

// Hashed bag-of-tokens counts, L2-normalized; the deterministic default
// standing in for a learned code embedder. Empty text embeds to the zero
// vector.
class HashedBagEmbedder : public Embedder {
  public:
    explicit HashedBagEmbedder(size_t dim = 1024) : dim_(dim) {}
    std::vector<double> embed(std::string_view text) const override;
    size_t dim() const override { return dim_; }

  private:
    size_t dim_;
};

std::vector<double> embed_bag(std::string_view text, size_t dim = 1024);

// Zero for zero vectors; in [0, 1] for non-negative bags.
double cosine(const std::vector<double>& a, const std::vector<double>& b);

struct RandomNnOptions {
    size_t chunk_lines = 10;
    size_t n_candidates = 512;
    size_t k = 8;
    uint64_t seed = 0;
    int jobs = 1;
};

// All consecutive chunk windows of every file, in (rel_path, line_start)
// order. The basis both random_nn paths sample from.
std::vector<Chunk> enumerate_chunks(const RepoIndex& index, size_t chunk_lines);

// Samples n_candidates chunks from non-current files (seeded, uniform),
// ranks by cosine similarity against the embedded surrounding context,
// returns the top k. Deterministic in the seed.
std::vector<Chunk> random_nn(const RepoIndex& index, const TargetHole& hole,
                             const RandomNnOptions& options, const Embedder& embedder);

// Embeds chunks[i] for every i; serial reference + parallel kernel.
std::vector<std::vector<double>> embed_chunks_serial(const std::vector<Chunk>& chunks,
                                                     const Embedder& embedder);
std::vector<std::vector<double>> embed_chunks(const std::vector<Chunk>& chunks,
                                              const Embedder& embedder, int jobs);

}  // namespace repofid
