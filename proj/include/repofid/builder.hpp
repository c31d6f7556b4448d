#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "repofid/dataset_io.hpp"
#include "repofid/hole_gen.hpp"
#include "repofid/packing.hpp"
#include "repofid/prompt_proposals.hpp"
#include "repofid/retrieval.hpp"

namespace repofid {

// Caches per-file context extraction for the hole-independent prompt
// sources; current-file extraction is recomputed per hole because the hole
// bytes must be excluded.
class PpcExtractor {
  public:
    explicit PpcExtractor(const RepoIndex& index) : index_(index) {}

    // Candidate contexts in ranking order for one hole.
    std::vector<NamedText> ranked_contexts(const TargetHole& hole,
                                           const std::vector<PromptProposal>& ranking);

  private:
    const RepoIndex& index_;
    std::map<std::string, std::string> cache_;  // "source/type" x rel_path -> text
};

struct RetrievalConfig {
    double bm25_k1 = 1.5;
    double bm25_b = 0.75;
    size_t bm25_top_files = 32;
    size_t chunk_lines = 10;
    size_t nn_candidates = 512;
    size_t nn_top_k = 32;
    size_t embed_dim = 1024;
};

// Candidate contexts for one hole under a retrieval kind (in rank order).
// For PP the ranking drives extraction; for BM25/RandomNN the retrieved
// texts are the candidates and the prior context is supplied separately to
// the packer.
struct HoleCandidates {
    std::vector<NamedText> ranked;
    std::optional<NamedText> prior_override;
};

class ContextBuilder {
  public:
    ContextBuilder(const RepoIndex& index, std::vector<PromptProposal> ranking,
                   const RetrievalConfig& retrieval, uint64_t seed, int jobs);

    HoleCandidates candidates(const TargetHole& hole, ContextKind kind);

  private:
    const RepoIndex& index_;
    std::vector<PromptProposal> ranking_;
    RetrievalConfig retrieval_;
    uint64_t seed_;
    int jobs_;
    PpcExtractor extractor_;
    std::optional<Bm25Index> bm25_;
    HashedBagEmbedder embedder_;
};

struct BuildConfig {
    PackingConfig packing;
    RetrievalConfig retrieval;
    std::vector<ContextKind> kinds = {ContextKind::PP, ContextKind::BM25, ContextKind::RandomNN};
    uint64_t seed = 0;
    size_t cap = 10000;
    std::optional<size_t> cap_train;
    std::optional<size_t> cap_val;
    std::optional<size_t> cap_test;
    size_t min_files = 20;
    SurroundingOptions surrounding;
    std::optional<std::filesystem::path> split_file;  // explicit repo->split map
    std::optional<std::filesystem::path> ranking_file;
    int jobs = 1;
};

struct BuildSummary {
    std::map<std::string, size_t> holes_per_repo;
    CorpusStats stats;
};

// Scans every immediate subdirectory of repos_root as a repository and
// materializes a Stack-Repo-style tree under out_root:
//   out_root/<split>/<repo>/<source tree> + hole_and_context_<kind>.json
BuildSummary build_dataset(const std::filesystem::path& repos_root,
                           const std::filesystem::path& out_root, const BuildConfig& config);

// Packs one repo's holes under a retrieval kind; shared by build_dataset
// and the pack subcommand.
std::vector<HoleRecord> pack_repo_holes(const RepoIndex& index,
                                        const std::vector<TargetHole>& holes,
                                        ContextKind kind, const PackingConfig& packing,
                                        const RetrievalConfig& retrieval,
                                        const std::vector<PromptProposal>& ranking,
                                        uint64_t seed, int jobs);

// Parses "repo_id<whitespace>split" lines ('#' comments allowed).
SplitAssignment read_split_file(const std::filesystem::path& path);

// Immediate subdirectories of a root, sorted.
std::vector<std::string> list_repo_dirs(const std::filesystem::path& repos_root);

}  // namespace repofid
