#include "repofid/builder.hpp"

#include <algorithm>

#include "repofid/parallel.hpp"
#include "repofid/tokenize.hpp"
#include "repofid/util.hpp"

namespace repofid {

std::vector<NamedText> PpcExtractor::ranked_contexts(const TargetHole& hole,
                                                     const std::vector<PromptProposal>& ranking) {
    std::vector<NamedText> out;
    out.reserve(ranking.size());
    for (const PromptProposal& proposal : ranking) {
        if (!proposal.valid()) {
            continue;
        }
        if (proposal.source == PromptSource::Current) {
            Ppc ppc = extract_ppc(proposal, hole, index_);
            out.push_back(NamedText{proposal.name(), std::move(ppc.text)});
            continue;
        }
        std::string key = proposal.name() + "\x1f" + hole.rel_path;
        auto it = cache_.find(key);
        if (it == cache_.end()) {
            Ppc ppc = extract_ppc(proposal, hole, index_);
            it = cache_.emplace(key, std::move(ppc.text)).first;
        }
        out.push_back(NamedText{proposal.name(), it->second});
    }
    return out;
}

ContextBuilder::ContextBuilder(const RepoIndex& index, std::vector<PromptProposal> ranking,
                               const RetrievalConfig& retrieval, uint64_t seed, int jobs)
    : index_(index),
      ranking_(std::move(ranking)),
      retrieval_(retrieval),
      seed_(seed),
      jobs_(jobs),
      extractor_(index),
      embedder_(retrieval.embed_dim) {}

HoleCandidates ContextBuilder::candidates(const TargetHole& hole, ContextKind kind) {
    HoleCandidates result;
    switch (kind) {
        case ContextKind::PP: {
            result.ranked = extractor_.ranked_contexts(hole, ranking_);
            break;
        }
        case ContextKind::BM25: {
            if (!bm25_.has_value()) {
                bm25_.emplace(index_, jobs_);
            }
            std::vector<ScoredFile> scored = bm25_->rank(hole, retrieval_.bm25_k1,
                                                         retrieval_.bm25_b, jobs_);
            size_t take = std::min(retrieval_.bm25_top_files, scored.size());
            for (size_t i = 0; i < take; ++i) {
                const IndexedFile& file = index_.at(scored[i].rel_path);
                result.ranked.push_back(
                    NamedText{"bm25/" + scored[i].rel_path, file.source.content});
            }
            result.prior_override = NamedText{kPriorName, prior_ppc(index_, hole).text};
            break;
        }
        case ContextKind::RandomNN: {
            RandomNnOptions options;
            options.chunk_lines = retrieval_.chunk_lines;
            options.n_candidates = retrieval_.nn_candidates;
            options.k = std::min(retrieval_.nn_top_k, retrieval_.nn_candidates);
            options.seed = seed_;
            options.jobs = jobs_;
            for (Chunk& chunk : random_nn(index_, hole, options, embedder_)) {
                std::string name = "random_nn/" + chunk.rel_path + ":" +
                                   std::to_string(chunk.line_start);
                result.ranked.push_back(NamedText{std::move(name), std::move(chunk.text)});
            }
            result.prior_override = NamedText{kPriorName, prior_ppc(index_, hole).text};
            break;
        }
    }
    return result;
}

std::vector<HoleRecord> pack_repo_holes(const RepoIndex& index,
                                        const std::vector<TargetHole>& holes, ContextKind kind,
                                        const PackingConfig& packing,
                                        const RetrievalConfig& retrieval,
                                        const std::vector<PromptProposal>& ranking,
                                        uint64_t seed, int jobs) {
    ContextBuilder builder(index, ranking, retrieval, seed, jobs);
    std::vector<HoleRecord> records;
    records.reserve(holes.size());
    for (const TargetHole& hole : holes) {
        HoleCandidates candidates = builder.candidates(hole, kind);
        const NamedText* prior =
            candidates.prior_override.has_value() ? &*candidates.prior_override : nullptr;
        PackedExample packed = pack(hole, candidates.ranked, packing, prior);
        records.push_back(record_from_packed(packed));
    }
    return records;
}

SplitAssignment read_split_file(const std::filesystem::path& path) {
    SplitAssignment assignment;
    std::string content = read_file(path);
    size_t line_no = 0;
    for (std::string_view raw : split_lines(content)) {
        ++line_no;
        size_t hash = raw.find('#');
        std::string_view line = rstrip(hash == std::string_view::npos ? raw : raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        size_t ws = line.find_first_of(" \t");
        if (ws == std::string_view::npos) {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": expected '<repo_id> <train|val|test>'");
        }
        std::string repo_id(line.substr(0, ws));
        std::string_view rest = line.substr(ws);
        size_t value_start = rest.find_first_not_of(" \t");
        std::string split_text(value_start == std::string_view::npos ? "" : rest.substr(value_start));
        Split split;
        if (split_text == "train") {
            split = Split::Train;
        } else if (split_text == "val") {
            split = Split::Val;
        } else if (split_text == "test") {
            split = Split::Test;
        } else {
            throw DataError(path.string() + ":" + std::to_string(line_no) +
                            ": unknown split: " + split_text);
        }
        assignment.by_repo[repo_id] = split;
    }
    return assignment;
}

std::vector<std::string> list_repo_dirs(const std::filesystem::path& repos_root) {
    if (!std::filesystem::is_directory(repos_root)) {
        throw DataError("not a directory: " + repos_root.string());
    }
    std::vector<std::string> repos;
    for (const auto& entry : std::filesystem::directory_iterator(repos_root)) {
        if (entry.is_directory()) {
            repos.push_back(entry.path().filename().string());
        }
    }
    std::sort(repos.begin(), repos.end());
    return repos;
}

BuildSummary build_dataset(const std::filesystem::path& repos_root,
                           const std::filesystem::path& out_root, const BuildConfig& config) {
    std::vector<std::string> repo_ids = list_repo_dirs(repos_root);
    if (repo_ids.empty()) {
        throw DataError("no repository directories under " + repos_root.string());
    }

    std::map<std::string, RepoIndex> indices;
    std::vector<std::pair<std::string, size_t>> file_counts;
    for (const std::string& repo_id : repo_ids) {
        ScanOptions scan_options;
        scan_options.jobs = config.jobs;
        RepoIndex index = scan_repo(repos_root / repo_id, scan_options);
        file_counts.emplace_back(repo_id, index.files.size());
        indices.emplace(repo_id, std::move(index));
    }

    SplitAssignment assignment;
    if (config.split_file.has_value()) {
        assignment = read_split_file(*config.split_file);
        for (const auto& [repo_id, _] : assignment.by_repo) {
            if (indices.count(repo_id) == 0) {
                throw DataError("split file names unknown repo: " + repo_id);
            }
        }
    } else {
        assignment = split_repos(file_counts, config.seed, config.min_files);
    }

    std::vector<PromptProposal> ranking;
    if (config.ranking_file.has_value()) {
        ranking = parse_ranking(read_file(*config.ranking_file));
    } else {
        ranking = default_ranking();
    }

    BuildSummary summary;
    for (const auto& [repo_id, split] : assignment.by_repo) {
        const RepoIndex& index = indices.at(repo_id);
        HoleGenOptions hole_options;
        hole_options.seed = config.seed;
        hole_options.surrounding = config.surrounding;
        hole_options.jobs = config.jobs;
        hole_options.cap = config.cap;
        if (split == Split::Train && config.cap_train.has_value()) {
            hole_options.cap = *config.cap_train;
        } else if (split == Split::Val && config.cap_val.has_value()) {
            hole_options.cap = *config.cap_val;
        } else if (split == Split::Test && config.cap_test.has_value()) {
            hole_options.cap = *config.cap_test;
        }
        std::vector<TargetHole> holes = generate_holes(index, hole_options);
        summary.holes_per_repo[repo_id] = holes.size();

        std::filesystem::path repo_out = out_root / split_name(split) / repo_id;
        copy_repo_sources(index, repo_out);
        for (ContextKind kind : config.kinds) {
            std::vector<HoleRecord> records = pack_repo_holes(
                index, holes, kind, config.packing, config.retrieval, ranking, config.seed,
                config.jobs);
            write_records_file(repo_out / kind_filename(kind), records);
        }
    }
    summary.stats = dataset_stats(out_root);
    return summary;
}

}  // namespace repofid
