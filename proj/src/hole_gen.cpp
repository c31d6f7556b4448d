#include "repofid/hole_gen.hpp"

#include <algorithm>

#include "repofid/parallel.hpp"
#include "repofid/tokenize.hpp"

namespace repofid {

std::optional<std::pair<size_t, std::string>> make_hole(std::string_view line, Rng& rng) {
    std::vector<LineToken> tokens = delimiter_tokenize(line);
    if (tokens.empty()) {
        return std::nullopt;
    }
    size_t pick = static_cast<size_t>(rng.below(tokens.size()));
    size_t char_start = tokens[pick].offset;
    return std::make_pair(char_start, std::string(line.substr(char_start)));
}

std::string surrounding_context(const SourceFile& file, size_t line_idx, size_t char_start,
                                const SurroundingOptions& options) {
    std::vector<std::string_view> parts;
    size_t first = line_idx >= options.lines_above ? line_idx - options.lines_above : 0;
    for (size_t l = first; l < line_idx; ++l) {
        parts.push_back(file.line_text(l));
    }
    std::string_view hole_line = file.line_text(line_idx);
    parts.push_back(hole_line.substr(0, std::min(char_start, hole_line.size())));
    size_t last = std::min(file.line_count(), line_idx + 1 + options.lines_below);
    for (size_t l = line_idx + 1; l < last; ++l) {
        parts.push_back(file.line_text(l));
    }
    std::string out;
    for (size_t i = 0; i < parts.size(); ++i) {
        if (i > 0) {
            out.push_back('\n');
        }
        out.append(parts[i]);
    }
    return out;
}

std::vector<TargetHole> generate_holes(const RepoIndex& index, const HoleGenOptions& options) {
    std::vector<const IndexedFile*> files;
    files.reserve(index.files.size());
    for (const auto& [_, file] : index.files) {
        files.push_back(&file);
    }

    // Per-file random streams keyed by path so results do not depend on
    // worker scheduling.
    std::vector<std::vector<TargetHole>> per_file(files.size());
    parallel_for(files.size(), options.jobs, [&](size_t i) {
        const IndexedFile& file = *files[i];
        Rng rng(mix_seed(options.seed, fnv1a64(file.source.rel_path)));
        std::vector<TargetHole> holes;
        for (size_t l = 0; l < file.source.line_count(); ++l) {
            if (file.facts.line_mask[l] != LineMask::Code) {
                continue;
            }
            auto made = make_hole(file.source.line_text(l), rng);
            if (!made.has_value()) {
                continue;
            }
            TargetHole hole;
            hole.repo_id = index.repo_id;
            hole.rel_path = file.source.rel_path;
            hole.line_idx = l;
            hole.char_start = made->first;
            hole.hole_str = std::move(made->second);
            hole.surrounding = surrounding_context(file.source, l, hole.char_start, options.surrounding);
            holes.push_back(std::move(hole));
        }
        per_file[i] = std::move(holes);
    });

    std::vector<TargetHole> all;
    for (auto& holes : per_file) {
        for (auto& hole : holes) {
            all.push_back(std::move(hole));
        }
    }
    if (options.cap >= 1 && all.size() > options.cap) {
        Rng rng(mix_seed(options.seed, fnv1a64(index.repo_id) ^ 0x5ca1ab1eull));
        std::vector<size_t> keep = rng.sample_indices(all.size(), options.cap);
        std::vector<TargetHole> capped;
        capped.reserve(keep.size());
        for (size_t idx : keep) {
            capped.push_back(std::move(all[idx]));
        }
        all = std::move(capped);
    }
    return all;
}

std::string split_name(Split split) {
    switch (split) {
        case Split::Train:
            return "train";
        case Split::Val:
            return "val";
        case Split::Test:
            return "test";
    }
    return "train";
}

SplitAssignment split_repos(const std::vector<std::pair<std::string, size_t>>& repo_file_counts,
                            uint64_t seed, size_t min_files) {
    std::vector<std::string> eligible;
    for (const auto& [repo_id, n_files] : repo_file_counts) {
        if (n_files >= min_files) {
            eligible.push_back(repo_id);
        }
    }
    std::sort(eligible.begin(), eligible.end());
    if (eligible.size() < 4) {
        throw DataError("need at least 4 eligible repositories for a 2:1:1 split, have " +
                        std::to_string(eligible.size()));
    }
    Rng rng(mix_seed(seed, 0x529a7));
    rng.shuffle(eligible);

    size_t m = eligible.size();
    size_t quarter = m / 4;
    size_t remainder = m % 4;
    size_t n_train = 2 * quarter + (remainder >= 1 ? 1 : 0);
    size_t n_val = quarter + (remainder >= 2 ? 1 : 0);

    SplitAssignment assignment;
    for (size_t i = 0; i < m; ++i) {
        Split split = Split::Test;
        if (i < n_train) {
            split = Split::Train;
        } else if (i < n_train + n_val) {
            split = Split::Val;
        }
        assignment.by_repo[eligible[i]] = split;
    }
    return assignment;
}

}  // namespace repofid
