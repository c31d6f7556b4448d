#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "repofid/repo_model.hpp"
#include "repofid/util.hpp"

namespace repofid {

struct TargetHole {
    std::string repo_id;
    std::string rel_path;
    size_t line_idx = 0;    // 0-based
    size_t char_start = 0;  // byte offset within the line
    std::string hole_str;   // line bytes from char_start to end of line
    std::string surrounding;
};

// Picks a uniformly random token of the line; the hole runs from that token
// to the end of the line. Lines with no tokens yield nothing.
std::optional<std::pair<size_t, std::string>> make_hole(std::string_view line, Rng& rng);

struct SurroundingOptions {
    size_t lines_above = 2;
    size_t lines_below = 2;
};

// Up to lines_above lines, then the hole line's prefix (bytes before the
// hole), then up to lines_below lines, joined with '\n'. Never contains the
// hole text. Missing lines at file boundaries are simply absent.
std::string surrounding_context(const SourceFile& file, size_t line_idx, size_t char_start,
                                const SurroundingOptions& options = {});

struct HoleGenOptions {
    uint64_t seed = 0;
    size_t cap = 10000;  // max holes contributed by one repository
    SurroundingOptions surrounding;
    int jobs = 1;
};

// One hole per code line of every file (comments and blanks excluded).
// If the repo exceeds the cap, a seeded uniform subset of size cap is kept.
// Deterministic in (index, seed, cap) and independent of jobs.
std::vector<TargetHole> generate_holes(const RepoIndex& index, const HoleGenOptions& options = {});

enum class Split { Train, Val, Test };

std::string split_name(Split split);

struct SplitAssignment {
    std::map<std::string, Split> by_repo;
};

// Repos with fewer than min_files files are excluded; the rest are shuffled
// by seed and assigned train:val:test = 2:1:1 (remainder goes to train
// first, then val). Fewer than 4 eligible repos is an error.
SplitAssignment split_repos(const std::vector<std::pair<std::string, size_t>>& repo_file_counts,
                            uint64_t seed, size_t min_files = 20);

}  // namespace repofid
