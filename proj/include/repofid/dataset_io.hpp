#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "repofid/packing.hpp"
#include "repofid/repo_model.hpp"

namespace repofid {

enum class ContextKind { PP, BM25, RandomNN };

std::string kind_name(ContextKind kind);
std::optional<ContextKind> parse_kind(std::string_view name);
std::string kind_filename(ContextKind kind);  // hole_and_context_<kind>.json

struct HoleLocation {
    std::string file;  // repo-relative path
    int64_t line = 0;
    int64_t col = 0;
};

struct HoleRecord {
    HoleLocation location;
    std::string hole;
    std::string surrounding;
    std::vector<std::string> repo_contexts;  // N formatted strings, or empty
};

HoleRecord record_from_packed(const PackedExample& example);

// One JSON object per line, keys in fixed order
// (location{file,line,col}, hole, surrounding, repo_contexts).
std::string serialize_records(const std::vector<HoleRecord>& records);

// Strict parse: malformed lines, missing or mistyped or unknown keys raise
// DataError naming the file and 1-based line number.
std::vector<HoleRecord> parse_records(std::string_view text, const std::string& origin);

void write_records_file(const std::filesystem::path& path, const std::vector<HoleRecord>& records);
std::vector<HoleRecord> read_records_file(const std::filesystem::path& path);

// Copies a repo's indexed source files into out_dir, preserving the tree.
void copy_repo_sources(const RepoIndex& index, const std::filesystem::path& out_dir);

struct RepoRecords {
    std::string repo_id;
    std::vector<HoleRecord> records;
};

// Reads hole_and_context_<kind>.json from every repo directory under
// split_dir, repos in lexicographic order.
std::vector<RepoRecords> read_split(const std::filesystem::path& split_dir, ContextKind kind);

// Flattened record list, file order.
std::vector<HoleRecord> read_dataset(const std::filesystem::path& split_dir, ContextKind kind);

struct SplitStats {
    size_t n_repos = 0;
    size_t n_files = 0;
    size_t n_holes = 0;
    bool missing = false;
};

struct CorpusStats {
    SplitStats train;
    SplitStats val;
    SplitStats test;
};

// Counts repos, .java files and holes per split under dataset_root.
// A missing split directory reports zeros with the missing flag set.
CorpusStats dataset_stats(const std::filesystem::path& dataset_root);

}  // namespace repofid
