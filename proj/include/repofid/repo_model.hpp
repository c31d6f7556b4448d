#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace repofid {

struct SourceFile {
    std::string repo_id;
    std::string rel_path;
    std::string content;
    // [begin, end) byte spans per line, covering content exactly; a line's
    // span includes its trailing '\n' when present.
    std::vector<std::pair<size_t, size_t>> line_spans;

    static SourceFile make(std::string repo_id, std::string rel_path, std::string content);

    size_t line_count() const { return line_spans.size(); }
    std::string_view line_text(size_t i) const;  // without the trailing '\n'
    std::string_view line_raw(size_t i) const;   // with the trailing '\n'
};

enum class LineMask : uint8_t { Code, Blank, LineComment, BlockComment };

struct MethodSpan {
    std::string name;
    size_t sig_line_begin = 0;  // line of the method name
    size_t sig_line_end = 0;    // line of the opening brace, inclusive
    size_t body_begin = 0;      // byte offset of '{'
    size_t body_end = 0;        // one past the matching '}', or scan end
    bool body_truncated = false;
};

struct JavaLiteFacts {
    std::optional<std::string> package_name;
    std::vector<std::string> imports;  // dotted; wildcards kept as a.b.*
    std::vector<std::string> class_names;
    std::vector<std::string> extends_names;  // simple names, declaration order
    std::vector<MethodSpan> methods;
    std::vector<std::string> identifiers;       // first occurrence order, deduped
    std::vector<std::string> string_literals;   // first occurrence order, deduped
    std::vector<size_t> field_declaration_lines;
    std::vector<LineMask> line_mask;  // one entry per line
    bool facts_truncated = false;     // file exceeded the facts byte limit
    bool unbalanced_braces = false;
};

struct AnalyzeOptions {
    size_t max_facts_bytes = size_t{1} << 20;
};

// Lexical scan: tracks string/char literals and both comment styles, never
// parses. Method detection is a heuristic (identifier + parens + brace
// outside control keywords); misses degrade context quality only.
JavaLiteFacts analyze_file(const SourceFile& file, const AnalyzeOptions& options = {});

struct IndexedFile {
    SourceFile source;
    JavaLiteFacts facts;
};

struct RepoIndex {
    std::string repo_id;
    std::filesystem::path root;
    std::map<std::string, IndexedFile> files;  // keyed by rel_path (sorted)
    std::map<std::string, std::vector<std::string>> import_edges;
    std::map<std::string, std::vector<std::string>> dir_index;       // parent dir -> files
    std::map<std::string, std::vector<std::string>> name_token_index;  // filename token -> files
    std::map<std::string, std::vector<std::string>> stem_index;        // exact stem -> files
    std::vector<std::string> skipped;  // undecodable files, sorted

    bool contains(const std::string& rel_path) const { return files.count(rel_path) > 0; }
    const IndexedFile& at(const std::string& rel_path) const;
};

struct ScanOptions {
    size_t max_facts_bytes = size_t{1} << 20;
    int jobs = 1;
    std::string repo_id;  // defaults to the root directory name
};

// Indexes every .java file under root (recursive), lexicographic rel_path
// order. Undecodable files land on the skip list. Deterministic for any
// jobs value.
RepoIndex scan_repo(const std::filesystem::path& root, const ScanOptions& options = {});

// Filename stem split at camelCase boundaries, digits, and underscores;
// tokens are lowercased.
std::vector<std::string> filename_tokens(std::string_view stem);

std::vector<std::string> resolve_imports(const RepoIndex& index, const std::string& rel_path);
std::vector<std::string> sibling_files(const RepoIndex& index, const std::string& rel_path);
std::vector<std::string> similar_name_files(const RepoIndex& index, const std::string& rel_path);
std::vector<std::string> parent_class_files(const RepoIndex& index, const std::string& rel_path);

}  // namespace repofid
