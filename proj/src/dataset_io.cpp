#include "repofid/dataset_io.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "repofid/util.hpp"

namespace repofid {

using ordered_json = nlohmann::ordered_json;

std::string kind_name(ContextKind kind) {
    switch (kind) {
        case ContextKind::PP:
            return "PP";
        case ContextKind::BM25:
            return "BM25";
        case ContextKind::RandomNN:
            return "RandomNN";
    }
    return "PP";
}

std::optional<ContextKind> parse_kind(std::string_view name) {
    std::string flat(name);
    std::transform(flat.begin(), flat.end(), flat.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    std::replace(flat.begin(), flat.end(), '_', '-');
    if (flat == "pp") {
        return ContextKind::PP;
    }
    if (flat == "bm25") {
        return ContextKind::BM25;
    }
    if (flat == "random-nn" || flat == "randomnn") {
        return ContextKind::RandomNN;
    }
    return std::nullopt;
}

std::string kind_filename(ContextKind kind) {
    return "hole_and_context_" + kind_name(kind) + ".json";
}

HoleRecord record_from_packed(const PackedExample& example) {
    HoleRecord record;
    record.location.file = example.rel_path;
    record.location.line = static_cast<int64_t>(example.line_idx);
    record.location.col = static_cast<int64_t>(example.char_start);
    record.hole = example.target;
    record.surrounding = example.surrounding;
    record.repo_contexts.reserve(example.rcs.size());
    for (const RepoContext& rc : example.rcs) {
        record.repo_contexts.push_back(rc.formatted_text);
    }
    return record;
}

std::string serialize_records(const std::vector<HoleRecord>& records) {
    std::string out;
    for (const HoleRecord& record : records) {
        ordered_json j;
        j["location"] = ordered_json{{"file", record.location.file},
                                     {"line", record.location.line},
                                     {"col", record.location.col}};
        j["hole"] = record.hole;
        j["surrounding"] = record.surrounding;
        j["repo_contexts"] = record.repo_contexts;
        out += j.dump();
        out.push_back('\n');
    }
    return out;
}

namespace {

[[noreturn]] void record_error(const std::string& origin, size_t line_no, const std::string& what) {
    throw DataError(origin + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

std::vector<HoleRecord> parse_records(std::string_view text, const std::string& origin) {
    std::vector<HoleRecord> records;
    size_t line_no = 0;
    for (std::string_view line : split_lines(text)) {
        ++line_no;
        if (rstrip(line).empty()) {
            record_error(origin, line_no, "empty line in record file");
        }
        ordered_json j = ordered_json::parse(line, nullptr, false);
        if (j.is_discarded()) {
            record_error(origin, line_no, "malformed JSON");
        }
        if (!j.is_object()) {
            record_error(origin, line_no, "record is not an object");
        }
        for (const auto& [key, _] : j.items()) {
            if (key != "location" && key != "hole" && key != "surrounding" &&
                key != "repo_contexts") {
                record_error(origin, line_no, "unknown key: " + key);
            }
        }
        for (const char* key : {"location", "hole", "surrounding", "repo_contexts"}) {
            if (!j.contains(key)) {
                record_error(origin, line_no, std::string("missing key: ") + key);
            }
        }
        const auto& loc = j["location"];
        if (!loc.is_object() || !loc.contains("file") || !loc.contains("line") ||
            !loc.contains("col") || !loc["file"].is_string() ||
            !loc["line"].is_number_integer() || !loc["col"].is_number_integer()) {
            record_error(origin, line_no, "bad location object");
        }
        if (!j["hole"].is_string() || !j["surrounding"].is_string() ||
            !j["repo_contexts"].is_array()) {
            record_error(origin, line_no, "bad field types");
        }
        HoleRecord record;
        record.location.file = loc["file"].get<std::string>();
        record.location.line = loc["line"].get<int64_t>();
        record.location.col = loc["col"].get<int64_t>();
        record.hole = j["hole"].get<std::string>();
        record.surrounding = j["surrounding"].get<std::string>();
        for (const auto& rc : j["repo_contexts"]) {
            if (!rc.is_string()) {
                record_error(origin, line_no, "repo_contexts entries must be strings");
            }
            record.repo_contexts.push_back(rc.get<std::string>());
        }
        records.push_back(std::move(record));
    }
    return records;
}

void write_records_file(const std::filesystem::path& path,
                        const std::vector<HoleRecord>& records) {
    write_file(path, serialize_records(records));
}

std::vector<HoleRecord> read_records_file(const std::filesystem::path& path) {
    return parse_records(read_file(path), path.string());
}

void copy_repo_sources(const RepoIndex& index, const std::filesystem::path& out_dir) {
    for (const auto& [rel, file] : index.files) {
        write_file(out_dir / rel, file.source.content);
    }
}

std::vector<RepoRecords> read_split(const std::filesystem::path& split_dir, ContextKind kind) {
    if (!std::filesystem::is_directory(split_dir)) {
        throw DataError("split directory missing: " + split_dir.string());
    }
    std::vector<std::string> repo_ids;
    for (const auto& entry : std::filesystem::directory_iterator(split_dir)) {
        if (entry.is_directory()) {
            repo_ids.push_back(entry.path().filename().string());
        }
    }
    std::sort(repo_ids.begin(), repo_ids.end());

    std::vector<RepoRecords> out;
    for (const std::string& repo_id : repo_ids) {
        std::filesystem::path file = split_dir / repo_id / kind_filename(kind);
        if (!std::filesystem::exists(file)) {
            continue;
        }
        out.push_back(RepoRecords{repo_id, read_records_file(file)});
    }
    return out;
}

std::vector<HoleRecord> read_dataset(const std::filesystem::path& split_dir, ContextKind kind) {
    std::vector<HoleRecord> out;
    for (RepoRecords& repo : read_split(split_dir, kind)) {
        for (HoleRecord& record : repo.records) {
            out.push_back(std::move(record));
        }
    }
    return out;
}

namespace {

SplitStats stats_for_split(const std::filesystem::path& split_dir) {
    SplitStats stats;
    if (!std::filesystem::is_directory(split_dir)) {
        stats.missing = true;
        return stats;
    }
    std::vector<std::filesystem::path> repos;
    for (const auto& entry : std::filesystem::directory_iterator(split_dir)) {
        if (entry.is_directory()) {
            repos.push_back(entry.path());
        }
    }
    std::sort(repos.begin(), repos.end());
    stats.n_repos = repos.size();
    for (const auto& repo : repos) {
        for (auto it = std::filesystem::recursive_directory_iterator(repo);
             it != std::filesystem::recursive_directory_iterator(); ++it) {
            if (it->is_regular_file() && it->path().extension() == ".java") {
                ++stats.n_files;
            }
        }
        // Holes are identical across context kinds; count the first present.
        for (ContextKind kind : {ContextKind::PP, ContextKind::BM25, ContextKind::RandomNN}) {
            std::filesystem::path file = repo / kind_filename(kind);
            if (!std::filesystem::exists(file)) {
                continue;
            }
            std::string content = read_file(file);
            for (char c : content) {
                if (c == '\n') {
                    ++stats.n_holes;
                }
            }
            break;
        }
    }
    return stats;
}

}  // namespace

CorpusStats dataset_stats(const std::filesystem::path& dataset_root) {
    CorpusStats stats;
    stats.train = stats_for_split(dataset_root / "train");
    stats.val = stats_for_split(dataset_root / "val");
    stats.test = stats_for_split(dataset_root / "test");
    return stats;
}

}  // namespace repofid
