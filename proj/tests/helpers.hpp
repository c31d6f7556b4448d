#pragma once

#include <cstdlib>
#include <filesystem>
#include <string>
#include <vector>

#include "repofid/util.hpp"

namespace repofid::testing {

inline std::filesystem::path fixture_dir() {
    return std::filesystem::path(REPOFID_FIXTURE_DIR);
}

inline std::filesystem::path mini_corpus_dir() {
    return fixture_dir() / "mini_corpus";
}

// Fresh scratch directory under the build tree; wiped on construction.
class TempDir {
  public:
    explicit TempDir(const std::string& name) {
        path_ = std::filesystem::temp_directory_path() / "repofid_tests" / name;
        std::filesystem::remove_all(path_);
        std::filesystem::create_directories(path_);
    }
    const std::filesystem::path& path() const { return path_; }

  private:
    std::filesystem::path path_;
};

// Order-independent content hash of a directory tree (paths + bytes).
inline uint64_t hash_tree(const std::filesystem::path& root) {
    std::vector<std::string> rels;
    for (auto it = std::filesystem::recursive_directory_iterator(root);
         it != std::filesystem::recursive_directory_iterator(); ++it) {
        if (it->is_regular_file()) {
            rels.push_back(std::filesystem::relative(it->path(), root).generic_string());
        }
    }
    std::sort(rels.begin(), rels.end());
    uint64_t hash = 0xcbf29ce484222325ull;
    for (const std::string& rel : rels) {
        hash = hash * 0x100000001b3ull ^ fnv1a64(rel);
        hash = hash * 0x100000001b3ull ^ fnv1a64(read_file(root / rel));
    }
    return hash;
}

}  // namespace repofid::testing
