#pragma once

#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace repofid::fid {

// Delimiter-token vocabulary over a toy corpus. Ids are stable: specials
// first, then corpus tokens by descending frequency, ties lexicographic.
class Vocab {
  public:
    static constexpr int kPad = 0;
    static constexpr int kBos = 1;
    static constexpr int kEos = 2;
    static constexpr int kNewline = 3;
    static constexpr int kUnk = 4;

    static Vocab build(const std::vector<std::string>& corpus);

    size_t size() const { return id_to_token_.size(); }
    int id_of(std::string_view token) const;
    const std::string& token_of(int id) const { return id_to_token_.at(static_cast<size_t>(id)); }

    // Token ids of a text; '\n' becomes kNewline, unseen tokens kUnk.
    std::vector<int> encode(std::string_view text) const;

    // join_tokens over the ids' surface forms; newline ids become '\n',
    // other specials are dropped.
    std::string decode(const std::vector<int>& ids) const;

    const std::vector<std::string>& tokens() const { return id_to_token_; }
    static Vocab from_tokens(std::vector<std::string> id_to_token);

  private:
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, int> token_to_id_;
};

}  // namespace repofid::fid
