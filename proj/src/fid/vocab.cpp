#include "repofid/fid/vocab.hpp"

#include <algorithm>
#include <map>

#include "repofid/tokenize.hpp"
#include "repofid/util.hpp"

namespace repofid::fid {

Vocab Vocab::build(const std::vector<std::string>& corpus) {
    std::map<std::string, size_t> counts;
    for (const std::string& text : corpus) {
        for (std::string_view token : text_tokens(text)) {
            ++counts[std::string(token)];
        }
    }
    std::vector<std::pair<std::string, size_t>> ordered(counts.begin(), counts.end());
    std::sort(ordered.begin(), ordered.end(), [](const auto& a, const auto& b) {
        if (a.second != b.second) {
            return a.second > b.second;
        }
        return a.first < b.first;
    });

    std::vector<std::string> tokens = {"<pad>", "<bos>", "<eos>", "\n", "<unk>"};
    for (auto& [token, _] : ordered) {
        tokens.push_back(std::move(token));
    }
    return from_tokens(std::move(tokens));
}

Vocab Vocab::from_tokens(std::vector<std::string> id_to_token) {
    Vocab vocab;
    vocab.id_to_token_ = std::move(id_to_token);
    if (vocab.id_to_token_.size() < 5) {
        throw DataError("vocab must start with the 5 special tokens");
    }
    for (size_t i = 0; i < vocab.id_to_token_.size(); ++i) {
        vocab.token_to_id_.emplace(vocab.id_to_token_[i], static_cast<int>(i));
    }
    return vocab;
}

int Vocab::id_of(std::string_view token) const {
    auto it = token_to_id_.find(std::string(token));
    if (it == token_to_id_.end()) {
        return kUnk;
    }
    return it->second;
}

std::vector<int> Vocab::encode(std::string_view text) const {
    std::vector<int> ids;
    for (const TextToken& token : token_stream(text)) {
        if (token.is_newline) {
            ids.push_back(kNewline);
        } else {
            ids.push_back(id_of(token.text));
        }
    }
    return ids;
}

std::string Vocab::decode(const std::vector<int>& ids) const {
    std::vector<std::string> tokens;
    for (int id : ids) {
        if (id == kNewline) {
            tokens.emplace_back("\n");
        } else if (id == kPad || id == kBos || id == kEos) {
            continue;
        } else if (id >= 0 && static_cast<size_t>(id) < id_to_token_.size()) {
            tokens.push_back(id_to_token_[static_cast<size_t>(id)]);
        }
    }
    return join_tokens(tokens);
}

}  // namespace repofid::fid
