#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repofid/hole_gen.hpp"

namespace repofid {

enum class Strategy { TRank, TRand, NtRank, NtPriorLast };

std::string strategy_name(Strategy strategy);
std::optional<Strategy> parse_strategy(std::string_view name);

struct PackingConfig {
    Strategy strategy = Strategy::NtPriorLast;
    size_t n_contexts = 32;  // N
    size_t context_len = 768;  // l, in delimiter tokens; bounds only the chunk
    bool include_surrounding = true;
    std::optional<std::string> repeat_single;  // repetition ablation
    uint64_t seed = 0;  // used by t_rand
};

struct RepoContext {
    size_t slot_index = 0;
    std::string ppc_name;  // "pad" for padding slots
    std::string chunk_text;
    std::string formatted_text;
    size_t chunk_token_count = 0;
};

struct PackedExample {
    std::string repo_id;
    std::string rel_path;
    size_t line_idx = 0;
    size_t char_start = 0;
    std::string target;  // the hole string
    std::string surrounding;
    std::vector<RepoContext> rcs;  // exactly N
};

struct NamedText {
    std::string name;
    std::string text;
};

// Splits at token boundaries into ceil(L/l) chunks of exactly l tokens each
// except the last. Concatenating the chunks reproduces the text. Zero-token
// text yields zero chunks.
std::vector<std::string> chunk_ppc(std::string_view text, size_t l);

// The text's first l tokens (whole text when shorter).
std::string truncate_tokens(std::string_view text, size_t l);

// "rule_name: <name>\nrule_context: <chunk>\nhole_context: <surrounding>";
// the last segment is dropped when include_surrounding is false.
std::string format_rc(std::string_view ppc_name, std::string_view chunk,
                      std::string_view surrounding, bool include_surrounding);

// Produces exactly N repo contexts from the ranked candidate contexts.
// `prior_override` supplies the prior context when it is not part of
// `ranked` (retrieval-based candidate lists); otherwise the entry named
// "current/prior_lines" is used.
PackedExample pack(const TargetHole& hole, const std::vector<NamedText>& ranked,
                   const PackingConfig& config,
                   const NamedText* prior_override = nullptr);

inline const char* kPadName = "pad";

}  // namespace repofid
