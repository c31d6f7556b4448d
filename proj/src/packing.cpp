#include "repofid/packing.hpp"

#include <algorithm>

#include "repofid/prompt_proposals.hpp"
#include "repofid/tokenize.hpp"
#include "repofid/util.hpp"

namespace repofid {

std::string strategy_name(Strategy strategy) {
    switch (strategy) {
        case Strategy::TRank:
            return "t-rank";
        case Strategy::TRand:
            return "t-rand";
        case Strategy::NtRank:
            return "nt-rank";
        case Strategy::NtPriorLast:
            return "nt-prior-last";
    }
    return "nt-prior-last";
}

std::optional<Strategy> parse_strategy(std::string_view name) {
    std::string flat(name);
    std::replace(flat.begin(), flat.end(), '_', '-');
    if (flat == "t-rank") {
        return Strategy::TRank;
    }
    if (flat == "t-rand") {
        return Strategy::TRand;
    }
    if (flat == "nt-rank") {
        return Strategy::NtRank;
    }
    if (flat == "nt-prior-last") {
        return Strategy::NtPriorLast;
    }
    return std::nullopt;
}

std::vector<std::string> chunk_ppc(std::string_view text, size_t l) {
    std::vector<std::string> chunks;
    if (l == 0) {
        throw UsageError("chunk_ppc: l must be >= 1");
    }
    std::vector<TextToken> tokens = token_stream(text);
    if (tokens.empty()) {
        return chunks;
    }
    for (size_t first = 0; first < tokens.size(); first += l) {
        size_t begin = (first == 0) ? 0 : tokens[first].offset;
        size_t next = first + l;
        size_t end = (next < tokens.size()) ? tokens[next].offset : text.size();
        chunks.emplace_back(text.substr(begin, end - begin));
    }
    return chunks;
}

std::string truncate_tokens(std::string_view text, size_t l) {
    if (l == 0) {
        throw UsageError("truncate_tokens: l must be >= 1");
    }
    std::vector<TextToken> tokens = token_stream(text);
    if (tokens.size() <= l) {
        return std::string(text);
    }
    return std::string(text.substr(0, tokens[l].offset));
}

std::string format_rc(std::string_view ppc_name, std::string_view chunk,
                      std::string_view surrounding, bool include_surrounding) {
    std::string out;
    out.reserve(chunk.size() + surrounding.size() + 48);
    out.append("rule_name: ");
    out.append(ppc_name);
    out.append("\nrule_context: ");
    out.append(chunk);
    if (include_surrounding) {
        out.append("\nhole_context: ");
        out.append(surrounding);
    }
    return out;
}

namespace {

struct Slot {
    std::string name;
    std::string chunk;
};

void fill_in_rank_order(const std::vector<NamedText>& ranked, const std::string* skip_name,
                        size_t budget, size_t l, std::vector<Slot>& slots) {
    for (const NamedText& ppc : ranked) {
        if (slots.size() >= budget) {
            break;
        }
        if (skip_name != nullptr && ppc.name == *skip_name) {
            continue;
        }
        for (std::string& chunk : chunk_ppc(ppc.text, l)) {
            if (slots.size() >= budget) {
                break;
            }
            slots.push_back(Slot{ppc.name, std::move(chunk)});
        }
    }
}

}  // namespace

PackedExample pack(const TargetHole& hole, const std::vector<NamedText>& ranked,
                   const PackingConfig& config, const NamedText* prior_override) {
    if (config.n_contexts == 0 || config.context_len == 0) {
        throw UsageError("pack: N and l must be >= 1");
    }
    const size_t n = config.n_contexts;
    const size_t l = config.context_len;

    std::vector<Slot> slots;

    if (config.repeat_single.has_value()) {
        const std::string& wanted = *config.repeat_single;
        const NamedText* found = nullptr;
        if (prior_override != nullptr && prior_override->name == wanted) {
            found = prior_override;
        }
        for (const NamedText& ppc : ranked) {
            if (ppc.name == wanted) {
                found = &ppc;
                break;
            }
        }
        if (found == nullptr) {
            throw UsageError("repeat_single: unknown context name: " + wanted);
        }
        std::vector<std::string> chunks = chunk_ppc(found->text, l);
        if (!chunks.empty()) {
            for (size_t i = 0; i < n; ++i) {
                slots.push_back(Slot{found->name, chunks[i % chunks.size()]});
            }
        }
    } else {
        switch (config.strategy) {
            case Strategy::TRank:
            case Strategy::TRand: {
                for (const NamedText& ppc : ranked) {
                    if (slots.size() >= n) {
                        break;
                    }
                    if (count_tokens(ppc.text) == 0) {
                        continue;  // empty contexts are skipped, not emitted
                    }
                    slots.push_back(Slot{ppc.name, truncate_tokens(ppc.text, l)});
                }
                break;
            }
            case Strategy::NtRank: {
                fill_in_rank_order(ranked, nullptr, n, l, slots);
                break;
            }
            case Strategy::NtPriorLast: {
                const NamedText* prior = prior_override;
                if (prior == nullptr) {
                    for (const NamedText& ppc : ranked) {
                        if (ppc.name == kPriorName) {
                            prior = &ppc;
                            break;
                        }
                    }
                }
                std::vector<std::string> prior_chunks;
                if (prior != nullptr) {
                    prior_chunks = chunk_ppc(prior->text, l);
                }
                if (prior_chunks.size() >= n) {
                    // Keep the prior's last chunks, the ones nearest the hole.
                    for (size_t i = prior_chunks.size() - n; i < prior_chunks.size(); ++i) {
                        slots.push_back(Slot{std::string(kPriorName), prior_chunks[i]});
                    }
                } else {
                    size_t reserve = prior_chunks.size();
                    std::string prior_name = prior != nullptr ? prior->name : std::string(kPriorName);
                    fill_in_rank_order(ranked, &prior_name, n - reserve, l, slots);
                    while (slots.size() < n - reserve) {
                        slots.push_back(Slot{std::string(kPadName), std::string()});
                    }
                    for (std::string& chunk : prior_chunks) {
                        slots.push_back(Slot{prior_name, std::move(chunk)});
                    }
                }
                break;
            }
        }
    }

    while (slots.size() < n) {
        slots.push_back(Slot{std::string(kPadName), std::string()});
    }

    if (!config.repeat_single.has_value() && config.strategy == Strategy::TRand) {
        Rng rng(mix_seed(config.seed, fnv1a64(hole.rel_path) ^ (hole.line_idx * 2654435761ull) ^
                                          hole.char_start));
        rng.shuffle(slots);
    }

    PackedExample example;
    example.repo_id = hole.repo_id;
    example.rel_path = hole.rel_path;
    example.line_idx = hole.line_idx;
    example.char_start = hole.char_start;
    example.target = hole.hole_str;
    example.surrounding = hole.surrounding;
    example.rcs.reserve(n);
    for (size_t i = 0; i < n; ++i) {
        RepoContext rc;
        rc.slot_index = i;
        rc.ppc_name = std::move(slots[i].name);
        rc.chunk_text = std::move(slots[i].chunk);
        rc.chunk_token_count = count_tokens(rc.chunk_text);
        rc.formatted_text =
            format_rc(rc.ppc_name, rc.chunk_text, hole.surrounding, config.include_surrounding);
        example.rcs.push_back(std::move(rc));
    }
    return example;
}

}  // namespace repofid
