#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "repofid/hole_gen.hpp"
#include "repofid/repo_model.hpp"

namespace repofid {

enum class PromptSource { Current, ParentClass, Imports, Sibling, SimilarName };

enum class ContextType {
    PriorLines,
    PostLines,
    MethodNamesAndBodies,
    MethodNames,
    Identifiers,
    StringLiterals,
    FieldDeclarations,
};

struct PromptProposal {
    PromptSource source;
    ContextType type;

    // Canonical "source/context_type" name, e.g. "current/prior_lines".
    std::string name() const;
    static std::optional<PromptProposal> parse(std::string_view name);

    // prior_lines/post_lines combine only with the current file.
    bool valid() const;

    bool operator==(const PromptProposal& other) const {
        return source == other.source && type == other.type;
    }
};

struct Ppc {
    PromptProposal proposal;
    std::string text;  // empty iff the sources contributed nothing
    std::vector<std::string> origin_paths;
};

// File content from byte 0 up to the hole start.
Ppc prior_ppc(const RepoIndex& index, const TargetHole& hole);

// File content from the start of the line after the hole line to EOF.
Ppc post_ppc(const RepoIndex& index, const TargetHole& hole);

// Resolves the proposal's source files and extracts its context type from
// each. Multi-file texts are concatenated in resolver order, each piece
// preceded by a "// file: <rel_path>" line. Current-file extraction never
// includes the hole bytes.
Ppc extract_ppc(const PromptProposal& proposal, const TargetHole& hole, const RepoIndex& index);

// All 27 valid proposals: post, prior, then per source (current,
// similar_name, imports, sibling, parent_class) the body-ish types from
// richest to leanest.
std::vector<PromptProposal> default_ranking();

// One proposal name per line; '#' starts a comment. Unknown names raise a
// UsageError listing every offender.
std::vector<PromptProposal> parse_ranking(std::string_view text);

std::string format_ranking(const std::vector<PromptProposal>& ranking);

inline const char* kPriorName = "current/prior_lines";

}  // namespace repofid
