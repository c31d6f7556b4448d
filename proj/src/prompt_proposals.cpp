#include "repofid/prompt_proposals.hpp"

#include <algorithm>

#include "repofid/util.hpp"

namespace repofid {

namespace {

const char* source_name(PromptSource source) {
    switch (source) {
        case PromptSource::Current:
            return "current";
        case PromptSource::ParentClass:
            return "parent_class";
        case PromptSource::Imports:
            return "imports";
        case PromptSource::Sibling:
            return "sibling";
        case PromptSource::SimilarName:
            return "similar_name";
    }
    return "current";
}

const char* type_name(ContextType type) {
    switch (type) {
        case ContextType::PriorLines:
            return "prior_lines";
        case ContextType::PostLines:
            return "post_lines";
        case ContextType::MethodNamesAndBodies:
            return "method_names_and_bodies";
        case ContextType::MethodNames:
            return "method_names";
        case ContextType::Identifiers:
            return "identifiers";
        case ContextType::StringLiterals:
            return "string_literals";
        case ContextType::FieldDeclarations:
            return "field_declarations";
    }
    return "identifiers";
}

const std::vector<PromptSource>& all_sources() {
    static const std::vector<PromptSource> sources = {
        PromptSource::Current, PromptSource::ParentClass, PromptSource::Imports,
        PromptSource::Sibling, PromptSource::SimilarName,
    };
    return sources;
}

const std::vector<ContextType>& all_types() {
    static const std::vector<ContextType> types = {
        ContextType::PriorLines,     ContextType::PostLines,
        ContextType::MethodNamesAndBodies, ContextType::MethodNames,
        ContextType::Identifiers,    ContextType::StringLiterals,
        ContextType::FieldDeclarations,
    };
    return types;
}

size_t hole_start_byte(const SourceFile& file, const TargetHole& hole) {
    if (hole.line_idx >= file.line_count()) {
        throw DataError("hole line out of range in " + hole.rel_path);
    }
    return file.line_spans[hole.line_idx].first + hole.char_start;
}

// End of the hole's bytes: end of its line, excluding the newline.
size_t hole_end_byte(const SourceFile& file, const TargetHole& hole) {
    auto [begin, end] = file.line_spans[hole.line_idx];
    if (end > begin && file.content[end - 1] == '\n') {
        --end;
    }
    return end;
}

// The current file with the hole bytes spliced out; line structure survives
// because the newline is kept.
SourceFile redacted_current(const SourceFile& file, const TargetHole& hole) {
    size_t start = hole_start_byte(file, hole);
    size_t end = hole_end_byte(file, hole);
    std::string content = file.content.substr(0, start) + file.content.substr(end);
    return SourceFile::make(file.repo_id, file.rel_path, std::move(content));
}

std::string join_lines(const SourceFile& file, const std::vector<size_t>& lines) {
    std::string out;
    for (size_t i = 0; i < lines.size(); ++i) {
        if (i > 0) {
            out.push_back('\n');
        }
        out.append(file.line_text(lines[i]));
    }
    return out;
}

std::string extract_from_file(const SourceFile& file, const JavaLiteFacts& facts, ContextType type) {
    switch (type) {
        case ContextType::MethodNamesAndBodies: {
            std::string out;
            for (size_t i = 0; i < facts.methods.size(); ++i) {
                const MethodSpan& m = facts.methods[i];
                if (i > 0) {
                    out.push_back('\n');
                }
                size_t begin = file.line_spans[m.sig_line_begin].first;
                size_t end = std::min(m.body_end, file.content.size());
                out.append(file.content.substr(begin, end - begin));
            }
            return out;
        }
        case ContextType::MethodNames: {
            std::string out;
            for (size_t i = 0; i < facts.methods.size(); ++i) {
                const MethodSpan& m = facts.methods[i];
                if (i > 0) {
                    out.push_back('\n');
                }
                for (size_t l = m.sig_line_begin; l <= m.sig_line_end; ++l) {
                    if (l > m.sig_line_begin) {
                        out.push_back('\n');
                    }
                    out.append(file.line_text(l));
                }
            }
            return out;
        }
        case ContextType::Identifiers: {
            std::string out;
            for (size_t i = 0; i < facts.identifiers.size(); ++i) {
                if (i > 0) {
                    out.push_back(' ');
                }
                out.append(facts.identifiers[i]);
            }
            return out;
        }
        case ContextType::StringLiterals: {
            std::string out;
            for (size_t i = 0; i < facts.string_literals.size(); ++i) {
                if (i > 0) {
                    out.push_back('\n');
                }
                out.append(facts.string_literals[i]);
            }
            return out;
        }
        case ContextType::FieldDeclarations:
            return join_lines(file, facts.field_declaration_lines);
        case ContextType::PriorLines:
        case ContextType::PostLines:
            break;  // handled by the callers
    }
    return std::string();
}

}  // namespace

std::string PromptProposal::name() const {
    return std::string(source_name(source)) + "/" + type_name(type);
}

std::optional<PromptProposal> PromptProposal::parse(std::string_view name) {
    for (PromptSource source : all_sources()) {
        for (ContextType type : all_types()) {
            PromptProposal candidate{source, type};
            if (candidate.valid() && candidate.name() == name) {
                return candidate;
            }
        }
    }
    return std::nullopt;
}

bool PromptProposal::valid() const {
    if (type == ContextType::PriorLines || type == ContextType::PostLines) {
        return source == PromptSource::Current;
    }
    return true;
}

Ppc prior_ppc(const RepoIndex& index, const TargetHole& hole) {
    const IndexedFile& file = index.at(hole.rel_path);
    size_t start = hole_start_byte(file.source, hole);
    Ppc ppc;
    ppc.proposal = {PromptSource::Current, ContextType::PriorLines};
    ppc.text = file.source.content.substr(0, start);
    if (!ppc.text.empty()) {
        ppc.origin_paths.push_back(hole.rel_path);
    }
    return ppc;
}

Ppc post_ppc(const RepoIndex& index, const TargetHole& hole) {
    const IndexedFile& file = index.at(hole.rel_path);
    Ppc ppc;
    ppc.proposal = {PromptSource::Current, ContextType::PostLines};
    if (hole.line_idx + 1 < file.source.line_count()) {
        size_t start = file.source.line_spans[hole.line_idx + 1].first;
        ppc.text = file.source.content.substr(start);
    }
    if (!ppc.text.empty()) {
        ppc.origin_paths.push_back(hole.rel_path);
    }
    return ppc;
}

Ppc extract_ppc(const PromptProposal& proposal, const TargetHole& hole, const RepoIndex& index) {
    if (!proposal.valid()) {
        throw UsageError("invalid prompt proposal: " + proposal.name());
    }
    if (proposal.type == ContextType::PriorLines) {
        return prior_ppc(index, hole);
    }
    if (proposal.type == ContextType::PostLines) {
        return post_ppc(index, hole);
    }

    Ppc ppc;
    ppc.proposal = proposal;

    if (proposal.source == PromptSource::Current) {
        const IndexedFile& file = index.at(hole.rel_path);
        SourceFile redacted = redacted_current(file.source, hole);
        JavaLiteFacts facts = analyze_file(redacted);
        ppc.text = extract_from_file(redacted, facts, proposal.type);
        if (!ppc.text.empty()) {
            ppc.origin_paths.push_back(hole.rel_path);
        }
        return ppc;
    }

    std::vector<std::string> rel_paths;
    switch (proposal.source) {
        case PromptSource::Imports:
            rel_paths = resolve_imports(index, hole.rel_path);
            break;
        case PromptSource::Sibling:
            rel_paths = sibling_files(index, hole.rel_path);
            break;
        case PromptSource::SimilarName:
            rel_paths = similar_name_files(index, hole.rel_path);
            break;
        case PromptSource::ParentClass:
            rel_paths = parent_class_files(index, hole.rel_path);
            break;
        case PromptSource::Current:
            break;
    }

    std::string out;
    for (const std::string& rel : rel_paths) {
        const IndexedFile& file = index.at(rel);
        std::string piece = extract_from_file(file.source, file.facts, proposal.type);
        if (piece.empty()) {
            continue;
        }
        if (!out.empty()) {
            out.push_back('\n');
        }
        out.append("// file: ");
        out.append(rel);
        out.push_back('\n');
        out.append(piece);
        ppc.origin_paths.push_back(rel);
    }
    ppc.text = std::move(out);
    return ppc;
}

std::vector<PromptProposal> default_ranking() {
    std::vector<PromptProposal> ranking;
    ranking.push_back({PromptSource::Current, ContextType::PostLines});
    ranking.push_back({PromptSource::Current, ContextType::PriorLines});
    static const std::vector<ContextType> body_types = {
        ContextType::MethodNamesAndBodies, ContextType::MethodNames,
        ContextType::FieldDeclarations,    ContextType::StringLiterals,
        ContextType::Identifiers,
    };
    static const std::vector<PromptSource> source_order = {
        PromptSource::Current, PromptSource::SimilarName, PromptSource::Imports,
        PromptSource::Sibling, PromptSource::ParentClass,
    };
    for (PromptSource source : source_order) {
        for (ContextType type : body_types) {
            PromptProposal proposal{source, type};
            if (proposal.valid()) {
                ranking.push_back(proposal);
            }
        }
    }
    return ranking;
}

std::vector<PromptProposal> parse_ranking(std::string_view text) {
    std::vector<PromptProposal> ranking;
    std::vector<std::string> unknown;
    for (std::string_view raw : split_lines(text)) {
        size_t hash = raw.find('#');
        std::string_view line = hash == std::string_view::npos ? raw : raw.substr(0, hash);
        while (!line.empty() && (line.front() == ' ' || line.front() == '\t')) {
            line.remove_prefix(1);
        }
        line = rstrip(line);
        if (line.empty()) {
            continue;
        }
        auto parsed = PromptProposal::parse(line);
        if (parsed.has_value()) {
            ranking.push_back(*parsed);
        } else {
            unknown.emplace_back(line);
        }
    }
    if (!unknown.empty()) {
        std::string message = "unknown prompt proposal name(s):";
        for (const std::string& name : unknown) {
            message += " " + name;
        }
        throw UsageError(message);
    }
    return ranking;
}

std::string format_ranking(const std::vector<PromptProposal>& ranking) {
    std::string out;
    for (const PromptProposal& proposal : ranking) {
        out += proposal.name();
        out.push_back('\n');
    }
    return out;
}

}  // namespace repofid
