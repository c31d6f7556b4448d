#include "repofid/repo_model.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <unordered_set>

#include "repofid/parallel.hpp"
#include "repofid/tokenize.hpp"
#include "repofid/util.hpp"

namespace repofid {

SourceFile SourceFile::make(std::string repo_id, std::string rel_path, std::string content) {
    SourceFile file;
    file.repo_id = std::move(repo_id);
    file.rel_path = std::move(rel_path);
    file.content = std::move(content);
    size_t start = 0;
    const std::string& text = file.content;
    while (start < text.size()) {
        size_t nl = text.find('\n', start);
        size_t end = (nl == std::string::npos) ? text.size() : nl + 1;
        file.line_spans.emplace_back(start, end);
        start = end;
    }
    return file;
}

std::string_view SourceFile::line_text(size_t i) const {
    auto [begin, end] = line_spans.at(i);
    if (end > begin && content[end - 1] == '\n') {
        --end;
    }
    return std::string_view(content).substr(begin, end - begin);
}

std::string_view SourceFile::line_raw(size_t i) const {
    auto [begin, end] = line_spans.at(i);
    return std::string_view(content).substr(begin, end - begin);
}

const IndexedFile& RepoIndex::at(const std::string& rel_path) const {
    auto it = files.find(rel_path);
    if (it == files.end()) {
        throw DataError("file not in index: " + rel_path);
    }
    return it->second;
}

namespace {

bool is_word_start(unsigned char c) {
    return std::isalpha(c) || c == '_' || c == '$' || c >= 0x80;
}

bool is_word_char(unsigned char c) {
    return std::isalnum(c) || c == '_' || c == '$' || c >= 0x80;
}

const std::unordered_set<std::string>& java_keywords() {
    static const std::unordered_set<std::string> kw = {
        "abstract", "assert", "boolean", "break", "byte", "case", "catch", "char",
        "class", "const", "continue", "default", "do", "double", "else", "enum",
        "extends", "final", "finally", "float", "for", "goto", "if", "implements",
        "import", "instanceof", "int", "interface", "long", "native", "new",
        "package", "private", "protected", "public", "return", "short", "static",
        "strictfp", "super", "switch", "synchronized", "this", "throw", "throws",
        "transient", "try", "void", "volatile", "while", "true", "false", "null",
        "var", "record", "sealed", "permits", "yield",
    };
    return kw;
}

const std::unordered_set<std::string>& control_keywords() {
    static const std::unordered_set<std::string> kw = {
        "if", "while", "for", "switch", "catch", "synchronized", "return",
        "new", "do", "else", "try", "assert", "throw",
    };
    return kw;
}

enum class EvKind : uint8_t { Word, Punct, StringLit, CharLit };

struct Event {
    EvKind kind;
    size_t pos;
    size_t end;
    std::string_view text;  // word text or literal content without quotes
};

struct LexResult {
    std::vector<Event> events;        // only up to the facts byte limit
    std::vector<LineMask> line_mask;  // whole file
    std::vector<int> line_depth;      // brace depth at each line start
    bool truncated = false;
};

// One pass over the file. Comment/literal state spans the whole file so the
// line mask stays correct beyond the facts limit; events stop at the limit.
LexResult lex(std::string_view content, const std::vector<std::pair<size_t, size_t>>& line_spans,
              size_t limit) {
    LexResult result;
    result.truncated = content.size() > limit;
    result.line_mask.assign(line_spans.size(), LineMask::Blank);
    result.line_depth.assign(line_spans.size(), 0);

    size_t line = 0;
    std::vector<uint8_t> has_code(line_spans.size(), 0);
    std::vector<uint8_t> has_line_comment(line_spans.size(), 0);
    std::vector<uint8_t> has_block_comment(line_spans.size(), 0);

    int depth = 0;
    enum class Mode { Normal, LineComment, BlockComment, Str, Chr };
    Mode mode = Mode::Normal;

    auto line_of = [&](size_t pos) {
        while (line + 1 < line_spans.size() && pos >= line_spans[line].second) {
            ++line;
        }
        return line;
    };

    size_t i = 0;
    size_t n = content.size();
    if (!line_spans.empty()) {
        result.line_depth[0] = 0;
    }
    while (i < n) {
        size_t cur = line_of(i);
        if (i == line_spans[cur].first) {
            result.line_depth[cur] = depth;
        }
        char c = content[i];
        switch (mode) {
            case Mode::LineComment:
                if (c == '\n') {
                    mode = Mode::Normal;
                } else if (!std::isspace(static_cast<unsigned char>(c))) {
                    has_line_comment[cur] = 1;
                }
                ++i;
                break;
            case Mode::BlockComment:
                if (c == '*' && i + 1 < n && content[i + 1] == '/') {
                    has_block_comment[cur] = 1;
                    mode = Mode::Normal;
                    i += 2;
                } else {
                    if (!std::isspace(static_cast<unsigned char>(c))) {
                        has_block_comment[cur] = 1;
                    }
                    ++i;
                }
                break;
            case Mode::Str:
            case Mode::Chr: {
                if (c == '\n') {
                    // literals do not span lines; recover
                    mode = Mode::Normal;
                    ++i;
                    break;
                }
                has_code[cur] = 1;
                if (c == '\\' && i + 1 < n) {
                    i += 2;
                    break;
                }
                if ((mode == Mode::Str && c == '"') || (mode == Mode::Chr && c == '\'')) {
                    mode = Mode::Normal;
                }
                ++i;
                break;
            }
            case Mode::Normal: {
                if (c == '/' && i + 1 < n && content[i + 1] == '/') {
                    has_line_comment[cur] = 1;
                    mode = Mode::LineComment;
                    i += 2;
                    break;
                }
                if (c == '/' && i + 1 < n && content[i + 1] == '*') {
                    has_block_comment[cur] = 1;
                    mode = Mode::BlockComment;
                    i += 2;
                    break;
                }
                if (c == '"') {
                    has_code[cur] = 1;
                    size_t lit_start = i + 1;
                    size_t j = i + 1;
                    while (j < n && content[j] != '"' && content[j] != '\n') {
                        has_code[line_of(j)] = 1;
                        if (content[j] == '\\' && j + 1 < n && content[j + 1] != '\n') {
                            j += 2;
                        } else {
                            ++j;
                        }
                    }
                    size_t lit_end = j;
                    if (j < n && content[j] == '"') {
                        has_code[line_of(j)] = 1;
                        ++j;
                    }
                    if (i < limit) {
                        result.events.push_back(
                            {EvKind::StringLit, i, j, content.substr(lit_start, lit_end - lit_start)});
                    }
                    i = j;
                    break;
                }
                if (c == '\'') {
                    has_code[cur] = 1;
                    size_t j = i + 1;
                    while (j < n && content[j] != '\'' && content[j] != '\n') {
                        has_code[line_of(j)] = 1;
                        if (content[j] == '\\' && j + 1 < n && content[j + 1] != '\n') {
                            j += 2;
                        } else {
                            ++j;
                        }
                    }
                    if (j < n && content[j] == '\'') {
                        has_code[line_of(j)] = 1;
                        ++j;
                    }
                    if (i < limit) {
                        result.events.push_back({EvKind::CharLit, i, j, content.substr(i, j - i)});
                    }
                    i = j;
                    break;
                }
                if (is_word_start(static_cast<unsigned char>(c))) {
                    size_t j = i + 1;
                    while (j < n && is_word_char(static_cast<unsigned char>(content[j]))) {
                        ++j;
                    }
                    has_code[cur] = 1;
                    has_code[line_of(j - 1)] = 1;
                    if (i < limit) {
                        result.events.push_back({EvKind::Word, i, j, content.substr(i, j - i)});
                    }
                    i = j;
                    break;
                }
                if (!std::isspace(static_cast<unsigned char>(c))) {
                    has_code[cur] = 1;
                    if (c == '{') {
                        ++depth;
                    } else if (c == '}') {
                        depth = std::max(0, depth - 1);
                    }
                    if (i < limit) {
                        result.events.push_back({EvKind::Punct, i, i + 1, content.substr(i, 1)});
                    }
                }
                ++i;
                break;
            }
        }
    }

    for (size_t l = 0; l < line_spans.size(); ++l) {
        if (has_code[l]) {
            result.line_mask[l] = LineMask::Code;
        } else if (has_block_comment[l]) {
            result.line_mask[l] = LineMask::BlockComment;
        } else if (has_line_comment[l]) {
            result.line_mask[l] = LineMask::LineComment;
        } else {
            result.line_mask[l] = LineMask::Blank;
        }
    }
    return result;
}

size_t line_of_pos(const std::vector<std::pair<size_t, size_t>>& spans, size_t pos) {
    size_t lo = 0;
    size_t hi = spans.size();
    while (lo + 1 < hi) {
        size_t mid = (lo + hi) / 2;
        if (spans[mid].first <= pos) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return lo;
}

bool punct_is(const Event& ev, char c) {
    return ev.kind == EvKind::Punct && ev.text.size() == 1 && ev.text[0] == c;
}

// Collects a dotted name chain starting at event index i (a Word); returns
// the joined chain and advances i past it. A trailing ".*" is kept.
std::string read_dotted(const std::vector<Event>& events, size_t& i) {
    std::string out;
    bool expect_segment = true;
    while (i < events.size()) {
        const Event& ev = events[i];
        if (expect_segment && ev.kind == EvKind::Word) {
            out.append(ev.text);
            expect_segment = false;
            ++i;
        } else if (expect_segment && punct_is(ev, '*')) {
            out.push_back('*');
            expect_segment = false;
            ++i;
        } else if (!expect_segment && punct_is(ev, '.')) {
            out.push_back('.');
            expect_segment = true;
            ++i;
        } else {
            break;
        }
    }
    return out;
}

}  // namespace

JavaLiteFacts analyze_file(const SourceFile& file, const AnalyzeOptions& options) {
    JavaLiteFacts facts;
    LexResult lexed = lex(file.content, file.line_spans, options.max_facts_bytes);
    facts.line_mask = std::move(lexed.line_mask);
    facts.facts_truncated = lexed.truncated;
    const std::vector<Event>& events = lexed.events;

    std::unordered_set<std::string> seen_identifiers;
    std::unordered_set<std::string> seen_literals;

    for (size_t i = 0; i < events.size(); ++i) {
        const Event& ev = events[i];
        if (ev.kind == EvKind::StringLit) {
            std::string text(ev.text);
            if (seen_literals.insert(text).second) {
                facts.string_literals.push_back(std::move(text));
            }
            continue;
        }
        if (ev.kind != EvKind::Word) {
            continue;
        }
        std::string word(ev.text);
        if (word == "package" && !facts.package_name.has_value()) {
            size_t j = i + 1;
            std::string name = read_dotted(events, j);
            if (!name.empty()) {
                facts.package_name = name;
            }
            continue;
        }
        if (word == "import") {
            size_t j = i + 1;
            if (j < events.size() && events[j].kind == EvKind::Word && events[j].text == "static") {
                ++j;
            }
            std::string name = read_dotted(events, j);
            if (!name.empty()) {
                facts.imports.push_back(name);
            }
            continue;
        }
        if (word == "class" || word == "interface" || word == "enum" || word == "record") {
            if (i + 1 < events.size() && events[i + 1].kind == EvKind::Word) {
                facts.class_names.emplace_back(events[i + 1].text);
            }
            continue;
        }
        if (word == "extends") {
            int angle = 0;
            std::string current;
            std::set<std::string> present(facts.extends_names.begin(), facts.extends_names.end());
            auto flush = [&]() {
                if (!current.empty() && present.insert(current).second) {
                    facts.extends_names.push_back(current);
                }
                current.clear();
            };
            for (size_t j = i + 1; j < events.size(); ++j) {
                const Event& e2 = events[j];
                if (punct_is(e2, '<')) {
                    ++angle;
                    continue;
                }
                if (punct_is(e2, '>')) {
                    angle = std::max(0, angle - 1);
                    continue;
                }
                if (angle > 0) {
                    continue;
                }
                if (e2.kind == EvKind::Word) {
                    if (e2.text == "implements" || e2.text == "permits") {
                        break;
                    }
                    current = std::string(e2.text);  // last dotted segment wins
                    continue;
                }
                if (punct_is(e2, '.')) {
                    continue;
                }
                if (punct_is(e2, ',')) {
                    flush();
                    continue;
                }
                break;  // '{' or anything else ends the clause
            }
            flush();
            continue;
        }
        if (!java_keywords().count(word)) {
            if (seen_identifiers.insert(word).second) {
                facts.identifiers.push_back(word);
            }
        }
    }

    // Method detection: word '(' ... ')' [words , .]* '{'
    for (size_t i = 0; i < events.size(); ++i) {
        if (events[i].kind != EvKind::Word) {
            continue;
        }
        std::string name(events[i].text);
        if (java_keywords().count(name) != 0 || control_keywords().count(name) != 0) {
            continue;
        }
        if (i > 0 && events[i - 1].kind == EvKind::Word && events[i - 1].text == "new") {
            continue;
        }
        if (i + 1 >= events.size() || !punct_is(events[i + 1], '(')) {
            continue;
        }
        size_t j = i + 1;
        int paren = 0;
        bool closed = false;
        for (; j < events.size(); ++j) {
            if (punct_is(events[j], '(')) {
                ++paren;
            } else if (punct_is(events[j], ')')) {
                --paren;
                if (paren == 0) {
                    closed = true;
                    ++j;
                    break;
                }
            }
        }
        if (!closed) {
            continue;
        }
        bool is_method = false;
        size_t brace_idx = 0;
        for (; j < events.size(); ++j) {
            const Event& e2 = events[j];
            if (punct_is(e2, '{')) {
                is_method = true;
                brace_idx = j;
                break;
            }
            bool allowed = e2.kind == EvKind::Word || punct_is(e2, ',') || punct_is(e2, '.');
            if (!allowed) {
                break;
            }
        }
        if (!is_method) {
            continue;
        }
        MethodSpan span;
        span.name = name;
        span.sig_line_begin = line_of_pos(file.line_spans, events[i].pos);
        span.sig_line_end = line_of_pos(file.line_spans, events[brace_idx].pos);
        span.body_begin = events[brace_idx].pos;
        int depth = 0;
        size_t body_end = 0;
        bool matched = false;
        for (size_t k = brace_idx; k < events.size(); ++k) {
            if (punct_is(events[k], '{')) {
                ++depth;
            } else if (punct_is(events[k], '}')) {
                --depth;
                if (depth == 0) {
                    body_end = events[k].end;
                    matched = true;
                    break;
                }
            }
        }
        if (!matched) {
            span.body_end = std::min(file.content.size(), options.max_facts_bytes);
            span.body_truncated = true;
            facts.unbalanced_braces = true;
        } else {
            span.body_end = body_end;
        }
        facts.methods.push_back(std::move(span));
    }

    // Field declarations: code lines inside a class body, outside every
    // method span, that end with ';'.
    size_t scan_lines = facts.line_mask.size();
    for (size_t l = 0; l < scan_lines; ++l) {
        if (facts.line_mask[l] != LineMask::Code) {
            continue;
        }
        size_t lb = file.line_spans[l].first;
        if (lb >= options.max_facts_bytes) {
            break;
        }
        if (lexed.line_depth[l] < 1) {
            continue;
        }
        bool covered = false;
        for (const MethodSpan& m : facts.methods) {
            bool in_body = lb >= m.body_begin && lb < m.body_end;
            bool in_sig = l >= m.sig_line_begin && l <= m.sig_line_end;
            if (in_body || in_sig) {
                covered = true;
                break;
            }
        }
        if (covered) {
            continue;
        }
        std::string_view text = rstrip(file.line_text(l));
        if (text.empty() || text.back() != ';') {
            continue;
        }
        auto tokens = delimiter_tokenize(text);
        if (tokens.empty()) {
            continue;
        }
        std::string first(tokens[0].text);
        static const std::unordered_set<std::string> excluded = {
            "import", "package", "return", "throw", "break", "continue", "assert",
            "case", "default", "super", "this",
        };
        if (excluded.count(first)) {
            continue;
        }
        size_t words = 0;
        bool has_assign = false;
        for (const LineToken& tok : tokens) {
            if (!tok.text.empty() && is_word_start(static_cast<unsigned char>(tok.text[0]))) {
                ++words;
            }
            if (tok.text.find('=') != std::string_view::npos) {
                has_assign = true;
            }
        }
        if (words >= 2 || has_assign) {
            facts.field_declaration_lines.push_back(l);
        }
    }

    return facts;
}

std::vector<std::string> filename_tokens(std::string_view stem) {
    std::vector<std::string> tokens;
    std::string current;
    auto flush = [&]() {
        if (!current.empty()) {
            tokens.push_back(current);
            current.clear();
        }
    };
    size_t n = stem.size();
    for (size_t i = 0; i < n; ++i) {
        unsigned char c = static_cast<unsigned char>(stem[i]);
        if (!std::isalpha(c)) {
            flush();  // digits, underscores and anything else separate tokens
            continue;
        }
        if (std::isupper(c)) {
            bool prev_lower = i > 0 && std::islower(static_cast<unsigned char>(stem[i - 1]));
            bool prev_upper = i > 0 && std::isupper(static_cast<unsigned char>(stem[i - 1]));
            bool next_lower = i + 1 < n && std::islower(static_cast<unsigned char>(stem[i + 1]));
            if (prev_lower || (prev_upper && next_lower)) {
                flush();
            }
        }
        current.push_back(static_cast<char>(std::tolower(c)));
    }
    flush();
    return tokens;
}

namespace {

std::string parent_dir_of(const std::string& rel_path) {
    size_t slash = rel_path.rfind('/');
    return slash == std::string::npos ? std::string() : rel_path.substr(0, slash);
}

std::string stem_of(const std::string& rel_path) {
    size_t slash = rel_path.rfind('/');
    std::string name = slash == std::string::npos ? rel_path : rel_path.substr(slash + 1);
    size_t dot = name.rfind('.');
    return dot == std::string::npos ? name : name.substr(0, dot);
}

std::vector<std::string> sorted_unique(std::vector<std::string> items) {
    std::sort(items.begin(), items.end());
    items.erase(std::unique(items.begin(), items.end()), items.end());
    return items;
}

}  // namespace

std::vector<std::string> resolve_imports(const RepoIndex& index, const std::string& rel_path) {
    const IndexedFile& file = index.at(rel_path);
    std::vector<std::string> out;
    for (const std::string& imp : file.facts.imports) {
        if (imp.size() > 2 && imp.compare(imp.size() - 2, 2, ".*") == 0) {
            std::string pkg = imp.substr(0, imp.size() - 2);
            std::replace(pkg.begin(), pkg.end(), '.', '/');
            for (const auto& [dir, members] : index.dir_index) {
                bool match = dir == pkg ||
                             (dir.size() > pkg.size() &&
                              dir.compare(dir.size() - pkg.size() - 1, pkg.size() + 1, "/" + pkg) == 0);
                if (!match) {
                    continue;
                }
                for (const std::string& member : members) {
                    if (member != rel_path) {
                        out.push_back(member);
                    }
                }
            }
            continue;
        }
        std::string suffix = imp;
        std::replace(suffix.begin(), suffix.end(), '.', '/');
        suffix += ".java";
        std::vector<std::string> qualified;
        for (const auto& [path, _] : index.files) {
            bool match = path == suffix ||
                         (path.size() > suffix.size() &&
                          path.compare(path.size() - suffix.size() - 1, suffix.size() + 1, "/" + suffix) == 0);
            if (match && path != rel_path) {
                qualified.push_back(path);
            }
        }
        if (qualified.empty()) {
            size_t dot = imp.rfind('.');
            std::string simple = dot == std::string::npos ? imp : imp.substr(dot + 1);
            auto it = index.stem_index.find(simple);
            if (it != index.stem_index.end()) {
                for (const std::string& path : it->second) {
                    if (path != rel_path) {
                        qualified.push_back(path);
                    }
                }
            }
        }
        out.insert(out.end(), qualified.begin(), qualified.end());
    }
    return sorted_unique(std::move(out));
}

std::vector<std::string> sibling_files(const RepoIndex& index, const std::string& rel_path) {
    index.at(rel_path);
    auto it = index.dir_index.find(parent_dir_of(rel_path));
    std::vector<std::string> out;
    if (it != index.dir_index.end()) {
        for (const std::string& member : it->second) {
            if (member != rel_path) {
                out.push_back(member);
            }
        }
    }
    return out;  // dir_index members are already sorted
}

std::vector<std::string> similar_name_files(const RepoIndex& index, const std::string& rel_path) {
    index.at(rel_path);
    std::vector<std::string> out;
    for (const std::string& token : filename_tokens(stem_of(rel_path))) {
        auto it = index.name_token_index.find(token);
        if (it == index.name_token_index.end()) {
            continue;
        }
        for (const std::string& member : it->second) {
            if (member != rel_path) {
                out.push_back(member);
            }
        }
    }
    return sorted_unique(std::move(out));
}

std::vector<std::string> parent_class_files(const RepoIndex& index, const std::string& rel_path) {
    const IndexedFile& file = index.at(rel_path);
    std::vector<std::string> out;
    for (const std::string& parent : file.facts.extends_names) {
        auto it = index.stem_index.find(parent);
        if (it == index.stem_index.end()) {
            continue;
        }
        for (const std::string& member : it->second) {
            if (member == rel_path) {
                continue;
            }
            if (std::find(out.begin(), out.end(), member) == out.end()) {
                out.push_back(member);
            }
        }
    }
    return out;
}

RepoIndex scan_repo(const std::filesystem::path& root, const ScanOptions& options) {
    std::error_code ec;
    if (!std::filesystem::is_directory(root, ec)) {
        throw DataError("not a readable directory: " + root.string());
    }
    RepoIndex index;
    index.root = root;
    index.repo_id = options.repo_id.empty() ? root.filename().string() : options.repo_id;
    if (index.repo_id.empty()) {
        index.repo_id = root.parent_path().filename().string();
    }

    std::vector<std::string> rel_paths;
    for (auto it = std::filesystem::recursive_directory_iterator(
             root, std::filesystem::directory_options::skip_permission_denied);
         it != std::filesystem::recursive_directory_iterator(); ++it) {
        if (!it->is_regular_file()) {
            continue;
        }
        if (it->path().extension() != ".java") {
            continue;
        }
        rel_paths.push_back(std::filesystem::relative(it->path(), root).generic_string());
    }
    std::sort(rel_paths.begin(), rel_paths.end());

    std::vector<SourceFile> sources;
    sources.reserve(rel_paths.size());
    for (const std::string& rel : rel_paths) {
        std::string content = read_file(root / rel);
        if (!is_valid_utf8(content)) {
            index.skipped.push_back(rel);
            continue;
        }
        sources.push_back(SourceFile::make(index.repo_id, rel, std::move(content)));
    }

    std::vector<JavaLiteFacts> all_facts(sources.size());
    AnalyzeOptions analyze_options{options.max_facts_bytes};
    parallel_for(sources.size(), options.jobs,
                 [&](size_t i) { all_facts[i] = analyze_file(sources[i], analyze_options); });

    for (size_t i = 0; i < sources.size(); ++i) {
        std::string rel = sources[i].rel_path;
        index.dir_index[parent_dir_of(rel)].push_back(rel);
        for (const std::string& token : filename_tokens(stem_of(rel))) {
            index.name_token_index[token].push_back(rel);
        }
        index.stem_index[stem_of(rel)].push_back(rel);
        index.files.emplace(rel, IndexedFile{std::move(sources[i]), std::move(all_facts[i])});
    }
    for (auto& [_, members] : index.dir_index) {
        std::sort(members.begin(), members.end());
    }
    for (auto& [_, members] : index.name_token_index) {
        members = sorted_unique(std::move(members));
    }
    for (auto& [_, members] : index.stem_index) {
        std::sort(members.begin(), members.end());
    }
    for (const auto& [rel, _] : index.files) {
        index.import_edges[rel] = resolve_imports(index, rel);
    }
    return index;
}

}  // namespace repofid
