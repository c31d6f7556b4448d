#include "repofid/tokenize.hpp"

#include <cctype>
#include <unordered_set>

#include "repofid/util.hpp"

namespace repofid {

bool is_delimiter(char c) {
    switch (c) {
        case '.':
        case '(':
        case ')':
        case '[':
        case ']':
        case ' ':
        case '{':
        case '}':
        case ',':
        case ':':
        case '"':
        case ';':
            return true;
        default:
            return false;
    }
}

std::vector<LineToken> delimiter_tokenize(std::string_view line) {
    std::vector<LineToken> tokens;
    size_t frag_start = 0;
    bool in_frag = false;
    for (size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (is_delimiter(c)) {
            if (in_frag) {
                tokens.push_back({line.substr(frag_start, i - frag_start), frag_start});
                in_frag = false;
            }
            if (c != ' ') {
                tokens.push_back({line.substr(i, 1), i});
            }
        } else if (!in_frag) {
            frag_start = i;
            in_frag = true;
        }
    }
    if (in_frag) {
        tokens.push_back({line.substr(frag_start), frag_start});
    }
    return tokens;
}

std::vector<std::string_view> text_tokens(std::string_view text) {
    std::vector<std::string_view> tokens;
    for (std::string_view line : split_lines(text)) {
        for (const LineToken& tok : delimiter_tokenize(line)) {
            tokens.push_back(tok.text);
        }
    }
    return tokens;
}

size_t count_tokens(std::string_view text) {
    size_t count = 0;
    for (std::string_view line : split_lines(text)) {
        count += delimiter_tokenize(line).size();
    }
    for (char c : text) {
        if (c == '\n') {
            ++count;
        }
    }
    return count;
}

std::vector<TextToken> token_stream(std::string_view text) {
    std::vector<TextToken> tokens;
    size_t line_start = 0;
    while (line_start <= text.size()) {
        size_t nl = text.find('\n', line_start);
        size_t line_end = (nl == std::string_view::npos) ? text.size() : nl;
        std::string_view line = text.substr(line_start, line_end - line_start);
        for (const LineToken& tok : delimiter_tokenize(line)) {
            tokens.push_back({tok.text, line_start + tok.offset, false});
        }
        if (nl == std::string_view::npos) {
            break;
        }
        tokens.push_back({text.substr(nl, 1), nl, true});
        line_start = nl + 1;
    }
    return tokens;
}

namespace {

const std::unordered_set<std::string>& paren_keywords() {
    static const std::unordered_set<std::string> kw = {
        "if", "for", "while", "switch", "catch", "synchronized",
        "return", "assert", "throw", "do", "else", "try",
    };
    return kw;
}

bool is_delim_token(const std::string& tok) {
    return tok.size() == 1 && is_delimiter(tok[0]);
}

// Identifier-, number-, or annotation-shaped (as opposed to an operator).
bool is_word_token(const std::string& tok) {
    if (tok.empty()) {
        return false;
    }
    unsigned char c = static_cast<unsigned char>(tok[0]);
    return std::isalnum(c) || c == '_' || c == '$' || c == '@' || c >= 0x80;
}

bool space_between(const std::string& a, const std::string& b) {
    if (b == "{") {
        // tight after openers (string literals like "{", casts, arrays)
        return !(a == "\"" || a == "(" || a == "[");
    }
    if (b == "(") {
        if (paren_keywords().count(a) > 0) {
            return true;
        }
        // operators bind loosely: "= (", "* ("; calls stay tight: "foo("
        return !is_delim_token(a) && !is_word_token(a);
    }
    if (is_delim_token(b)) {
        return false;
    }
    if (!is_delim_token(a)) {
        return true;
    }
    return a == "," || a == ";" || a == "}" || a == "]" || a == ")";
}

}  // namespace

std::string join_tokens(const std::vector<std::string>& tokens) {
    std::string out;
    const std::string* prev = nullptr;
    for (const std::string& tok : tokens) {
        if (tok == "\n") {
            out.push_back('\n');
            prev = nullptr;
            continue;
        }
        if (prev != nullptr && space_between(*prev, tok)) {
            out.push_back(' ');
        }
        out += tok;
        prev = &tok;
    }
    return out;
}

}  // namespace repofid
