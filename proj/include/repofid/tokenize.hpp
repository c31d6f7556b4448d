#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace repofid {

// The code delimiter set used everywhere a line is split into tokens:
//   . ( ) [ ] space { } , : " ;
// Space separates tokens but is dropped; every other delimiter is a
// one-character token of its own.
bool is_delimiter(char c);

struct LineToken {
    std::string_view text;
    size_t offset;  // byte offset within the line
};

// Tokenizes a single line (no '\n' inside). Empty fragments are dropped.
std::vector<LineToken> delimiter_tokenize(std::string_view line);

// Tokens of a multi-line text, newlines excluded. Views into `text`.
std::vector<std::string_view> text_tokens(std::string_view text);

// Token count of a text: per-line delimiter tokens plus one per '\n'.
size_t count_tokens(std::string_view text);

struct TextToken {
    std::string_view text;  // "\n" for newline tokens
    size_t offset;          // byte offset within the text
    bool is_newline;
};

// Full token stream including newline tokens, in byte order. This is the
// stream whose boundaries chunking and truncation respect.
std::vector<TextToken> token_stream(std::string_view text);

// Joins tokens back into source-ish text. Newline tokens become '\n'.
// Spacing follows Java-flavoured rules: no space around most delimiters,
// a space after , ; ) ] } before a word, a space before '{', and a space
// after control keywords before '('. Lossy in general; exact for code
// written in the matching style.
std::string join_tokens(const std::vector<std::string>& tokens);

}  // namespace repofid
