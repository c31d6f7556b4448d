#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "repofid/repo_model.hpp"
#include "repofid/tokenize.hpp"
#include "repofid/util.hpp"

#include "helpers.hpp"

using namespace repofid;

namespace {

std::vector<std::string> token_texts(std::string_view line) {
    std::vector<std::string> out;
    for (const LineToken& tok : delimiter_tokenize(line)) {
        out.emplace_back(tok.text);
    }
    return out;
}

std::vector<size_t> token_offsets(std::string_view line) {
    std::vector<size_t> out;
    for (const LineToken& tok : delimiter_tokenize(line)) {
        out.push_back(tok.offset);
    }
    return out;
}

std::string round_trip(std::string_view text) {
    std::vector<std::string> tokens;
    for (const TextToken& tok : token_stream(text)) {
        tokens.emplace_back(tok.text);
    }
    return join_tokens(tokens);
}

}  // namespace

TEST_CASE("delimiter set splits every delimiter into its own token") {
    CHECK(token_texts("a.b(c)") == std::vector<std::string>{"a", ".", "b", "(", "c", ")"});
    CHECK(token_offsets("a.b(c)") == std::vector<size_t>{0, 1, 2, 3, 4, 5});
}

TEST_CASE("whitespace-only lines have no tokens") {
    CHECK(token_texts("   ").empty());
    CHECK(token_texts("").empty());
}

TEST_CASE("statement tokenization") {
    CHECK(token_texts("user.getName();") ==
          std::vector<std::string>{"user", ".", "getName", "(", ")", ";"});
}

TEST_CASE("spaces drop but other delimiters stay") {
    CHECK(token_texts("x = 1;") == std::vector<std::string>{"x", "=", "1", ";"});
    CHECK(token_offsets("x = 1;") == std::vector<size_t>{0, 2, 4, 5});
}

TEST_CASE("count_tokens counts newlines as tokens") {
    CHECK(count_tokens("") == 0);
    CHECK(count_tokens("a.b") == 3);
    CHECK(count_tokens("x\ny") == 3);
    CHECK(count_tokens("\n\n") == 2);
    CHECK(count_tokens("a b c") == 3);
}

TEST_CASE("token_stream yields byte-ordered tokens including newlines") {
    auto tokens = token_stream("ab c\nd");
    REQUIRE(tokens.size() == 4);
    CHECK(tokens[0].text == "ab");
    CHECK(tokens[0].offset == 0);
    CHECK(tokens[1].text == "c");
    CHECK(tokens[1].offset == 3);
    CHECK(tokens[2].is_newline);
    CHECK(tokens[2].offset == 4);
    CHECK(tokens[3].text == "d");
    CHECK(tokens[3].offset == 5);
}

TEST_CASE("join_tokens restores common Java spacing") {
    CHECK(round_trip("user.getName();") == "user.getName();");
    CHECK(round_trip("int x = 1;") == "int x = 1;");
    CHECK(round_trip("for (int i = 0; i < n; i++) {") == "for (int i = 0; i < n; i++) {");
    CHECK(round_trip("} else {") == "} else {");
    CHECK(round_trip("public static void main(String[] args) {") ==
          "public static void main(String[] args) {");
    CHECK(round_trip("return SCHEME+\"/\"+token;") == "return SCHEME+\"/\"+token;");
    CHECK(round_trip("new Token(TokenType.END,\"\", 0);") == "new Token(TokenType.END,\"\", 0);");
    CHECK(round_trip("slots[filled % slots.length] = sample;") ==
          "slots[filled % slots.length] = sample;");
    CHECK(round_trip("int index = (int)(fraction * last);") ==
          "int index = (int)(fraction * last);");
}

TEST_CASE("every fixture code line and every suffix hole round-trips") {
    // Greedy decoding reproduces hole strings only if the corpus style is
    // reconstructible from tokens; this pins that property for all possible
    // hole positions.
    for (const char* repo : {"billing-core", "parser-kit", "metrics-store"}) {
        RepoIndex index = scan_repo(testing::mini_corpus_dir() / repo);
        for (const auto& [rel, file] : index.files) {
            for (size_t l = 0; l < file.source.line_count(); ++l) {
                if (file.facts.line_mask[l] != LineMask::Code) {
                    continue;
                }
                std::string_view line = file.source.line_text(l);
                for (const LineToken& tok : delimiter_tokenize(line)) {
                    std::string hole(line.substr(tok.offset));
                    INFO(rel << ":" << l << ":" << tok.offset << " -> " << hole);
                    CHECK(round_trip(hole) == std::string(rstrip(hole)));
                }
            }
        }
    }
}
