#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <fstream>

#include <nlohmann/json.hpp>

#include "repofid/repo_model.hpp"
#include "repofid/util.hpp"

#include "helpers.hpp"

using namespace repofid;

namespace {

SourceFile make_file(const std::string& rel, const std::string& content) {
    return SourceFile::make("test-repo", rel, content);
}

nlohmann::json load_manifest() {
    return nlohmann::json::parse(read_file(testing::fixture_dir() / "mini_corpus_manifest.json"));
}

}  // namespace

TEST_CASE("line spans cover the content exactly") {
    SourceFile file = make_file("A.java", "ab\n\ncd");
    REQUIRE(file.line_count() == 3);
    CHECK(file.line_spans[0] == std::pair<size_t, size_t>{0, 3});
    CHECK(file.line_spans[1] == std::pair<size_t, size_t>{3, 4});
    CHECK(file.line_spans[2] == std::pair<size_t, size_t>{4, 6});
    CHECK(file.line_text(0) == "ab");
    CHECK(file.line_text(1) == "");
    CHECK(file.line_text(2) == "cd");

    SourceFile empty = make_file("B.java", "");
    CHECK(empty.line_count() == 0);
}

TEST_CASE("imports, package, and literals are scanned") {
    SourceFile file = make_file("A.java",
                                "package com.foo;\n"
                                "import com.foo.Account;\n"
                                "import static com.foo.Util.helper;\n"
                                "import com.bar.*;\n"
                                "public class A {\n"
                                "    String s = \"hello world\";\n"
                                "}\n");
    JavaLiteFacts facts = analyze_file(file);
    REQUIRE(facts.package_name.has_value());
    CHECK(*facts.package_name == "com.foo");
    CHECK(facts.imports ==
          std::vector<std::string>{"com.foo.Account", "com.foo.Util.helper", "com.bar.*"});
    CHECK(facts.string_literals == std::vector<std::string>{"hello world"});
    CHECK(facts.class_names == std::vector<std::string>{"A"});
}

TEST_CASE("line comments exclude their words from identifiers") {
    SourceFile file = make_file("A.java",
                                "class A {\n"
                                "    // TODO fix\n"
                                "    int count;\n"
                                "}\n");
    JavaLiteFacts facts = analyze_file(file);
    CHECK(facts.line_mask[1] == LineMask::LineComment);
    for (const std::string& id : facts.identifiers) {
        CHECK(id != "TODO");
        CHECK(id != "fix");
    }
    CHECK(facts.field_declaration_lines == std::vector<size_t>{2});
}

TEST_CASE("unclosed block comment masks lines to the end") {
    SourceFile file = make_file("A.java",
                                "int a;\n"
                                "/* open\n"
                                "still inside\n"
                                "more\n");
    JavaLiteFacts facts = analyze_file(file);
    CHECK(facts.line_mask[0] == LineMask::Code);
    CHECK(facts.line_mask[1] == LineMask::BlockComment);
    CHECK(facts.line_mask[2] == LineMask::BlockComment);
    CHECK(facts.line_mask[3] == LineMask::BlockComment);
}

TEST_CASE("block comment closing line and mixed lines") {
    SourceFile file = make_file("A.java",
                                "/* a\n"
                                " */\n"
                                "int x; /* note */ int y;\n");
    JavaLiteFacts facts = analyze_file(file);
    CHECK(facts.line_mask[0] == LineMask::BlockComment);
    CHECK(facts.line_mask[1] == LineMask::BlockComment);
    CHECK(facts.line_mask[2] == LineMask::Code);
}

TEST_CASE("unbalanced braces truncate the method body at EOF") {
    SourceFile file = make_file("A.java",
                                "class A {\n"
                                "    void run() {\n"
                                "        int x = 1;\n");
    JavaLiteFacts facts = analyze_file(file);
    REQUIRE(facts.methods.size() == 1);
    CHECK(facts.methods[0].name == "run");
    CHECK(facts.methods[0].body_truncated);
    CHECK(facts.methods[0].body_end == file.content.size());
    CHECK(facts.unbalanced_braces);
}

TEST_CASE("facts byte limit stops collection but not the line mask") {
    std::string content = "class A {\n";
    for (int i = 0; i < 100; ++i) {
        content += "    int field" + std::to_string(i) + ";\n";
    }
    content += "}\n";
    SourceFile file = make_file("A.java", content);
    AnalyzeOptions options;
    options.max_facts_bytes = 64;
    JavaLiteFacts facts = analyze_file(file, options);
    CHECK(facts.facts_truncated);
    CHECK(facts.line_mask.size() == file.line_count());
    CHECK(facts.identifiers.size() < 100);
    JavaLiteFacts full = analyze_file(file);
    CHECK_FALSE(full.facts_truncated);
    CHECK(full.identifiers.size() > facts.identifiers.size());
}

TEST_CASE("scan filters by extension and skips undecodable files") {
    testing::TempDir dir("scan_filter");
    write_file(dir.path() / "A.java", "class A {}\n");
    write_file(dir.path() / "B.java", "class B {}\n");
    write_file(dir.path() / "sub/C.java", "class C {}\n");
    write_file(dir.path() / "notes.md", "# notes\n");
    write_file(dir.path() / "Bad.java", std::string("class Bad {\xff\xfe}\n"));

    RepoIndex index = scan_repo(dir.path());
    CHECK(index.files.size() == 3);
    CHECK(index.skipped == std::vector<std::string>{"Bad.java"});
    CHECK(index.contains("sub/C.java"));
}

TEST_CASE("scanning an empty directory yields an empty index") {
    testing::TempDir dir("scan_empty");
    RepoIndex index = scan_repo(dir.path());
    CHECK(index.files.empty());
    CHECK(index.skipped.empty());
}

TEST_CASE("scanning a missing root is an error") {
    CHECK_THROWS_AS(scan_repo("/nonexistent/path/xyz"), DataError);
}

TEST_CASE("rescanning gives an identical index") {
    RepoIndex a = scan_repo(testing::mini_corpus_dir() / "billing-core");
    RepoIndex b = scan_repo(testing::mini_corpus_dir() / "billing-core");
    ScanOptions parallel;
    parallel.jobs = 4;
    RepoIndex c = scan_repo(testing::mini_corpus_dir() / "billing-core", parallel);
    REQUIRE(a.files.size() == b.files.size());
    REQUIRE(a.files.size() == c.files.size());
    CHECK(a.import_edges == b.import_edges);
    CHECK(a.import_edges == c.import_edges);
    for (const auto& [rel, file] : a.files) {
        CHECK(b.at(rel).facts.identifiers == file.facts.identifiers);
        CHECK(c.at(rel).facts.line_mask == file.facts.line_mask);
    }
}

TEST_CASE("mini corpus counts match the manifest") {
    nlohmann::json manifest = load_manifest();
    for (const auto& [repo_id, expected] : manifest["repos"].items()) {
        RepoIndex index = scan_repo(testing::mini_corpus_dir() / repo_id);
        CHECK(index.files.size() == expected["n_files"].get<size_t>());
        size_t code_lines = 0;
        for (const auto& [rel, file] : index.files) {
            size_t file_code = 0;
            for (LineMask mask : file.facts.line_mask) {
                if (mask == LineMask::Code) {
                    ++file_code;
                }
            }
            const auto& file_expected = expected["files"][rel];
            CHECK(file.source.line_count() == file_expected["lines"].get<size_t>());
            CHECK(file_code == file_expected["code_lines"].get<size_t>());
            code_lines += file_code;
        }
        CHECK(code_lines == expected["n_code_lines"].get<size_t>());
    }
}

TEST_CASE("Auth.java line mask, hand-derived") {
    RepoIndex index = scan_repo(testing::mini_corpus_dir() / "billing-core");
    const auto& facts = index.at("com/example/billing/Auth.java").facts;
    std::vector<LineMask> expected = {
        LineMask::Code,  LineMask::Blank, LineMask::Code, LineMask::Code, LineMask::Code,
        LineMask::Blank, LineMask::Code,  LineMask::Code, LineMask::Code, LineMask::Code,
        LineMask::Code,  LineMask::Code,  LineMask::Blank, LineMask::Code, LineMask::Code,
        LineMask::Code,  LineMask::Code,
    };
    CHECK(facts.line_mask == expected);
    CHECK(facts.string_literals == std::vector<std::string>{"bearer", "anonymous", "/"});
}

TEST_CASE("Subscription.java methods per the fixture annotation") {
    RepoIndex index = scan_repo(testing::mini_corpus_dir() / "billing-core");
    const auto& facts = index.at("com/example/billing/Subscription.java").facts;
    std::vector<std::string> names;
    for (const MethodSpan& method : facts.methods) {
        names.push_back(method.name);
    }
    CHECK(names == std::vector<std::string>{"Subscription", "getTier", "renew"});
    CHECK(facts.extends_names == std::vector<std::string>{"BillingEntity"});
    CHECK(facts.string_literals == std::vector<std::string>{"subscription"});
    CHECK(facts.field_declaration_lines == std::vector<size_t>{8, 10, 11, 12});
}

TEST_CASE("import resolution: qualified, unresolvable, wildcard") {
    RepoIndex index = scan_repo(testing::mini_corpus_dir() / "billing-core");

    CHECK(resolve_imports(index, "com/example/billing/Subscription.java") ==
          std::vector<std::string>{"com/example/billing/util/Dates.java"});

    // java.util.* imports resolve to nothing; the wildcard picks up util/.
    CHECK(resolve_imports(index, "com/example/billing/SubscriptionManager.java") ==
          std::vector<std::string>{"com/example/billing/util/Dates.java",
                                   "com/example/billing/util/Strings.java"});

    CHECK(resolve_imports(index, "com/example/billing/Account.java").empty());
}

TEST_CASE("import edges point at files matching the imported name") {
    for (const char* repo : {"billing-core", "parser-kit", "metrics-store"}) {
        RepoIndex index = scan_repo(testing::mini_corpus_dir() / repo);
        for (const auto& [rel, targets] : index.import_edges) {
            const auto& imports = index.at(rel).facts.imports;
            for (const std::string& target : targets) {
                CHECK(index.contains(target));
                bool justified = false;
                for (const std::string& imp : imports) {
                    if (imp.size() > 2 && imp.compare(imp.size() - 2, 2, ".*") == 0) {
                        justified = true;  // wildcard edges carry the package, not a name
                        continue;
                    }
                    size_t dot = imp.rfind('.');
                    std::string simple = dot == std::string::npos ? imp : imp.substr(dot + 1);
                    if (target.size() >= simple.size() + 5 &&
                        target.compare(target.size() - simple.size() - 5, simple.size() + 5,
                                       simple + ".java") == 0) {
                        justified = true;
                    }
                }
                CHECK(justified);
            }
        }
    }
}

TEST_CASE("filename tokens split camelCase, digits, and underscores") {
    CHECK(filename_tokens("SubscriptionManager") ==
          std::vector<std::string>{"subscription", "manager"});
    CHECK(filename_tokens("HTTPServer") == std::vector<std::string>{"http", "server"});
    CHECK(filename_tokens("Account2Manager") == std::vector<std::string>{"account", "manager"});
    CHECK(filename_tokens("snake_case_name") == std::vector<std::string>{"snake", "case", "name"});
}

TEST_CASE("similar name files share a token; symmetric; self excluded") {
    RepoIndex index = scan_repo(testing::mini_corpus_dir() / "billing-core");
    auto similar = similar_name_files(index, "com/example/billing/SubscriptionManager.java");
    CHECK(similar == std::vector<std::string>{"com/example/billing/Subscription.java"});

    auto auth = similar_name_files(index, "com/example/billing/Auth.java");
    CHECK(std::find(auth.begin(), auth.end(), "com/example/billing/Account.java") == auth.end());

    for (const auto& [rel, _] : index.files) {
        for (const std::string& other : similar_name_files(index, rel)) {
            CHECK(other != rel);
            auto back = similar_name_files(index, other);
            CHECK(std::find(back.begin(), back.end(), rel) != back.end());
        }
    }
}

TEST_CASE("sibling files share the parent directory") {
    RepoIndex index = scan_repo(testing::mini_corpus_dir() / "billing-core");
    CHECK(sibling_files(index, "com/example/billing/util/Strings.java") ==
          std::vector<std::string>{"com/example/billing/util/Dates.java"});

    testing::TempDir dir("siblings");
    write_file(dir.path() / "x/A.java", "class A {}\n");
    write_file(dir.path() / "x/B.java", "class B {}\n");
    write_file(dir.path() / "y/C.java", "class C {}\n");
    RepoIndex small = scan_repo(dir.path());
    CHECK(sibling_files(small, "x/A.java") == std::vector<std::string>{"x/B.java"});
    CHECK(sibling_files(small, "y/C.java").empty());
}

TEST_CASE("parent class files: cross-file, absent, same-file") {
    RepoIndex billing = scan_repo(testing::mini_corpus_dir() / "billing-core");
    CHECK(parent_class_files(billing, "com/example/billing/Subscription.java") ==
          std::vector<std::string>{"com/example/billing/BillingEntity.java"});
    CHECK(parent_class_files(billing, "com/example/billing/Account.java").empty());

    RepoIndex parser = scan_repo(testing::mini_corpus_dir() / "parser-kit");
    // TextNode extends Node inside Node.java itself: cross-file only.
    CHECK(parent_class_files(parser, "com/parserkit/Node.java").empty());

    RepoIndex metrics = scan_repo(testing::mini_corpus_dir() / "metrics-store");
    CHECK(parent_class_files(metrics, "com/metrics/Counter.java") ==
          std::vector<std::string>{"com/metrics/Metric.java"});
}
