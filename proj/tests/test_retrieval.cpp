#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "repofid/retrieval.hpp"
#include "repofid/tokenize.hpp"
#include "repofid/util.hpp"

#include "helpers.hpp"

using namespace repofid;

namespace {

RepoIndex index_from_files(const std::string& name,
                           const std::vector<std::pair<std::string, std::string>>& files) {
    testing::TempDir dir(name);
    for (const auto& [rel, content] : files) {
        write_file(dir.path() / rel, content);
    }
    return scan_repo(dir.path());
}

TargetHole hole_with_surrounding(const std::string& rel, std::string surrounding) {
    TargetHole hole;
    hole.rel_path = rel;
    hole.surrounding = std::move(surrounding);
    hole.hole_str = "x";
    return hole;
}

}  // namespace

TEST_CASE("bm25 matches the hand-computed Okapi table") {
    RepoIndex index = index_from_files("bm25_toy", {
        {"a.java", "alpha beta alpha\n"},
        {"b.java", "beta gamma\n"},
        {"c.java", "delta delta delta delta\n"},
        {"current.java", "alpha\n"},
    });
    TargetHole hole = hole_with_surrounding("current.java", "alpha beta");
    std::vector<ScoredFile> scored = bm25_rank(index, hole);
    REQUIRE(scored.size() == 3);
    CHECK(scored[0].rel_path == "a.java");
    CHECK(scored[0].score == doctest::Approx(1.8711882764053445).epsilon(1e-12));
    CHECK(scored[1].rel_path == "b.java");
    CHECK(scored[1].score == doctest::Approx(0.5529454461714537).epsilon(1e-12));
    CHECK(scored[2].rel_path == "c.java");
    CHECK(scored[2].score == 0.0);
}

TEST_CASE("query tokens absent everywhere give all-zero scores") {
    RepoIndex index = index_from_files("bm25_zero", {
        {"a.java", "alpha beta\n"},
        {"b.java", "gamma delta\n"},
        {"cur.java", "x\n"},
    });
    TargetHole hole = hole_with_surrounding("cur.java", "omega omega");
    for (const ScoredFile& scored : bm25_rank(index, hole)) {
        CHECK(scored.score == 0.0);
    }
}

TEST_CASE("empty query scores zero in lexicographic order") {
    RepoIndex index = index_from_files("bm25_empty_q", {
        {"b.java", "beta\n"},
        {"a.java", "alpha\n"},
        {"cur.java", "x\n"},
    });
    TargetHole hole = hole_with_surrounding("cur.java", "");
    std::vector<ScoredFile> scored = bm25_rank(index, hole);
    REQUIRE(scored.size() == 2);
    CHECK(scored[0].rel_path == "a.java");
    CHECK(scored[1].rel_path == "b.java");
    CHECK(scored[0].score == 0.0);
}

TEST_CASE("the current file is never a candidate") {
    RepoIndex index = index_from_files("bm25_current", {
        {"a.java", "alpha\n"},
        {"cur.java", "alpha alpha alpha\n"},
    });
    TargetHole hole = hole_with_surrounding("cur.java", "alpha");
    std::vector<ScoredFile> scored = bm25_rank(index, hole);
    REQUIRE(scored.size() == 1);
    CHECK(scored[0].rel_path == "a.java");
}

TEST_CASE("duplicating a present query term never lowers that doc's score") {
    Rng rng(99);
    std::vector<std::string> words = {"alpha", "beta", "gamma", "delta", "epsilon", "zeta"};
    for (int trial = 0; trial < 25; ++trial) {
        std::vector<std::pair<std::string, std::string>> files;
        size_t n_docs = 3 + rng.below(4);
        for (size_t d = 0; d < n_docs; ++d) {
            std::string content;
            size_t len = 1 + rng.below(12);
            for (size_t w = 0; w < len; ++w) {
                content += words[rng.below(words.size())];
                content.push_back(' ');
            }
            files.emplace_back("d" + std::to_string(d) + ".java", content + "\n");
        }
        files.emplace_back("cur.java", "alpha\n");
        std::string query = words[rng.below(words.size())];

        // find a doc containing the term
        size_t target = files.size();
        for (size_t d = 0; d + 1 < files.size(); ++d) {
            if (files[d].second.find(query) != std::string::npos) {
                target = d;
                break;
            }
        }
        if (target == files.size()) {
            continue;
        }

        testing::TempDir dir("bm25_mono_a");
        for (const auto& [rel, content] : files) {
            write_file(dir.path() / rel, content);
        }
        RepoIndex before = scan_repo(dir.path());
        TargetHole hole = hole_with_surrounding("cur.java", query);
        double score_before = 0.0;
        for (const ScoredFile& s : Bm25Index(before).rank(hole)) {
            if (s.rel_path == files[target].first) {
                score_before = s.score;
            }
        }

        auto files_after = files;
        files_after[target].second =
            files_after[target].second.substr(0, files_after[target].second.size() - 1) + " " +
            query + "\n";
        testing::TempDir dir2("bm25_mono_b");
        for (const auto& [rel, content] : files_after) {
            write_file(dir2.path() / rel, content);
        }
        RepoIndex after = scan_repo(dir2.path());
        double score_after = 0.0;
        for (const ScoredFile& s : Bm25Index(after).rank(hole)) {
            if (s.rel_path == files[target].first) {
                score_after = s.score;
            }
        }
        INFO("trial " << trial << " doc " << files[target].first << " query " << query);
        CHECK(score_after >= score_before - 1e-12);
    }
}

TEST_CASE("embed_bag arithmetic and determinism") {
    SUBCASE("empty text is the zero vector with cosine 0") {
        std::vector<double> zero = embed_bag("", 64);
        CHECK(std::all_of(zero.begin(), zero.end(), [](double v) { return v == 0.0; }));
        CHECK(cosine(zero, embed_bag("a", 64)) == 0.0);
    }
    SUBCASE("counts 2,1 normalize to 2/sqrt(5), 1/sqrt(5)") {
        std::vector<double> vec = embed_bag("a a b", 64);
        std::vector<double> nonzero;
        for (double v : vec) {
            if (v != 0.0) {
                nonzero.push_back(v);
            }
        }
        std::sort(nonzero.begin(), nonzero.end());
        REQUIRE(nonzero.size() == 2);
        CHECK(nonzero[0] == doctest::Approx(1.0 / std::sqrt(5.0)).epsilon(1e-12));
        CHECK(nonzero[1] == doctest::Approx(2.0 / std::sqrt(5.0)).epsilon(1e-12));
    }
    SUBCASE("same text embeds identically") {
        CHECK(embed_bag("token stream example", 128) == embed_bag("token stream example", 128));
    }
}

TEST_CASE("cosine bounds for bag vectors") {
    Rng rng(5);
    std::vector<std::string> words = {"a", "b", "c", "d", "e", "f", "g"};
    for (int trial = 0; trial < 50; ++trial) {
        std::string t1, t2;
        for (size_t i = 0; i < 1 + rng.below(10); ++i) {
            t1 += words[rng.below(words.size())] + " ";
        }
        for (size_t i = 0; i < 1 + rng.below(10); ++i) {
            t2 += words[rng.below(words.size())] + " ";
        }
        double sim = cosine(embed_bag(t1, 32), embed_bag(t2, 32));
        CHECK(sim >= 0.0);
        CHECK(sim <= 1.0 + 1e-12);
    }
}

TEST_CASE("random_nn ranks an identical chunk first with cosine 1") {
    RepoIndex index = index_from_files("rnn_identical", {
        {"a.java", "alpha beta gamma\n"},
        {"b.java", "unrelated tokens here\n"},
        {"cur.java", "x\n"},
    });
    TargetHole hole = hole_with_surrounding("cur.java", "alpha beta gamma");
    RandomNnOptions options;
    options.chunk_lines = 5;
    options.n_candidates = 16;
    options.k = 2;
    options.seed = 1;
    HashedBagEmbedder embedder(256);
    std::vector<Chunk> top = random_nn(index, hole, options, embedder);
    REQUIRE(!top.empty());
    CHECK(top[0].rel_path == "a.java");
    CHECK(cosine(embedder.embed(top[0].text), embedder.embed(hole.surrounding)) ==
          doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random_nn: orthogonal token sets score 0 and rank last") {
    std::vector<double> a = embed_bag("alpha beta", 1024);
    std::vector<double> b = embed_bag("gamma delta", 1024);
    CHECK(cosine(a, b) == 0.0);
}

TEST_CASE("random_nn is deterministic and caps at the available chunks") {
    RepoIndex index = scan_repo(testing::mini_corpus_dir() / "billing-core");
    TargetHole hole;
    hole.rel_path = "com/example/billing/Subscription.java";
    hole.line_idx = 20;
    hole.char_start = 15;
    hole.surrounding = "public int getTier() { return";

    RandomNnOptions options;
    options.chunk_lines = 10;
    options.n_candidates = 512;
    options.k = 3;
    options.seed = 7;
    HashedBagEmbedder embedder;

    std::vector<Chunk> a = random_nn(index, hole, options, embedder);
    std::vector<Chunk> b = random_nn(index, hole, options, embedder);
    REQUIRE(a.size() == 3);
    for (size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].rel_path == b[i].rel_path);
        CHECK(a[i].line_start == b[i].line_start);
        CHECK(a[i].rel_path != hole.rel_path);
    }

    options.k = 10000;
    options.n_candidates = 10000;
    std::vector<Chunk> all = random_nn(index, hole, options, embedder);
    size_t total_chunks = 0;
    for (const Chunk& chunk : enumerate_chunks(index, options.chunk_lines)) {
        if (chunk.rel_path != hole.rel_path) {
            ++total_chunks;
        }
    }
    CHECK(all.size() == total_chunks);
}

TEST_CASE("random_nn fixture golden top-3 (fixed seed)") {
    RepoIndex index = scan_repo(testing::mini_corpus_dir() / "billing-core");
    TargetHole hole;
    hole.rel_path = "com/example/billing/SubscriptionManager.java";
    hole.line_idx = 10;
    hole.char_start = 8;
    hole.surrounding =
        "\n    public Subscription open(Account account) {\n        "
        "\n        subscriptions.add(created);\n        return created;";

    RandomNnOptions options;
    options.chunk_lines = 10;
    options.n_candidates = 512;
    options.k = 3;
    options.seed = 2024;
    HashedBagEmbedder embedder;
    std::vector<Chunk> top = random_nn(index, hole, options, embedder);
    REQUIRE(top.size() == 3);
    // Golden ids recorded from the first run of this configuration.
    CHECK(top[0].rel_path + ":" + std::to_string(top[0].line_start) == "com/example/billing/Invoice.java:10");
    CHECK(top[1].rel_path + ":" + std::to_string(top[1].line_start) == "com/example/billing/Subscription.java:20");
    CHECK(top[2].rel_path + ":" + std::to_string(top[2].line_start) == "com/example/billing/util/Strings.java:10");
}

TEST_CASE("chunk windows are consecutive with a short tail") {
    RepoIndex index = scan_repo(testing::mini_corpus_dir() / "metrics-store");
    for (const Chunk& chunk : enumerate_chunks(index, 10)) {
        size_t lines = index.at(chunk.rel_path).source.line_count();
        CHECK(chunk.line_start % 10 == 0);
        if (chunk.line_end != lines) {
            CHECK(chunk.line_end - chunk.line_start == 10);
        } else {
            CHECK(chunk.line_end - chunk.line_start <= 10);
        }
    }
}

TEST_CASE("k greater than n_candidates is rejected") {
    RepoIndex index = scan_repo(testing::mini_corpus_dir() / "metrics-store");
    TargetHole hole = hole_with_surrounding("com/metrics/Clock.java", "now");
    RandomNnOptions options;
    options.k = 100;
    options.n_candidates = 10;
    HashedBagEmbedder embedder;
    CHECK_THROWS_AS(random_nn(index, hole, options, embedder), UsageError);
}
