// repofid: build, pack, and evaluate repository-context code-completion
// datasets, and train the toy fusion model on them.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "repofid/builder.hpp"
#include "repofid/dataset_io.hpp"
#include "repofid/eval_harness.hpp"
#include "repofid/fid/model.hpp"
#include "repofid/fid/provider.hpp"
#include "repofid/hole_gen.hpp"
#include "repofid/packing.hpp"
#include "repofid/prompt_proposals.hpp"
#include "repofid/repo_model.hpp"
#include "repofid/tokenize.hpp"
#include "repofid/util.hpp"

namespace fs = std::filesystem;
using namespace repofid;

namespace {

struct CommonFlags {
    uint64_t seed = 0;
    int jobs = 1;
};

void add_common(CLI::App* cmd, CommonFlags& flags) {
    cmd->add_option("--seed", flags.seed, "Seed for all randomness")->capture_default_str();
    cmd->add_option("--jobs", flags.jobs, "Worker threads (never changes outputs)")
        ->capture_default_str();
}

struct PackingFlags {
    std::string strategy = "nt-prior-last";
    size_t n = 32;
    size_t l = 768;
    bool no_surrounding = false;
    std::string repeat_single;
};

void add_packing(CLI::App* cmd, PackingFlags& flags) {
    cmd->add_option("--strategy", flags.strategy,
                    "Packing strategy: t-rank, t-rand, nt-rank, nt-prior-last")
        ->capture_default_str();
    cmd->add_option("--n", flags.n, "Number of repo contexts per hole (N)")->capture_default_str();
    cmd->add_option("--l", flags.l, "Token budget per repo context chunk (l)")
        ->capture_default_str();
    cmd->add_flag("--no-surrounding", flags.no_surrounding,
                  "Do not append the surrounding context to each repo context");
    cmd->add_option("--repeat-single", flags.repeat_single,
                    "Fill every slot from this one context (repetition ablation)");
}

PackingConfig make_packing_config(const PackingFlags& flags, uint64_t seed) {
    PackingConfig config;
    auto strategy = parse_strategy(flags.strategy);
    if (!strategy.has_value()) {
        throw UsageError("unknown strategy: " + flags.strategy);
    }
    config.strategy = *strategy;
    config.n_contexts = flags.n;
    config.context_len = flags.l;
    config.include_surrounding = !flags.no_surrounding;
    if (!flags.repeat_single.empty()) {
        config.repeat_single = flags.repeat_single;
    }
    config.seed = seed;
    return config;
}

ContextKind parse_kind_or_throw(const std::string& name) {
    auto kind = parse_kind(name);
    if (!kind.has_value()) {
        throw UsageError("unknown context kind: " + name + " (use pp, bm25, or random-nn)");
    }
    return *kind;
}

void write_or_print(const std::string& out_path, const std::string& content) {
    if (out_path.empty() || out_path == "-") {
        std::fwrite(content.data(), 1, content.size(), stdout);
    } else {
        write_file(out_path, content);
    }
}

int cmd_scan(const std::string& root, const CommonFlags& common, const std::string& skip_list) {
    ScanOptions options;
    options.jobs = common.jobs;
    RepoIndex index = scan_repo(root, options);
    size_t lines = 0;
    size_t code_lines = 0;
    for (const auto& [_, file] : index.files) {
        lines += file.source.line_count();
        for (LineMask mask : file.facts.line_mask) {
            if (mask == LineMask::Code) {
                ++code_lines;
            }
        }
    }
    std::printf("repo %s: files=%zu lines=%zu code_lines=%zu skipped=%zu\n",
                index.repo_id.c_str(), index.files.size(), lines, code_lines,
                index.skipped.size());
    if (!skip_list.empty()) {
        std::string text;
        for (const std::string& rel : index.skipped) {
            text += rel;
            text.push_back('\n');
        }
        write_file(skip_list, text);
    }
    return 0;
}

int cmd_holes(const std::string& root, const CommonFlags& common, size_t cap, size_t above,
              size_t below, const std::string& out) {
    ScanOptions scan_options;
    scan_options.jobs = common.jobs;
    RepoIndex index = scan_repo(root, scan_options);
    HoleGenOptions options;
    options.seed = common.seed;
    options.cap = cap;
    options.surrounding = {above, below};
    options.jobs = common.jobs;
    std::vector<TargetHole> holes = generate_holes(index, options);
    std::vector<HoleRecord> records;
    records.reserve(holes.size());
    for (const TargetHole& hole : holes) {
        HoleRecord record;
        record.location = {hole.rel_path, static_cast<int64_t>(hole.line_idx),
                           static_cast<int64_t>(hole.char_start)};
        record.hole = hole.hole_str;
        record.surrounding = hole.surrounding;
        records.push_back(std::move(record));
    }
    write_or_print(out, serialize_records(records));
    return 0;
}

std::vector<PromptProposal> load_ranking(const std::string& ranking_file) {
    if (ranking_file.empty()) {
        return default_ranking();
    }
    return parse_ranking(read_file(ranking_file));
}

void fit_retrieval_to_packing(RetrievalConfig& retrieval, size_t n_contexts) {
    if (retrieval.bm25_top_files < n_contexts) {
        retrieval.bm25_top_files = n_contexts;
    }
    if (retrieval.nn_top_k < n_contexts) {
        retrieval.nn_top_k = n_contexts;
    }
    if (retrieval.nn_top_k > retrieval.nn_candidates) {
        retrieval.nn_candidates = retrieval.nn_top_k;
    }
}

int cmd_build_dataset(const std::string& root, const std::string& out, const CommonFlags& common,
                      const PackingFlags& packing_flags, const std::string& kind_text, size_t cap,
                      std::optional<size_t> cap_train, std::optional<size_t> cap_val,
                      std::optional<size_t> cap_test, size_t min_files,
                      const std::string& split_file, const std::string& ranking_file,
                      const RetrievalConfig& retrieval) {
    BuildConfig config;
    config.packing = make_packing_config(packing_flags, common.seed);
    config.retrieval = retrieval;
    fit_retrieval_to_packing(config.retrieval, config.packing.n_contexts);
    if (kind_text == "all") {
        config.kinds = {ContextKind::PP, ContextKind::BM25, ContextKind::RandomNN};
    } else {
        config.kinds = {parse_kind_or_throw(kind_text)};
    }
    config.seed = common.seed;
    config.cap = cap;
    config.cap_train = cap_train;
    config.cap_val = cap_val;
    config.cap_test = cap_test;
    config.min_files = min_files;
    if (!split_file.empty()) {
        config.split_file = split_file;
    }
    if (!ranking_file.empty()) {
        config.ranking_file = ranking_file;
    }
    config.jobs = common.jobs;

    BuildSummary summary = build_dataset(root, out, config);
    for (const auto& [repo_id, n_holes] : summary.holes_per_repo) {
        std::printf("repo %s: holes=%zu\n", repo_id.c_str(), n_holes);
    }
    const auto print_split = [](const char* name, const SplitStats& stats) {
        std::printf("%-5s repos=%zu files=%zu holes=%zu%s\n", name, stats.n_repos, stats.n_files,
                    stats.n_holes, stats.missing ? " (missing)" : "");
    };
    print_split("train", summary.stats.train);
    print_split("val", summary.stats.val);
    print_split("test", summary.stats.test);
    return 0;
}

int cmd_pack(const std::string& repo, const std::string& holes_file, const CommonFlags& common,
             const PackingFlags& packing_flags, const std::string& kind_text,
             const std::string& ranking_file, size_t cap, const RetrievalConfig& retrieval,
             const std::string& out) {
    ScanOptions scan_options;
    scan_options.jobs = common.jobs;
    RepoIndex index = scan_repo(repo, scan_options);

    std::vector<TargetHole> holes;
    if (holes_file.empty()) {
        HoleGenOptions options;
        options.seed = common.seed;
        options.cap = cap;
        options.jobs = common.jobs;
        holes = generate_holes(index, options);
    } else {
        for (const HoleRecord& record : read_records_file(holes_file)) {
            TargetHole hole;
            hole.repo_id = index.repo_id;
            hole.rel_path = record.location.file;
            hole.line_idx = static_cast<size_t>(record.location.line);
            hole.char_start = static_cast<size_t>(record.location.col);
            hole.hole_str = record.hole;
            hole.surrounding = record.surrounding;
            holes.push_back(std::move(hole));
        }
    }

    ContextKind kind = parse_kind_or_throw(kind_text);
    PackingConfig packing = make_packing_config(packing_flags, common.seed);
    RetrievalConfig retrieval_config = retrieval;
    fit_retrieval_to_packing(retrieval_config, packing.n_contexts);
    std::vector<HoleRecord> records =
        pack_repo_holes(index, holes, kind, packing, retrieval_config, load_ranking(ranking_file),
                        common.seed, common.jobs);
    write_or_print(out, serialize_records(records));
    return 0;
}

int cmd_eval(const std::string& dataset, const std::string& kind_text,
             const std::string& provider_spec, const CommonFlags& common, bool strict_bytes,
             const std::string& dump) {
    ContextKind kind = parse_kind_or_throw(kind_text);
    std::vector<EvalExample> examples = examples_from_split(dataset, kind);

    std::unique_ptr<CompletionProvider> provider;
    if (provider_spec == "oracle-copy") {
        provider = std::make_unique<OracleCopyProvider>();
    } else if (provider_spec == "post-first-line") {
        provider = std::make_unique<PostFirstLineProvider>();
    } else if (provider_spec.rfind("replay:", 0) == 0) {
        provider = std::make_unique<ReplayProvider>(provider_spec.substr(7));
    } else if (provider_spec.rfind("fid:", 0) == 0) {
        provider = std::make_unique<fid::FidProvider>(
            fid::FidProvider::from_file(provider_spec.substr(4)));
    } else {
        throw UsageError("unknown provider: " + provider_spec +
                         " (use oracle-copy, post-first-line, replay:FILE, or fid:MODEL)");
    }

    std::vector<EvalOutcome> outcomes;
    EvalOptions options;
    options.strict_bytes = strict_bytes;
    options.jobs = common.jobs;
    options.outcomes = &outcomes;
    EvalResult result = evaluate(*provider, examples, options);
    std::printf("%s\n", format_eval_result(result, provider->name()).c_str());
    if (!dump.empty()) {
        write_file(dump, serialize_outcomes(outcomes));
    }
    return 0;
}

int cmd_train_toy(const std::string& data, const CommonFlags& common, const std::string& out,
                  const std::string& curve, size_t steps, double lr, int d_model, int heads,
                  int enc_layers, int dec_layers, int max_rc_tokens, int n_contexts,
                  bool no_cross_bias) {
    std::vector<HoleRecord> records = read_records_file(data);
    if (records.empty()) {
        throw DataError("train-toy: no records in " + data);
    }

    std::vector<std::string> corpus;
    size_t max_contexts = 0;
    for (const HoleRecord& record : records) {
        corpus.push_back(record.hole);
        max_contexts = std::max(max_contexts, record.repo_contexts.size());
        for (const std::string& rc : record.repo_contexts) {
            corpus.push_back(rc);
        }
    }
    if (max_contexts == 0) {
        throw DataError("train-toy: records carry no repo contexts; pack them first");
    }
    fid::Vocab vocab = fid::Vocab::build(corpus);

    fid::ModelConfig config;
    config.vocab_size = static_cast<int>(vocab.size());
    config.d_model = d_model;
    config.n_heads = heads;
    config.n_enc_layers = enc_layers;
    config.n_dec_layers = dec_layers;
    config.n_contexts = n_contexts > 0 ? n_contexts : static_cast<int>(max_contexts);
    config.cross_position_bias = !no_cross_bias;
    if (max_rc_tokens > 0) {
        config.max_rc_tokens = max_rc_tokens;
    } else {
        size_t longest = 1;
        for (const HoleRecord& record : records) {
            for (const std::string& rc : record.repo_contexts) {
                longest = std::max(longest, count_tokens(rc));
            }
        }
        config.max_rc_tokens = static_cast<int>(std::min<size_t>(longest, 512));
    }

    std::vector<fid::ToyExample> dataset;
    dataset.reserve(records.size());
    for (const HoleRecord& record : records) {
        dataset.push_back(fid::make_example(vocab, config, record.repo_contexts, record.hole));
    }

    fid::TrainOptions options;
    options.lr = lr;
    options.steps = steps;
    options.seed = common.seed;
    fid::TrainResult result = fid::train(config, dataset, options);

    fid::save_model(out, result.params, vocab);
    if (!curve.empty()) {
        std::string csv = "step,loss\n";
        char buffer[64];
        for (size_t i = 0; i < result.loss_curve.size(); ++i) {
            std::snprintf(buffer, sizeof(buffer), "%zu,%.17g\n", i, result.loss_curve[i]);
            csv += buffer;
        }
        write_file(curve, csv);
    }
    double final_loss = result.loss_curve.empty() ? 0.0 : result.loss_curve.back();
    std::printf("trained %zu steps on %zu examples, vocab=%zu, params=%zu, final_loss=%.6f\n",
                steps, dataset.size(), vocab.size(), result.params.layout->total, final_loss);
    return 0;
}

int cmd_stats(const std::string& root) {
    CorpusStats stats = dataset_stats(root);
    std::printf("%-6s %8s %8s %8s\n", "split", "repos", "files", "holes");
    const auto row = [](const char* name, const SplitStats& s) {
        std::printf("%-6s %8zu %8zu %8zu%s\n", name, s.n_repos, s.n_files, s.n_holes,
                    s.missing ? "  (missing)" : "");
    };
    row("train", stats.train);
    row("val", stats.val);
    row("test", stats.test);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Repository-context code completion dataset and evaluation toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "Read options from a key=value config file");

    // scan
    auto* scan = app.add_subcommand("scan", "Index one repository and print a summary");
    std::string scan_root;
    std::string scan_skip_list;
    CommonFlags scan_common;
    scan->add_option("root", scan_root, "Repository directory")->required();
    scan->add_option("--skip-list", scan_skip_list, "Write skipped (undecodable) files here");
    add_common(scan, scan_common);

    // holes
    auto* holes = app.add_subcommand("holes", "Generate target holes for one repository (NDJSON)");
    std::string holes_root;
    std::string holes_out;
    size_t holes_cap = 10000;
    size_t holes_above = 2;
    size_t holes_below = 2;
    CommonFlags holes_common;
    holes->add_option("root", holes_root, "Repository directory")->required();
    holes->add_option("-o,--out", holes_out, "Output file (default stdout)");
    holes->add_option("--cap", holes_cap, "Max holes per repository")->capture_default_str();
    holes->add_option("--lines-above", holes_above, "Surrounding lines above")
        ->capture_default_str();
    holes->add_option("--lines-below", holes_below, "Surrounding lines below")
        ->capture_default_str();
    add_common(holes, holes_common);

    const auto add_retrieval = [](CLI::App* cmd, RetrievalConfig& config) {
        cmd->add_option("--bm25-k1", config.bm25_k1, "BM25 k1")->capture_default_str();
        cmd->add_option("--bm25-b", config.bm25_b, "BM25 b")->capture_default_str();
        cmd->add_option("--chunk-lines", config.chunk_lines, "RandomNN chunk size in lines")
            ->capture_default_str();
        cmd->add_option("--nn-candidates", config.nn_candidates,
                        "RandomNN sampled candidate chunks")
            ->capture_default_str();
        cmd->add_option("--embed-dim", config.embed_dim, "Hashed bag embedder dimension")
            ->capture_default_str();
    };

    // build-dataset
    auto* build = app.add_subcommand(
        "build-dataset", "Scan a directory of repositories and write a Stack-Repo-style tree");
    std::string build_root;
    std::string build_out;
    std::string build_kind = "all";
    std::string build_split_file;
    std::string build_ranking;
    size_t build_cap = 10000;
    std::optional<size_t> build_cap_train, build_cap_val, build_cap_test;
    size_t build_min_files = 20;
    CommonFlags build_common;
    PackingFlags build_packing;
    RetrievalConfig build_retrieval;
    build->add_option("root", build_root, "Directory whose subdirectories are repositories")
        ->required();
    build->add_option("--out", build_out, "Output dataset root")->required();
    build->add_option("--kind", build_kind, "Context kind: pp, bm25, random-nn, or all")
        ->capture_default_str();
    build->add_option("--cap", build_cap, "Max holes per repository")->capture_default_str();
    build->add_option("--cap-train", build_cap_train, "Cap override for the train split");
    build->add_option("--cap-val", build_cap_val, "Cap override for the val split");
    build->add_option("--cap-test", build_cap_test, "Cap override for the test split");
    build->add_option("--min-files", build_min_files, "Repos with fewer files are excluded")
        ->capture_default_str();
    build->add_option("--split-file", build_split_file,
                      "Explicit 'repo split' assignment file (overrides the seeded 2:1:1 split)");
    build->add_option("--ranking", build_ranking, "Prompt proposal ranking file");
    add_packing(build, build_packing);
    add_retrieval(build, build_retrieval);
    add_common(build, build_common);

    // pack
    auto* pack_cmd = app.add_subcommand("pack", "Pack one repository's holes into repo contexts");
    std::string pack_repo;
    std::string pack_holes;
    std::string pack_kind = "pp";
    std::string pack_ranking;
    std::string pack_out;
    size_t pack_cap = 10000;
    CommonFlags pack_common;
    PackingFlags pack_packing;
    RetrievalConfig pack_retrieval;
    pack_cmd->add_option("repo", pack_repo, "Repository directory")->required();
    pack_cmd->add_option("--holes", pack_holes, "Holes NDJSON (default: generate from --seed)");
    pack_cmd->add_option("--kind", pack_kind, "Context kind: pp, bm25, or random-nn")
        ->capture_default_str();
    pack_cmd->add_option("--ranking", pack_ranking, "Prompt proposal ranking file");
    pack_cmd->add_option("--cap", pack_cap, "Max holes when generating")->capture_default_str();
    pack_cmd->add_option("-o,--out", pack_out, "Output file (default stdout)");
    add_packing(pack_cmd, pack_packing);
    add_retrieval(pack_cmd, pack_retrieval);
    add_common(pack_cmd, pack_common);

    // eval
    auto* eval_cmd = app.add_subcommand("eval", "Evaluate a completion provider on a split");
    std::string eval_dataset;
    std::string eval_kind = "pp";
    std::string eval_provider = "oracle-copy";
    std::string eval_dump;
    bool eval_strict = false;
    CommonFlags eval_common;
    eval_cmd->add_option("--dataset", eval_dataset, "Split directory (e.g. out/test)")->required();
    eval_cmd->add_option("--kind", eval_kind, "Context kind to read")->capture_default_str();
    eval_cmd
        ->add_option("--provider", eval_provider,
                     "oracle-copy, post-first-line, replay:FILE, or fid:MODEL")
        ->capture_default_str();
    eval_cmd->add_flag("--strict-bytes", eval_strict, "Exact match without trailing-space trim");
    eval_cmd->add_option("--dump", eval_dump, "Write per-example outcomes NDJSON here");
    add_common(eval_cmd, eval_common);

    // train-toy
    auto* train_cmd =
        app.add_subcommand("train-toy", "Train the toy fusion model on packed records");
    std::string train_data;
    std::string train_out = "model.fid";
    std::string train_curve;
    size_t train_steps = 2000;
    double train_lr = 1e-3;
    int train_d_model = 64;
    int train_heads = 2;
    int train_enc_layers = 1;
    int train_dec_layers = 1;
    int train_max_rc_tokens = 0;
    int train_n_contexts = 0;
    bool train_no_bias = false;
    CommonFlags train_common;
    train_cmd->add_option("--data", train_data, "Packed records NDJSON")->required();
    train_cmd->add_option("--out", train_out, "Model output file")->capture_default_str();
    train_cmd->add_option("--curve", train_curve, "Loss curve CSV output");
    train_cmd->add_option("--steps", train_steps, "Training steps")->capture_default_str();
    train_cmd->add_option("--lr", train_lr, "Adam learning rate")->capture_default_str();
    train_cmd->add_option("--d-model", train_d_model, "Model width")->capture_default_str();
    train_cmd->add_option("--heads", train_heads, "Attention heads")->capture_default_str();
    train_cmd->add_option("--enc-layers", train_enc_layers, "Encoder layers")
        ->capture_default_str();
    train_cmd->add_option("--dec-layers", train_dec_layers, "Decoder layers")
        ->capture_default_str();
    train_cmd->add_option("--max-rc-tokens", train_max_rc_tokens,
                          "Encoder capacity per context (0 = fit the data)");
    train_cmd->add_option("--n-contexts", train_n_contexts, "Contexts per example (0 = from data)");
    train_cmd->add_flag("--no-cross-position-bias", train_no_bias,
                        "Disable the learned cross-attention position bias");
    add_common(train_cmd, train_common);

    // stats
    auto* stats_cmd = app.add_subcommand("stats", "Corpus statistics of a dataset tree");
    std::string stats_root;
    stats_cmd->add_option("root", stats_root, "Dataset root with train/val/test")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (scan->parsed()) {
            return cmd_scan(scan_root, scan_common, scan_skip_list);
        }
        if (holes->parsed()) {
            return cmd_holes(holes_root, holes_common, holes_cap, holes_above, holes_below,
                             holes_out);
        }
        if (build->parsed()) {
            return cmd_build_dataset(build_root, build_out, build_common, build_packing,
                                     build_kind, build_cap, build_cap_train, build_cap_val,
                                     build_cap_test, build_min_files, build_split_file,
                                     build_ranking, build_retrieval);
        }
        if (pack_cmd->parsed()) {
            return cmd_pack(pack_repo, pack_holes, pack_common, pack_packing, pack_kind,
                            pack_ranking, pack_cap, pack_retrieval, pack_out);
        }
        if (eval_cmd->parsed()) {
            return cmd_eval(eval_dataset, eval_kind, eval_provider, eval_common, eval_strict,
                            eval_dump);
        }
        if (train_cmd->parsed()) {
            return cmd_train_toy(train_data, train_common, train_out, train_curve, train_steps,
                                 train_lr, train_d_model, train_heads, train_enc_layers,
                                 train_dec_layers, train_max_rc_tokens, train_n_contexts,
                                 train_no_bias);
        }
        if (stats_cmd->parsed()) {
            return cmd_stats(stats_root);
        }
    } catch (const UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
