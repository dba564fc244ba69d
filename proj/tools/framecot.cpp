// framecot: ingest | synthesize | eval | lint | stats

#include "framecot/commands.hpp"
#include "framecot/error.hpp"
#include "framecot/jsonl.hpp"

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <atomic>
#include <csignal>
#include <iostream>

namespace {

std::atomic<bool> g_cancel{false};

extern "C" void on_sigint(int) { g_cancel.store(true); }

}  // namespace

int main(int argc, char** argv) {
    using namespace framecot;

    CLI::App app{"Interleaved video-text reasoning: corpus synthesis and evaluation"};
    app.require_subcommand(1);
    app.fallthrough();

    std::optional<std::string> config_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> workers;
    std::optional<std::string> log_level;
    app.add_option("--config", config_path, "JSON config file");
    app.add_option("--seed", seed, "Seed for failure injection and review sampling");
    app.add_option("--workers", workers, "Concurrent items")->check(CLI::PositiveNumber);
    app.add_option("--log-level", log_level, "trace|debug|info|warn|error|critical|off");

    std::vector<std::string> manifests;
    std::string ingest_out;
    auto* ingest = app.add_subcommand("ingest", "Load manifests and report video and frame counts");
    ingest->add_option("manifests", manifests, "Manifest files (added to paths.manifests)");
    ingest->add_option("-o,--out", ingest_out, "Summary JSON path (default: stdout)");

    std::string qa_path;
    std::string out_dir;
    std::optional<double> threshold;
    std::optional<int> max_regen;
    auto* synth = app.add_subcommand("synthesize", "Build the SFT corpus from seed QA items");
    synth->add_option("qa", qa_path, "QA items, JSON lines")->required()->check(CLI::ExistingFile);
    synth->add_option("-o,--out", out_dir, "Output directory")->required();
    synth->add_option("--similarity-threshold", threshold, "Retain iff similarity > this");
    synth->add_option("--max-regenerations", max_regen, "Extra engine runs after a wrong answer")->check(CLI::NonNegativeNumber);

    std::vector<double> sweep;
    std::string category_key = "category";
    auto* eval = app.add_subcommand("eval", "Score the engine on QA items");
    eval->add_option("qa", qa_path, "QA items, JSON lines")->required()->check(CLI::ExistingFile);
    eval->add_option("-o,--out", out_dir, "Output directory")->required();
    eval->add_option("--rate-sweep", sweep, "Failure-injection rates, e.g. 0.1,0.2,0.3")
        ->delimiter(',')
        ->check(CLI::Range(0.0, 1.0));
    eval->add_option("--category-key", category_key, "Split accuracy by this item field")
        ->check(CLI::IsMember({"category", "source_dataset"}));

    std::string corpus_path;
    std::string lint_out;
    auto* lint = app.add_subcommand("lint", "Check corpus records against the trace grammar");
    lint->add_option("corpus", corpus_path, "corpus.jsonl")->required()->check(CLI::ExistingFile);
    lint->add_option("-o,--out", lint_out, "Lint report JSON path (default: stdout)");

    std::optional<std::string> reports_path;
    std::string stats_out;
    auto* stats = app.add_subcommand("stats", "Recount corpus composition");
    stats->add_option("corpus", corpus_path, "corpus.jsonl")->required()->check(CLI::ExistingFile);
    stats->add_option("--reports", reports_path, "reports.jsonl for rejection counts")->check(CLI::ExistingFile);
    stats->add_option("-o,--out", stats_out, "Stats JSON path (default: stdout)");

    CLI11_PARSE(app, argc, argv);

    auto logger = spdlog::stderr_color_mt("framecot");
    spdlog::set_default_logger(logger);

    try {
        AppConfig cfg = load_config(config_path ? std::optional<std::filesystem::path>(*config_path) : std::nullopt);
        if (seed) cfg.set_seed(*seed);
        if (workers) cfg.workers = *workers;
        if (log_level) cfg.log_level = *log_level;
        if (threshold) cfg.pipeline.similarity_threshold = *threshold;
        if (max_regen) cfg.pipeline.max_regenerations = *max_regen;
        cfg.validate();
        spdlog::set_level(spdlog::level::from_str(cfg.log_level));

        std::signal(SIGINT, on_sigint);

        if (ingest->parsed()) {
            std::vector<std::filesystem::path> extra(manifests.begin(), manifests.end());
            const auto summary = cmd_ingest(cfg, extra, ingest_out);
            if (ingest_out.empty()) std::cout << io::Json{{"videos", summary.videos}, {"frames", summary.frames}}.dump(2) << "\n";
        } else if (synth->parsed()) {
            cmd_synthesize(cfg, qa_path, out_dir, &g_cancel);
        } else if (eval->parsed()) {
            cmd_eval(cfg, qa_path, out_dir, EvalCommandOptions{sweep, category_key}, &g_cancel);
        } else if (lint->parsed()) {
            const auto report = cmd_lint(corpus_path, lint_out);
            if (lint_out.empty()) {
                for (const auto& v : report.records) {
                    std::cout << v.line << " " << (v.item_id.empty() ? "-" : v.item_id) << " " << v.verdict;
                    for (const auto& e : v.errors) std::cout << " | " << e;
                    for (const auto& w : v.warnings) std::cout << " | warning: " << w;
                    std::cout << "\n";
                }
            }
        } else if (stats->parsed()) {
            const auto s = cmd_stats(corpus_path, reports_path ? std::optional<std::filesystem::path>(*reports_path) : std::nullopt,
                                     stats_out);
            if (stats_out.empty()) std::cout << io::to_json(s).dump(2) << "\n";
        }
        return g_cancel.load() ? 130 : 0;
    } catch (const Error& e) {
        spdlog::error("{}", e.what());
        return 1;
    } catch (const std::exception& e) {
        spdlog::error("unexpected: {}", e.what());
        return 1;
    }
}
