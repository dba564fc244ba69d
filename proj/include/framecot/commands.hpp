#pragma once

// Subcommand bodies behind the framecot executable. Each writes its outputs atomically
// and throws framecot::Error on fatal problems.

#include "framecot/config.hpp"
#include "framecot/eval_harness.hpp"
#include "framecot/frame_store.hpp"
#include "framecot/mock_backends.hpp"
#include "framecot/pipeline.hpp"

#include <atomic>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace framecot {

// Store plus owned backends for one process.
class Runtime {
public:
    // Ingests cfg.manifests and builds mock or remote backends. Throws BadManifest, ConfigError.
    explicit Runtime(const AppConfig& cfg, CallLog* log = nullptr);
    ~Runtime();

    const FrameStore& store() const { return store_; }
    Backends backends() const;
    Embedder& embedder() const { return *embedder_; }

private:
    FrameStore store_;
    std::unique_ptr<Reasoner> reasoner_;
    std::unique_ptr<Retriever> retriever_;
    std::unique_ptr<Generator> generator_;
    std::unique_ptr<Embedder> embedder_;
};

// Summary JSON to `out`, or returned only when out is empty.
IngestSummary cmd_ingest(const AppConfig& cfg, const std::vector<std::filesystem::path>& extra_manifests,
                         const std::filesystem::path& out);

// Writes corpus.jsonl, reports.jsonl, stats.json, review_sample.jsonl and frames/<hash>
// (bytes of generated frames) into out_dir.
CorpusStats cmd_synthesize(const AppConfig& cfg, const std::filesystem::path& qa_path,
                           const std::filesystem::path& out_dir, const std::atomic<bool>* cancel = nullptr);

struct EvalCommandOptions {
    std::vector<double> rate_sweep;  // empty: a single run at the configured rate
    std::string category_key = "category";
};

// Single run: summary.json + items.jsonl. Sweep: summary-r<rate>.json + items-r<rate>.jsonl per rate.
std::vector<EvalResult> cmd_eval(const AppConfig& cfg, const std::filesystem::path& qa_path,
                                 const std::filesystem::path& out_dir, const EvalCommandOptions& opts,
                                 const std::atomic<bool>* cancel = nullptr);

struct LintVerdict {
    std::size_t line = 0;  // 1-based record number
    std::string item_id;
    std::string verdict;  // "ok", "bad_format", "parse_failure"
    std::vector<std::string> errors;
    std::vector<std::string> warnings;
};

struct LintReport {
    std::vector<LintVerdict> records;
    std::size_t ok = 0;
    std::size_t bad_format = 0;
    std::size_t parse_failure = 0;
    std::size_t warnings = 0;
};

// Queries mentioning a time ("2 seconds", "at 0:15", "3s") draw a warning.
bool query_mentions_timestamp(std::string_view query);

LintVerdict lint_record(std::string_view line, std::size_t line_no);

// Per-record problems never make this throw; only an unreadable file does.
LintReport cmd_lint(const std::filesystem::path& corpus, const std::filesystem::path& out);

// Recounts a corpus (and optionally its reports file); stats JSON to `out` when given.
CorpusStats cmd_stats(const std::filesystem::path& corpus, const std::optional<std::filesystem::path>& reports,
                      const std::filesystem::path& out);

// Shortest decimal spelling of a sweep rate, as used in output file names.
std::string rate_label(double rate);

}  // namespace framecot
