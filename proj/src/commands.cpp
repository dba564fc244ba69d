#include "framecot/commands.hpp"

#include "framecot/error.hpp"
#include "framecot/jsonl.hpp"
#include "framecot/remote_backends.hpp"
#include "framecot/tag_parser.hpp"

#include <spdlog/spdlog.h>

#include <charconv>
#include <regex>

namespace framecot {

Runtime::Runtime(const AppConfig& cfg, CallLog* log) : store_(cfg.engine.initial_fps, cfg.max_initial_frames) {
    cfg.validate();
    const auto summary = store_.ingest_manifests(cfg.manifests);
    spdlog::info("ingested {} videos, {} frames", summary.videos, summary.frames);
    if (cfg.backends.mode == "remote") {
        reasoner_ = std::make_unique<RemoteReasoner>(cfg.backends.reasoner, store_);
        retriever_ = std::make_unique<RemoteRetriever>(cfg.backends.retriever, store_);
        generator_ = std::make_unique<RemoteGenerator>(cfg.backends.generator, store_);
        embedder_ = std::make_unique<RemoteEmbedder>(cfg.backends.embedder);
        return;
    }
    if (cfg.backends.script.empty()) fail(ErrorCode::ConfigError, "mock mode needs backends.script");
    reasoner_ = std::make_unique<ScriptedReasoner>(ScriptedReasoner::from_file(cfg.backends.script, log));
    retriever_ = std::make_unique<KeywordRetriever>(store_, 3, log);
    generator_ = std::make_unique<WatermarkGenerator>(store_, log);
    embedder_ = std::make_unique<TrigramEmbedder>(TrigramEmbedder::kDefaultDimension, log);
}

Runtime::~Runtime() = default;

Backends Runtime::backends() const { return Backends{*reasoner_, *retriever_, *generator_, *embedder_}; }

namespace {

std::string dump(const io::Json& j) { return j.dump(2) + "\n"; }

io::Json summary_json(const IngestSummary& s) {
    io::Json j;
    j["videos"] = s.videos;
    j["frames"] = s.frames;
    return j;
}

}  // namespace

IngestSummary cmd_ingest(const AppConfig& cfg, const std::vector<std::filesystem::path>& extra_manifests,
                         const std::filesystem::path& out) {
    FrameStore store(cfg.engine.initial_fps, cfg.max_initial_frames);
    auto manifests = cfg.manifests;
    manifests.insert(manifests.end(), extra_manifests.begin(), extra_manifests.end());
    const IngestSummary summary = store.ingest_manifests(manifests);
    if (!out.empty()) io::write_atomic(out, dump(summary_json(summary)));
    return summary;
}

CorpusStats cmd_synthesize(const AppConfig& cfg, const std::filesystem::path& qa_path,
                           const std::filesystem::path& out_dir, const std::atomic<bool>* cancel) {
    const auto items = io::read_qa_jsonl(qa_path);
    Runtime rt(cfg);
    const Engine engine(cfg.engine, rt.store(), rt.backends());
    spdlog::info("synthesizing {} items with {} workers", items.size(), cfg.workers);
    CorpusRun run = synthesize_corpus(items, cfg.pipeline, engine, rt.embedder(), cfg.workers, cancel);

    std::vector<io::Json> corpus;
    for (const auto& r : run.records) corpus.push_back(io::to_json(r));
    std::vector<io::Json> reports;
    for (const auto& r : run.reports) reports.push_back(io::to_json(r));
    std::vector<io::Json> review;
    for (auto i : review_sample(run.records.size(), cfg.pipeline.review_sample_size, cfg.pipeline.seed)) {
        review.push_back(corpus[i]);
    }
    for (const auto& f : run.generated_frames) {
        if (const auto* bytes = std::get_if<InlineBytes>(&f.content)) io::write_atomic(out_dir / "frames" / f.hash, bytes->bytes);
    }
    io::write_atomic(out_dir / "corpus.jsonl", io::to_jsonl(corpus));
    io::write_atomic(out_dir / "reports.jsonl", io::to_jsonl(reports));
    io::write_atomic(out_dir / "review_sample.jsonl", io::to_jsonl(review));
    io::Json stats = io::to_json(run.stats);
    stats["incomplete"] = run.incomplete;
    io::write_atomic(out_dir / "stats.json", dump(stats));
    if (run.incomplete) spdlog::warn("cancelled: outputs cover {} of {} items", run.reports.size(), items.size());
    spdlog::info("retained {} of {} items, frame_rate {:.6f}", run.stats.total, run.stats.items_seen, run.stats.frame_rate);
    return run.stats;
}

std::string rate_label(double rate) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, rate);
    return std::string(buf, ptr);
}

namespace {

void write_eval(const EvalResult& res, const std::filesystem::path& summary, const std::filesystem::path& items) {
    std::vector<io::Json> rows;
    for (const auto& r : res.items) rows.push_back(io::to_json(r));
    io::write_atomic(items, io::to_jsonl(rows));
    io::write_atomic(summary, dump(io::summary_json(res)));
}

}  // namespace

std::vector<EvalResult> cmd_eval(const AppConfig& cfg, const std::filesystem::path& qa_path,
                                 const std::filesystem::path& out_dir, const EvalCommandOptions& opts,
                                 const std::atomic<bool>* cancel) {
    if (opts.category_key != "category" && opts.category_key != "source_dataset") {
        fail(ErrorCode::InvalidArgument, "--category-key must be category or source_dataset");
    }
    for (double r : opts.rate_sweep) {
        if (!(r >= 0.0 && r <= 1.0)) fail(ErrorCode::InvalidArgument, "sweep rates must lie in [0, 1]");
    }
    const auto items = io::read_qa_jsonl(qa_path);
    Runtime rt(cfg);
    EvalOptions eo;
    eo.workers = cfg.workers;
    eo.category_key = opts.category_key;
    eo.cancel = cancel;

    std::vector<EvalResult> results;
    if (opts.rate_sweep.empty()) {
        const Engine engine(cfg.engine, rt.store(), rt.backends());
        results.push_back(evaluate(items, engine, eo));
        write_eval(results.back(), out_dir / "summary.json", out_dir / "items.jsonl");
    } else {
        results = rate_sweep(items, cfg.engine, rt.store(), rt.backends(), opts.rate_sweep, eo);
        for (const auto& res : results) {
            const std::string label = rate_label(res.failure_injection_rate);
            write_eval(res, out_dir / ("summary-r" + label + ".json"), out_dir / ("items-r" + label + ".jsonl"));
        }
    }
    for (const auto& res : results) {
        spdlog::info("rate {}: accuracy {:.4f}, call_rate {:.4f} over {} items", res.failure_injection_rate, res.accuracy,
                     res.call_rate, res.total);
    }
    return results;
}

bool query_mentions_timestamp(std::string_view query) {
    static const std::regex pattern(
        R"((\b\d+(\.\d+)?\s*(s|sec|secs|second|seconds|ms|min|mins|minute|minutes|h|hr|hrs|hour|hours)\b)|(\b\d{1,2}:\d{2}\b))",
        std::regex::icase);
    return std::regex_search(query.begin(), query.end(), pattern);
}

LintVerdict lint_record(std::string_view line, std::size_t line_no) {
    LintVerdict v;
    v.line = line_no;
    SftRecord record;
    try {
        record = io::sft_from_json(io::Json::parse(line));
    } catch (const std::exception& e) {
        v.verdict = "parse_failure";
        v.errors.push_back(std::string("record: ") + e.what());
        return v;
    }
    v.item_id = record.item_id;
    InterleavedTrace trace;
    try {
        trace = parse_trace(record.target);
    } catch (const Error& e) {
        v.verdict = "parse_failure";
        v.errors.push_back(e.what());
        return v;
    }
    if (!trace.think_closed) v.errors.push_back("think block not closed");
    if (!trace.answer) v.errors.push_back("missing answer");
    if (auto violation = trace_violation(trace)) v.errors.push_back(*violation);
    if (record.mask_spans != build_mask(record.target)) v.errors.push_back("mask spans do not match the target");
    for (const auto& seg : trace.think) {
        if (const auto* call = std::get_if<ToolCall>(&seg); call && query_mentions_timestamp(call->query)) {
            v.warnings.push_back("query mentions a timestamp: \"" + std::string(call->trimmed_query()) + "\"");
        }
    }
    v.verdict = v.errors.empty() ? "ok" : "bad_format";
    return v;
}

LintReport cmd_lint(const std::filesystem::path& corpus, const std::filesystem::path& out) {
    LintReport report;
    std::size_t n = 0;
    for (const auto& line : io::read_lines(corpus)) {
        auto v = lint_record(line, ++n);
        if (v.verdict == "ok") ++report.ok;
        if (v.verdict == "bad_format") ++report.bad_format;
        if (v.verdict == "parse_failure") ++report.parse_failure;
        report.warnings += v.warnings.size();
        report.records.push_back(std::move(v));
    }
    if (!out.empty()) {
        io::Json j;
        j["records"] = report.records.size();
        j["ok"] = report.ok;
        j["bad_format"] = report.bad_format;
        j["parse_failure"] = report.parse_failure;
        j["warnings"] = report.warnings;
        j["verdicts"] = io::Json::array();
        for (const auto& v : report.records) {
            j["verdicts"].push_back({{"line", v.line},
                                     {"item_id", v.item_id},
                                     {"verdict", v.verdict},
                                     {"errors", v.errors},
                                     {"warnings", v.warnings}});
        }
        io::write_atomic(out, dump(j));
    }
    spdlog::info("lint: {} records, {} ok, {} bad_format, {} parse_failure, {} warnings", report.records.size(), report.ok,
                 report.bad_format, report.parse_failure, report.warnings);
    return report;
}

CorpusStats cmd_stats(const std::filesystem::path& corpus, const std::optional<std::filesystem::path>& reports,
                      const std::filesystem::path& out) {
    const auto records = io::read_corpus_jsonl(corpus);
    std::vector<QualityReport> reps;
    if (reports) reps = io::read_reports_jsonl(*reports);
    const CorpusStats stats = corpus_stats(records, reps);
    if (!out.empty()) io::write_atomic(out, dump(io::to_json(stats)));
    return stats;
}

}  // namespace framecot
