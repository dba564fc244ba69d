#include "framecot/pipeline.hpp"

#include "framecot/error.hpp"
#include "framecot/eval_harness.hpp"
#include "framecot/parallel.hpp"
#include "framecot/tag_parser.hpp"
#include "framecot/text_util.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace framecot {

void PipelineConfig::validate() const {
    if (!(similarity_threshold > 0.0 && similarity_threshold <= 1.0)) {
        fail(ErrorCode::ConfigError, "similarity_threshold must lie in (0, 1]");
    }
    if (max_regenerations < 0) fail(ErrorCode::ConfigError, "max_regenerations must be >= 0");
}

std::string similarity_text(const InterleavedTrace& trace) {
    std::string text;
    for (const auto& seg : trace.think) {
        if (const auto* t = std::get_if<TextSegment>(&seg)) text += t->content;
    }
    std::string out(trim(text));
    if (trace.answer) {
        auto answer = trim(*trace.answer);
        if (!answer.empty()) {
            if (!out.empty()) out += ' ';
            out += answer;
        }
    }
    return out;
}

namespace {

QualityReport rejected(QualityReport rep, RejectReason reason, std::string detail = {}) {
    rep.retained = false;
    rep.reject_reason = reason;
    rep.detail = std::move(detail);
    return rep;
}

}  // namespace

SynthesisResult synthesize(const QaItem& item, const PipelineConfig& cfg, const Engine& engine, Embedder& embedder) {
    SynthesisResult result;
    QualityReport rep;
    rep.item_id = item.item_id;

    if (!item.gold_cot && cfg.require_gold_cot_for_similarity) {
        rep.attempts = 0;
        result.report = rejected(rep, RejectReason::ConfigViolation, "similarity gate requires gold_cot");
        return result;
    }

    // Answer gate with regeneration. A trace that breaks the tag grammar yields no
    // answer and is regenerated like a wrong one.
    std::optional<EngineOutcome> chosen;
    std::optional<EngineOutcome> last;
    std::string last_issue;
    const int max_attempts = 1 + cfg.max_regenerations;
    for (int attempt = 0; attempt < max_attempts && !chosen; ++attempt) {
        rep.attempts = attempt + 1;
        EngineOutcome outcome;
        try {
            outcome = engine.run(item, attempt);
        } catch (const Error& e) {
            if (e.is_format_error()) {
                last_issue = e.what();
                continue;
            }
            result.report = rejected(rep, RejectReason::BackendError, e.what());
            return result;
        }
        bool correct = false;
        try {
            correct = match_answer(extract_answer(outcome.trace), item);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::InvalidArgument) {
                result.report = rejected(rep, RejectReason::ConfigViolation, e.what());
                return result;
            }
            last_issue = e.what();  // ambiguous answer
        }
        if (correct) {
            chosen = std::move(outcome);
        } else {
            last = std::move(outcome);
        }
    }

    if (!chosen) {
        rep.answer_correct = false;
        rep.format_ok = last ? check_format(last->trace) : false;
        result.report = rejected(rep, RejectReason::WrongAnswer, last_issue);
        return result;
    }

    const InterleavedTrace& trace = chosen->trace;
    rep.answer_correct = true;
    rep.format_ok = check_format(trace);

    if (item.gold_cot) {
        const std::string text = similarity_text(trace);
        double sim = 0.0;
        if (!is_blank(text) && !is_blank(*item.gold_cot)) {
            try {
                auto a = embedder.embed(EmbedRequest{text});
                auto b = embedder.embed(EmbedRequest{*item.gold_cot});
                sim = cosine_similarity(a, b);
            } catch (const Error& e) {
                result.report = rejected(rep, RejectReason::BackendError, e.what());
                return result;
            }
        }
        rep.similarity = sim;
        if (!(sim > cfg.similarity_threshold)) {
            result.report = rejected(rep, RejectReason::LowSimilarity);
            return result;
        }
    }

    if (!rep.format_ok) {
        result.report = rejected(rep, RejectReason::BadFormat, trace_violation(trace).value_or("missing think or answer"));
        return result;
    }

    rep.retained = true;
    result.report = rep;

    SftRecord record;
    record.item_id = item.item_id;
    record.initial_frames = chosen->initial_frames;
    record.question = item.question;
    record.choices = item.choices;
    record.target = serialize(trace);
    record.mask_spans = build_mask(record.target);
    record.provenance.attempts = rep.attempts;
    record.provenance.similarity = rep.similarity;
    record.provenance.source_dataset = item.source_dataset;
    record.provenance.tool_used = chosen->tool_used;
    record.provenance.matcher_version = std::string(kMatcherVersion);
    record.provenance.similarity_text = std::string(kSimilarityTextMode);
    result.record = std::move(record);

    for (const auto& f : trace_frames(trace)) {
        if (std::holds_alternative<InlineBytes>(f.content)) result.generated_frames.push_back(f);
    }
    return result;
}

std::vector<MaskSpan> build_mask(std::string_view target) {
    (void)parse_trace(target);

    std::vector<MaskSpan> spans;
    std::size_t cursor = 0;
    std::size_t pos = 0;
    while ((pos = target.find(tags::kFramesOpen, pos)) != std::string_view::npos) {
        std::size_t p = pos + tags::kFramesOpen.size();
        const std::size_t close = target.find(tags::kFramesClose, p);
        while (p < close) {
            const std::size_t end = target.find(tags::kPlaceholderClose, p) + tags::kPlaceholderClose.size();
            if (p > cursor) spans.push_back({cursor, p, true});
            spans.push_back({p, end, false});
            cursor = p = end;
        }
        pos = close + tags::kFramesClose.size();
    }
    if (cursor < target.size()) spans.push_back({cursor, target.size(), true});
    return spans;
}

double reference_loss(const SftRecord& record, std::span<const double> probs) {
    if (probs.size() != record.target.size()) {
        fail(ErrorCode::LengthMismatch, "expected " + std::to_string(record.target.size()) + " probabilities, got " +
                                            std::to_string(probs.size()));
    }
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& span : record.mask_spans) {
        for (std::size_t t = span.start; t < span.end; ++t) {
            const double p = probs[t];
            if (!(p > 0.0 && p <= 1.0)) fail(ErrorCode::InvalidArgument, "probability outside (0, 1]");
            if (!span.included) continue;
            sum -= std::log(p);
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

void CorpusStats::merge(const CorpusStats& other) {
    total += other.total;
    with_frames += other.with_frames;
    retrievals += other.retrievals;
    generations += other.generations;
    text_only += other.text_only;
    for (const auto& [k, v] : other.per_source) per_source[k] += v;
    items_seen += other.items_seen;
    for (const auto& [k, v] : other.rejected) rejected[k] += v;
    frame_rate = total == 0 ? 0.0 : static_cast<double>(with_frames) / static_cast<double>(total);
}

CorpusStats corpus_stats(std::span<const SftRecord> records, std::span<const QualityReport> reports) {
    CorpusStats s;
    for (const auto& r : records) {
        const InterleavedTrace trace = parse_trace(r.target);
        ++s.total;
        ++s.per_source[r.provenance.source_dataset];
        const auto call = first_tool_call(trace);
        if (trace_frame_count(trace) > 0 && call) {
            ++s.with_frames;
            if (call->kind == ToolKind::Retrieve) {
                ++s.retrievals;
            } else {
                ++s.generations;
            }
        } else {
            ++s.text_only;
        }
    }
    for (const auto& rep : reports) {
        ++s.items_seen;
        if (!rep.retained && rep.reject_reason) ++s.rejected[std::string(to_string(*rep.reject_reason))];
    }
    s.frame_rate = s.total == 0 ? 0.0 : static_cast<double>(s.with_frames) / static_cast<double>(s.total);
    return s;
}

std::vector<std::size_t> review_sample(std::size_t count, std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> all(count);
    std::iota(all.begin(), all.end(), std::size_t{0});
    std::vector<std::size_t> out;
    std::mt19937_64 rng(seed);
    std::sample(all.begin(), all.end(), std::back_inserter(out), std::min(n, count), rng);
    return out;
}

CorpusRun synthesize_corpus(const std::vector<QaItem>& items, const PipelineConfig& cfg, const Engine& engine,
                            Embedder& embedder, int workers, const std::atomic<bool>* cancel) {
    cfg.validate();
    auto slots = parallel_map<SynthesisResult>(
        items.size(), workers, [&](std::size_t i) { return synthesize(items[i], cfg, engine, embedder); }, cancel);

    CorpusRun run;
    for (auto& slot : slots) {
        if (!slot) {
            run.incomplete = true;
            continue;
        }
        std::vector<SftRecord> one;
        if (slot->record) one.push_back(*slot->record);
        run.stats.merge(corpus_stats(one, std::span<const QualityReport>(&slot->report, 1)));
        if (slot->record) run.records.push_back(std::move(*slot->record));
        run.reports.push_back(std::move(slot->report));
        for (auto& f : slot->generated_frames) run.generated_frames.push_back(std::move(f));
    }
    return run;
}

}  // namespace framecot
