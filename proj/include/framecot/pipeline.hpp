#pragma once

// SFT corpus construction: drive the engine in data-generation mode, apply the filter
// stack (answer, then similarity to the gold CoT, then format) with bounded regeneration,
// and emit records whose character-level loss masks exclude only frame payloads.

#include "framecot/backends.hpp"
#include "framecot/engine.hpp"
#include "framecot/trace_model.hpp"

#include <atomic>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace framecot {

// Identifies what text the similarity gate compares, recorded with every record.
inline constexpr std::string_view kSimilarityTextMode = "think_text+answer";

struct PipelineConfig {
    double similarity_threshold = 0.80;  // retained iff similarity > threshold
    int max_regenerations = 2;           // engine runs per item <= 1 + this
    bool require_gold_cot_for_similarity = true;
    std::size_t review_sample_size = 100;
    std::uint64_t seed = 0;

    // Throws ConfigError.
    void validate() const;
};

struct SynthesisResult {
    std::optional<SftRecord> record;
    QualityReport report;
    std::vector<FrameRef> generated_frames;  // frames whose bytes exist only in memory
};

// Plain text of the reasoning fed to the similarity gate: think text segments
// concatenated, then the answer, with tags, queries and frame placeholders dropped.
std::string similarity_text(const InterleavedTrace& trace);

SynthesisResult synthesize(const QaItem& item, const PipelineConfig& cfg, const Engine& engine, Embedder& embedder);

// Spans partition [0, target.size()); each frame placeholder is one excluded span,
// everything else (tags, queries, <frames> delimiters included) is included.
// Throws the tag-grammar errors when the target does not parse.
std::vector<MaskSpan> build_mask(std::string_view target);

// Mean of -log p over included positions (0 when nothing is included).
// Throws LengthMismatch, or InvalidArgument for probabilities outside (0, 1].
double reference_loss(const SftRecord& record, std::span<const double> probs);

struct CorpusStats {
    std::size_t total = 0;  // retained records
    std::size_t with_frames = 0;
    std::size_t retrievals = 0;
    std::size_t generations = 0;
    std::size_t text_only = 0;
    std::map<std::string, std::size_t> per_source;
    std::size_t items_seen = 0;  // quality reports
    std::map<std::string, std::size_t> rejected;
    double frame_rate = 0.0;  // with_frames / total, 0 for an empty corpus

    // Associative, commutative merge of partial counters; recomputes frame_rate.
    void merge(const CorpusStats& other);
    bool operator==(const CorpusStats&) const = default;
};

CorpusStats corpus_stats(std::span<const SftRecord> records, std::span<const QualityReport> reports);

// Sorted indices of a seeded uniform sample of min(n, count) items.
std::vector<std::size_t> review_sample(std::size_t count, std::size_t n, std::uint64_t seed);

struct CorpusRun {
    std::vector<SftRecord> records;  // input order
    std::vector<QualityReport> reports;
    std::vector<FrameRef> generated_frames;
    CorpusStats stats;
    bool incomplete = false;
};

CorpusRun synthesize_corpus(const std::vector<QaItem>& items, const PipelineConfig& cfg, const Engine& engine,
                            Embedder& embedder, int workers = 1, const std::atomic<bool>* cancel = nullptr);

}  // namespace framecot
