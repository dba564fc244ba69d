#pragma once

// Inference-mode evaluation: answer extraction and matching, accuracy, tool-call rate,
// category splits and the failure-injection sweep.

#include "framecot/engine.hpp"
#include "framecot/trace_model.hpp"

#include <atomic>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace framecot {

// Versioned so that scores from different matcher revisions are never compared silently.
inline constexpr std::string_view kMatcherVersion = "match-v1";

// Trimmed answer content, or "" when the trace has no answer.
std::string extract_answer(const InterleavedTrace& trace);

// Case-folded, whitespace-collapsed, terminal punctuation stripped.
std::string normalize_answer(std::string_view text);

// Index of the gold choice for multiple-choice items (gold given as a label "2" or as
// the choice text), nullopt for free-form items. Throws InvalidArgument when the gold
// answer does not resolve to exactly one choice.
std::optional<std::size_t> gold_choice_index(const QaItem& item);

// Multiple choice: the extracted text names exactly one choice, by containing its text or
// by starting with its index label ("2", "2:", "2.", "2)", "(2)"). When one matched choice
// text contains another, the shorter one is dropped. Free form: normalized equality.
// Throws AmbiguousMatch when two or more choices remain.
bool match_answer(std::string_view extracted, const QaItem& item);

struct ItemResult {
    std::string item_id;
    std::string extracted_answer;
    bool correct = false;
    std::optional<ToolKind> tool_used;
    std::string status;  // engine status, or "error"
    std::optional<std::string> error;
    std::string category;
    bool failure_injected = false;
    double latency_ms = 0.0;
};

struct Tally {
    std::size_t correct = 0;
    std::size_t total = 0;
    double accuracy() const { return total == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(total); }
};

struct EvalResult {
    double failure_injection_rate = 0.0;
    std::vector<ItemResult> items;  // sorted by item_id
    std::size_t total = 0;
    std::size_t correct = 0;
    std::size_t with_tool = 0;
    double accuracy = 0.0;
    double call_rate = 0.0;
    std::map<std::string, Tally> per_category;
    std::map<std::string, Tally> per_tool;  // "retrieve", "generate", "none"
    bool incomplete = false;                // cancelled before every item ran
};

struct EvalOptions {
    int workers = 1;
    std::string category_key = "category";  // "category" or "source_dataset"
    const std::atomic<bool>* cancel = nullptr;
};

// Never throws for item-level failures: they are scored incorrect with a reason.
ItemResult score_item(const QaItem& item, const Engine& engine, const EvalOptions& opts);

EvalResult aggregate(std::vector<ItemResult> items, double failure_injection_rate);

// Throws InvalidArgument for an empty item list.
EvalResult evaluate(const std::vector<QaItem>& items, const Engine& engine, const EvalOptions& opts);

// One EvalResult per rate, each from an engine whose failure_injection_rate is that rate.
std::vector<EvalResult> rate_sweep(const std::vector<QaItem>& items, const EngineConfig& base, const FrameStore& store,
                                   Backends backends, const std::vector<double>& rates, const EvalOptions& opts);

}  // namespace framecot
