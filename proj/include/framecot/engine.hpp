#pragma once

// Two-round interleaved reasoning for one question.
//
// Round 1 runs until the first </retrieve>, </generate> or </answer> (or end of text).
// A retrieve call fetches adjacent frames at the retrieval rate and inserts the middle
// one; a generate call first retrieves with the generation query, then conditions the
// generator on that middle frame and inserts the result. Round 2 continues from the kept
// round-1 text plus the frames block and may not call tools again.

#include "framecot/backends.hpp"
#include "framecot/frame_store.hpp"
#include "framecot/tag_parser.hpp"
#include "framecot/trace_model.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace framecot {

struct PromptTemplates {
    std::string round1;  // placeholders {question} {choices}
    std::string round2;  // placeholders {question} {choices} {pretext}

    static PromptTemplates defaults();
    static PromptTemplates from_files(const std::filesystem::path& round1, const std::filesystem::path& round2);
};

struct EngineConfig {
    double initial_fps = 1.0;
    double retrieval_fps = 3.0;
    PromptTemplates templates = PromptTemplates::defaults();
    double failure_injection_rate = 0.0;  // applied to generation queries only
    std::uint64_t rng_seed = 0;

    // Throws ConfigError.
    void validate() const;
};

enum class OutcomeStatus {
    Complete,      // answer present
    NoAnswer,      // the model stopped without an answer
    ToolInRound2,  // round-2 output tried to call a tool; round 2 discarded
};

std::string_view to_string(OutcomeStatus s) noexcept;

struct PhaseTimings {
    double round1_ms = 0.0;
    double tool_ms = 0.0;
    double round2_ms = 0.0;
};

struct EngineOutcome {
    std::string item_id;
    OutcomeStatus status = OutcomeStatus::NoAnswer;
    InterleavedTrace trace;
    std::optional<ToolKind> tool_used;
    std::string round1_raw;
    std::string round2_raw;
    std::vector<FrameRef> initial_frames;
    std::optional<std::string> generator_query;  // query actually sent to the generator
    bool failure_injected = false;
    PhaseTimings timings;
};

class Engine {
public:
    // The store's initial rate must equal cfg.initial_fps.
    Engine(EngineConfig cfg, const FrameStore& store, Backends backends);

    // Propagates backend errors and tag-grammar errors (MalformedTag, MissingThink, DanglingFrames).
    // A tool tag in round 2 yields status ToolInRound2 rather than an exception.
    EngineOutcome run(const QaItem& item, int attempt = 0) const;

    std::string round1_prompt(const QaItem& item) const;
    std::string round2_prompt(const QaItem& item, std::string_view pretext) const;

    const EngineConfig& config() const { return cfg_; }
    const FrameStore& store() const { return store_; }
    Backends backends() const { return backends_; }

private:
    EngineConfig cfg_;
    const FrameStore& store_;
    Backends backends_;
};

// Single-pass substitution of {name} placeholders; unknown names are left as written.
std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values);

// "0": "first",\n"1": "second", ... ; a note asking for free-form text when empty.
std::string format_choices(const std::vector<std::string>& choices);

// Uniform value in [0, 1) fixed by (seed, item_id).
double injection_draw(std::uint64_t seed, std::string_view item_id) noexcept;
bool injection_decision(double rate, std::uint64_t seed, std::string_view item_id) noexcept;

// Swaps the first word found in the flip table (red -> yellow, ...). Queries with no table
// word get a "not " prefix so that a perturbed query always differs from the original.
std::string flip_words(std::string_view query);
const std::map<std::string, std::string>& word_flip_table();

// flip_words(query) when injection_decision(rate, seed, item_id), otherwise query unchanged.
std::string inject_failure(std::string_view query, double rate, std::uint64_t seed, std::string_view item_id);

}  // namespace framecot
