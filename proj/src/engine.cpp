#include "framecot/engine.hpp"

#include "framecot/digest.hpp"
#include "framecot/error.hpp"
#include "framecot/text_util.hpp"

#include <chrono>
#include <cctype>
#include <fstream>
#include <sstream>

namespace framecot {

namespace {
#include "default_templates.inc"

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
    return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::ConfigError, "cannot read template " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

PromptTemplates PromptTemplates::defaults() { return {kDefaultRound1Template, kDefaultRound2Template}; }

PromptTemplates PromptTemplates::from_files(const std::filesystem::path& round1, const std::filesystem::path& round2) {
    return {read_text(round1), read_text(round2)};
}

void EngineConfig::validate() const {
    if (!(initial_fps > 0.0)) fail(ErrorCode::ConfigError, "initial_fps must be positive");
    if (!(retrieval_fps >= initial_fps)) fail(ErrorCode::ConfigError, "retrieval_fps must be >= initial_fps");
    if (!(failure_injection_rate >= 0.0 && failure_injection_rate <= 1.0)) {
        fail(ErrorCode::ConfigError, "failure_injection_rate must lie in [0, 1]");
    }
    for (auto name : {"{question}", "{choices}"}) {
        if (templates.round1.find(name) == std::string::npos) {
            fail(ErrorCode::ConfigError, std::string("round-1 template lacks ") + name);
        }
    }
    for (auto name : {"{question}", "{choices}", "{pretext}"}) {
        if (templates.round2.find(name) == std::string::npos) {
            fail(ErrorCode::ConfigError, std::string("round-2 template lacks ") + name);
        }
    }
}

std::string_view to_string(OutcomeStatus s) noexcept {
    switch (s) {
        case OutcomeStatus::Complete: return "complete";
        case OutcomeStatus::NoAnswer: return "no_answer";
        case OutcomeStatus::ToolInRound2: return "tool_in_round2";
    }
    return "no_answer";
}

std::string render_template(std::string_view tmpl, const std::map<std::string, std::string>& values) {
    std::string out;
    out.reserve(tmpl.size());
    std::size_t i = 0;
    while (i < tmpl.size()) {
        if (tmpl[i] == '{') {
            auto close = tmpl.find('}', i + 1);
            if (close != std::string_view::npos) {
                auto it = values.find(std::string(tmpl.substr(i + 1, close - i - 1)));
                if (it != values.end()) {
                    out += it->second;
                    i = close + 1;
                    continue;
                }
            }
        }
        out.push_back(tmpl[i++]);
    }
    return out;
}

std::string format_choices(const std::vector<std::string>& choices) {
    if (choices.empty()) return "(none; answer in free-form text)";
    std::string out;
    for (std::size_t i = 0; i < choices.size(); ++i) {
        if (i > 0) out += "\n";
        out += "\"" + std::to_string(i) + "\": \"" + choices[i] + "\",";
    }
    return out;
}

double injection_draw(std::uint64_t seed, std::string_view item_id) noexcept {
    const std::uint64_t x = splitmix64(seed ^ splitmix64(fnv1a64(item_id)));
    return static_cast<double>(x >> 11) * 0x1.0p-53;
}

bool injection_decision(double rate, std::uint64_t seed, std::string_view item_id) noexcept {
    return injection_draw(seed, item_id) < rate;
}

const std::map<std::string, std::string>& word_flip_table() {
    static const std::map<std::string, std::string> kTable = [] {
        const std::pair<const char*, const char*> pairs[] = {
            {"red", "yellow"},  {"blue", "green"},  {"black", "white"}, {"left", "right"},   {"up", "down"},
            {"open", "closed"}, {"day", "night"},   {"big", "small"},   {"man", "woman"},    {"dog", "cat"},
            {"ball", "cube"},   {"car", "bus"},     {"empty", "full"},  {"wet", "dry"},      {"standing", "sitting"},
        };
        std::map<std::string, std::string> t;
        for (auto [a, b] : pairs) {
            t.emplace(a, b);
            t.emplace(b, a);
        }
        return t;
    }();
    return kTable;
}

std::string flip_words(std::string_view query) {
    const auto& table = word_flip_table();
    std::size_t i = 0;
    while (i < query.size()) {
        if (!std::isalpha(static_cast<unsigned char>(query[i]))) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < query.size() && std::isalpha(static_cast<unsigned char>(query[j]))) ++j;
        auto word = query.substr(i, j - i);
        auto it = table.find(to_lower(word));
        if (it != table.end()) {
            std::string replacement = it->second;
            if (std::isupper(static_cast<unsigned char>(word.front()))) {
                replacement.front() = static_cast<char>(std::toupper(static_cast<unsigned char>(replacement.front())));
            }
            return std::string(query.substr(0, i)) + replacement + std::string(query.substr(j));
        }
        i = j;
    }
    return "not " + std::string(query);
}

std::string inject_failure(std::string_view query, double rate, std::uint64_t seed, std::string_view item_id) {
    if (!(rate >= 0.0 && rate <= 1.0)) fail(ErrorCode::InvalidArgument, "injection rate must lie in [0, 1]");
    return injection_decision(rate, seed, item_id) ? flip_words(query) : std::string(query);
}

Engine::Engine(EngineConfig cfg, const FrameStore& store, Backends backends)
    : cfg_(std::move(cfg)), store_(store), backends_(backends) {
    cfg_.validate();
    if (store_.initial_fps() != cfg_.initial_fps) {
        fail(ErrorCode::ConfigError, "frame store initial fps differs from engine initial_fps");
    }
}

std::string Engine::round1_prompt(const QaItem& item) const {
    return render_template(cfg_.templates.round1, {{"question", item.question}, {"choices", format_choices(item.choices)}});
}

std::string Engine::round2_prompt(const QaItem& item, std::string_view pretext) const {
    return render_template(cfg_.templates.round2, {{"question", item.question},
                                                   {"choices", format_choices(item.choices)},
                                                   {"pretext", std::string(pretext)}});
}

EngineOutcome Engine::run(const QaItem& item, int attempt) const {
    EngineOutcome out;
    out.item_id = item.item_id;
    out.initial_frames = store_.initial_frames(item.video_id);

    // Round 1.
    auto t0 = Clock::now();
    ReasonRequest r1{out.initial_frames, round1_prompt(item), std::nullopt, item.item_id, attempt};
    out.round1_raw = backends_.reasoner.reason(r1);
    out.timings.round1_ms = elapsed_ms(t0);
    const ScanResult scan = scan_round1(out.round1_raw);

    if (!scan.extracted_query) {
        out.trace = parse_trace(scan.retained_prefix);
        out.status = out.trace.answer ? OutcomeStatus::Complete : OutcomeStatus::NoAnswer;
        return out;
    }

    // Tool dispatch.
    t0 = Clock::now();
    const ToolKind kind = scan.extracted_query->kind;
    const std::string& query = scan.extracted_query->query;
    out.tool_used = kind;
    RetrieveRequest rr{query, item.video_id, cfg_.retrieval_fps};
    FrameRef inserted = middle_frame(backends_.retriever.retrieve(rr));
    if (kind == ToolKind::Generate) {
        std::string gen_query = inject_failure(query, cfg_.failure_injection_rate, cfg_.rng_seed, item.item_id);
        out.failure_injected = gen_query != query;
        out.generator_query = gen_query;
        inserted = backends_.generator.generate(GenerateRequest{std::move(gen_query), inserted});
    }
    out.timings.tool_ms = elapsed_ms(t0);

    const std::string pretext = scan.retained_prefix + frames_block(std::span<const FrameRef>(&inserted, 1));
    const FrameResolver resolve = [&inserted](std::string_view hash) -> std::optional<FrameRef> {
        if (hash == inserted.hash) return inserted;
        return std::nullopt;
    };

    // Round 2: initial frames are resent along with the new one.
    t0 = Clock::now();
    ReasonRequest r2{out.initial_frames, round2_prompt(item, pretext), pretext, item.item_id, attempt};
    r2.frames.push_back(inserted);
    out.round2_raw = backends_.reasoner.reason(r2);
    out.timings.round2_ms = elapsed_ms(t0);

    const Round2Scan scan2 = scan_round2(out.round2_raw);
    if (scan2.contains_tool_tag) {
        out.trace = parse_trace(pretext, resolve);
        out.status = OutcomeStatus::ToolInRound2;
        return out;
    }
    out.trace = parse_trace(pretext + scan2.retained, resolve);
    out.status = out.trace.answer ? OutcomeStatus::Complete : OutcomeStatus::NoAnswer;
    return out;
}

}  // namespace framecot
