// Acceptance run: one PASS/FAIL line per criterion, mock backends only.
//   framecot_acceptance            all criteria
//   framecot_acceptance --only 7   one criterion

#include "testkit.hpp"

#include "framecot/commands.hpp"
#include "framecot/config.hpp"
#include "framecot/digest.hpp"
#include "framecot/error.hpp"
#include "framecot/eval_harness.hpp"
#include "framecot/jsonl.hpp"
#include "framecot/pipeline.hpp"

#include <spdlog/spdlog.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>

using namespace framecot;
using namespace framecot::testkit;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::string block(const std::string& hash) { return "<frames>" + frame_placeholder(hash) + "</frames>"; }

std::string generated_hash(std::size_t cond_index, const std::string& query) {
    return sha256_hex(frame_bytes("kitchen", cond_index) + WatermarkGenerator::watermark(query));
}

// ---------------------------------------------------------------- 1 and 2

struct Scenario {
    std::string name;
    std::string round1;
    std::string round2;
    std::string expected;  // hand-composed serialized trace, or the error code name
    bool expect_error = false;
    bool generate = false;
};

std::vector<Scenario> scenarios(const World& w) {
    const auto mailbox = w.hash("kitchen", 7);
    const auto dog = w.hash("kitchen", 16);
    const auto gen_dog = generated_hash(16, "a dog chases a ball");
    const auto gen_mail = generated_hash(7, "a red mailbox in snow");
    return {
        {"retrieve", "<think>Look.<retrieve>a red mailbox</retrieve>", "Red.</think>\n<answer>0</answer>",
         "<think>Look.<retrieve>a red mailbox</retrieve>" + block(mailbox) + "Red.</think>\n<answer>0</answer>"},
        {"retrieve, round-1 tail dropped", "<think>Look.<retrieve>a red mailbox</retrieve>Red.</think><answer>1</answer>",
         "Red.</think><answer>0</answer>",
         "<think>Look.<retrieve>a red mailbox</retrieve>" + block(mailbox) + "Red.</think><answer>0</answer>"},
        {"retrieve, round-2 tail dropped", "<think><retrieve>dog ball yard</retrieve>", "A dog.</think><answer>1</answer>\nmore",
         "<think><retrieve>dog ball yard</retrieve>" + block(dog) + "A dog.</think><answer>1</answer>"},
        {"retrieve, padded query", "<think>Hm.<retrieve>  a dog chases  </retrieve>", "Yes.</think> <answer> 1 </answer>",
         "<think>Hm.<retrieve>  a dog chases  </retrieve>" + block(dog) + "Yes.</think> <answer> 1 </answer>"},
        {"generate", "<think>Imagine.<generate>a dog chases a ball</generate>", "Then.</think><answer>1</answer>",
         "<think>Imagine.<generate>a dog chases a ball</generate>" + block(gen_dog) + "Then.</think><answer>1</answer>", false,
         true},
        {"generate, other video region", "<think>Suppose.<generate>a red mailbox in snow</generate>",
         "Cold.</think>\n<answer>0</answer>",
         "<think>Suppose.<generate>a red mailbox in snow</generate>" + block(gen_mail) + "Cold.</think>\n<answer>0</answer>",
         false, true},
        {"text-only", "<think>Obvious.</think><answer>0</answer>", "unused", "<think>Obvious.</think><answer>0</answer>"},
        {"text-only, tool tag after answer", "<think>Sure.</think>\n<answer>1</answer><retrieve>x</retrieve>", "unused",
         "<think>Sure.</think>\n<answer>1</answer>"},
        {"no-answer, round 1", "<think>I cannot tell", "unused", "<think>I cannot tell"},
        {"no-answer, round 2", "<think><retrieve>a red mailbox</retrieve>", "Still unsure.</think>",
         "<think><retrieve>a red mailbox</retrieve>" + block(mailbox) + "Still unsure.</think>"},
        {"tool-in-round-2 after retrieve", "<think><retrieve>a red mailbox</retrieve>",
         "Again <retrieve>dog</retrieve></think><answer>0</answer>",
         "<think><retrieve>a red mailbox</retrieve>" + block(mailbox)},
        {"tool-in-round-2 after generate", "<think>What if.<generate>a dog chases a ball</generate>",
         "<generate>more</generate>", "<think>What if.<generate>a dog chases a ball</generate>" + block(gen_dog), false, true},
        {"malformed round 1, stray close", "<think>oops</retrieve>", "", "MalformedTag", true},
        {"malformed round 1, kind mismatch", "<think><retrieve>x</generate>", "", "MalformedTag", true},
    };
}

struct ScenarioRun {
    std::string serialized;
    std::string error;
    std::vector<CallRecord> calls;
};

ScenarioRun run_scenario(const World& w, const Scenario& s) {
    CallLog log;
    MockBackends mb(w, {{"q", {{s.round1, s.round2}}}}, &log);
    Engine engine({}, w.store, mb.handles());
    ScenarioRun out;
    try {
        out.serialized = serialize(engine.run(make_item("q", "kitchen", "What is shown?", {"red", "blue"}, "0")).trace);
    } catch (const Error& e) {
        out.error = e.code() == ErrorCode::MalformedTag ? "MalformedTag" : e.what();
    }
    out.calls = log.snapshot();
    return out;
}

Verdict c1_engine_equivalence() {
    World w;
    const auto start = std::chrono::steady_clock::now();
    const auto all = scenarios(w);
    std::size_t ok = 0;
    std::string first_bad;
    for (const auto& s : all) {
        const auto r = run_scenario(w, s);
        const bool good = s.expect_error ? r.error == s.expected : r.error.empty() && r.serialized == s.expected;
        if (good) ++ok;
        if (!good && first_bad.empty()) first_bad = "; first mismatch: " + s.name;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return {ok == all.size() && all.size() >= 12 && secs < 5.0,
            fmt("%zu/%zu scenarios byte-identical in %.3f s", ok, all.size(), secs) + first_bad};
}

Verdict c2_generate_ordering() {
    World w;
    std::size_t checked = 0, ok = 0;
    for (const auto& s : scenarios(w)) {
        if (!s.generate) continue;
        ++checked;
        const auto r = run_scenario(w, s);
        std::ptrdiff_t ri = -1, gi = -1;
        for (std::size_t i = 0; i < r.calls.size(); ++i) {
            if (r.calls[i].backend == "retrieve" && ri < 0) ri = static_cast<std::ptrdiff_t>(i);
            if (r.calls[i].backend == "generate" && gi < 0) gi = static_cast<std::ptrdiff_t>(i);
        }
        if (ri < 0 || gi < 0 || ri > gi) continue;
        const auto& returned = r.calls[static_cast<std::size_t>(ri)].hashes;
        const auto& cond = r.calls[static_cast<std::size_t>(gi)].hashes;
        if (returned.empty() || cond.size() != 1) continue;
        if (cond[0] == returned[(returned.size() - 1) / 2]) ++ok;
    }
    return {checked > 0 && ok == checked, fmt("%zu/%zu generate scenarios: retrieve before generate, conditioned on middle frame", ok, checked)};
}

// ---------------------------------------------------------------- 3 and 4

Verdict c3_truncation() {
    std::mt19937_64 rng(31);
    std::size_t with_marker = 0, violations = 0;
    const std::string markers[] = {"</retrieve>", "</generate>", "</answer>"};
    for (int i = 0; i < 10000; ++i) {
        const std::string text = random_text(rng, 60, true);
        const std::string suffix = random_text(rng, 60, true);
        std::optional<ScanResult> base;
        std::string base_err;
        try {
            base = scan_round1(text);
        } catch (const Error& e) {
            base_err = e.what();
        }
        // earliest marker position, found by brute force
        std::size_t first = std::string::npos;
        for (const auto& m : markers) first = std::min(first, text.find(m));
        if (first == std::string::npos) continue;
        ++with_marker;
        std::optional<ScanResult> extended;
        std::string ext_err;
        try {
            extended = scan_round1(text + suffix);
        } catch (const Error& e) {
            ext_err = e.what();
        }
        if (base.has_value() != extended.has_value() || (base && *base != *extended) || base_err != ext_err) ++violations;
        if (base) {
            std::size_t end = first;
            for (const auto& m : markers) {
                if (text.compare(first, m.size(), m) == 0) end = first + m.size();
            }
            if (base->retained_prefix != text.substr(0, end)) ++violations;
        }
    }
    return {violations == 0 && with_marker > 0,
            fmt("10000 texts, %zu with a stop marker, %zu violations", with_marker, violations)};
}

Verdict c4_round_trip() {
    std::mt19937_64 rng(41);
    std::size_t bad = 0;
    for (int i = 0; i < 10000; ++i) {
        const auto t = random_valid_trace(rng);
        try {
            if (parse_trace(serialize(t)) != t) ++bad;
        } catch (const Error&) {
            ++bad;
        }
    }
    return {bad == 0, fmt("10000 traces, %zu round-trip failures", bad)};
}

// ---------------------------------------------------------------- 5 and 6

// Planted cosine per item: texts carrying "R<n>." embed at cosine planted[n] from gold texts.
class PlantedEmbedder final : public Embedder {
public:
    explicit PlantedEmbedder(std::vector<double> planted) : planted_(std::move(planted)) {}
    std::vector<double> embed(const EmbedRequest& req) override {
        if (req.text.rfind("gold ", 0) == 0) return {1.0, 0.0};
        const auto pos = req.text.find('R');
        const auto dot = req.text.find('.', pos);
        if (pos == std::string::npos || dot == std::string::npos) return {0.0, 1.0};
        return at_cosine(planted_.at(std::stoul(req.text.substr(pos + 1, dot - pos - 1))));
    }

private:
    std::vector<double> planted_;
};

struct PlantedTurn {
    bool correct;
    bool well_formed;
    bool retrieve;
};

struct PlantedItem {
    std::vector<PlantedTurn> turns;
    double cosine;
    bool has_gold_cot;
};

std::vector<PlantedItem> planted_corpus() {
    std::mt19937_64 rng(51);
    const double cosines[] = {0.5, 0.79, 0.7999999, 0.8, 0.8000001, 0.81, 0.9, 1.0};
    std::vector<PlantedItem> items;
    for (int i = 0; i < 200; ++i) {
        PlantedItem p;
        const auto n = 1 + rng() % 4;
        for (std::size_t t = 0; t < n; ++t) p.turns.push_back({rng() % 2 == 0, rng() % 5 != 0, rng() % 3 == 0});
        p.cosine = cosines[rng() % std::size(cosines)];
        p.has_gold_cot = rng() % 15 != 0;
        items.push_back(p);
    }
    // fixed anchors: the exact boundary, and a reasoner that is always wrong
    items[0] = {{{true, true, false}}, 0.8, true};
    items[1] = {{{false, true, false}}, 1.0, true};
    items[2] = {{{false, true, true}, {false, true, false}, {false, true, true}, {true, true, false}}, 1.0, true};
    return items;
}

std::pair<std::string, std::string> turn_text(std::size_t i, const PlantedTurn& t) {
    const std::string answer = t.correct ? "0" : "1";
    const std::string tail = t.well_formed ? "</think><answer>" + answer + "</answer>" : "<answer>" + answer + "</answer>";
    if (t.retrieve) return {"<think>R" + std::to_string(i) + ".<retrieve>a red mailbox</retrieve>", "Seen." + tail};
    return {"<think>R" + std::to_string(i) + "." + tail, ""};
}

struct OracleDecision {
    bool retained;
    std::string reason;
    int attempts;
};

// Brute force over the planted labels; knows nothing of the pipeline's code.
OracleDecision oracle(const PlantedItem& p, int max_regenerations, double threshold) {
    if (!p.has_gold_cot) return {false, "config_violation", 0};
    for (int attempt = 0; attempt <= max_regenerations; ++attempt) {
        const auto& t = p.turns[std::min<std::size_t>(static_cast<std::size_t>(attempt), p.turns.size() - 1)];
        if (!t.correct) continue;
        if (!(p.cosine > threshold)) return {false, "low_similarity", attempt + 1};
        if (!t.well_formed) return {false, "bad_format", attempt + 1};
        return {true, "", attempt + 1};
    }
    return {false, "wrong_answer", max_regenerations + 1};
}

struct PlantedRun {
    std::vector<PlantedItem> planted;
    CorpusRun run;
    CallLog log;
};

std::unique_ptr<PlantedRun> run_planted(const World& w) {
    auto out = std::make_unique<PlantedRun>();
    out->planted = planted_corpus();
    std::vector<QaItem> items;
    std::map<std::string, std::vector<ScriptedTurn>> script;
    std::vector<double> cos;
    for (std::size_t i = 0; i < out->planted.size(); ++i) {
        const auto& p = out->planted[i];
        const std::string id = fmt("item-%03zu", i);
        std::optional<std::string> gold;
        if (p.has_gold_cot) gold = "gold " + id;
        items.push_back(make_item(id, "kitchen", "What color is the mailbox?", {"red", "blue"}, "0", gold));
        for (const auto& t : p.turns) {
            auto [r1, r2] = turn_text(i, t);
            script[id].push_back({r1, r2});
        }
        cos.push_back(p.cosine);
    }
    MockBackends mb(w, script, &out->log);
    PlantedEmbedder embedder(cos);
    Engine engine({}, w.store, mb.handles());
    out->run = synthesize_corpus(items, PipelineConfig{}, engine, embedder, 4);
    return out;
}

Verdict c5_filter_oracle() {
    World w;
    const auto pr = run_planted(w);
    const PipelineConfig cfg;
    std::size_t agree = 0;
    std::string first_bad;
    for (std::size_t i = 0; i < pr->planted.size(); ++i) {
        const auto expect = oracle(pr->planted[i], cfg.max_regenerations, 0.80);
        const auto& rep = pr->run.reports[i];
        const std::string reason = rep.reject_reason ? std::string(to_string(*rep.reject_reason)) : "";
        if (rep.retained == expect.retained && reason == expect.reason && rep.attempts == expect.attempts) {
            ++agree;
        } else if (first_bad.empty()) {
            first_bad = fmt("; first disagreement at item %zu (%s vs oracle %s)", i, reason.c_str(), expect.reason.c_str());
        }
    }
    const auto& boundary = pr->run.reports[0];
    const bool boundary_ok = !boundary.retained && boundary.reject_reason == RejectReason::LowSimilarity &&
                             cosine_similarity(at_cosine(0.8), std::vector<double>{1.0, 0.0}) == 0.8;
    std::size_t round1_calls = 0;
    for (const auto& c : pr->log.for_backend("reason")) {
        if (c.item_id == "item-001" && c.query == "round1") ++round1_calls;
    }
    const bool always_wrong = pr->run.reports[1].attempts == 3 && round1_calls == 3 &&
                              pr->run.reports[2].attempts == 3 && !pr->run.reports[2].retained;
    std::size_t retained = 0;
    for (const auto& r : pr->run.reports) retained += r.retained;
    return {agree == pr->planted.size() && boundary_ok && always_wrong,
            fmt("%zu/%zu decisions match the oracle (%zu retained); cosine 0.80 rejected: %s; always-wrong attempts: %d with %zu "
                "reasoner runs",
                agree, pr->planted.size(), retained, boundary_ok ? "yes" : "no", pr->run.reports[1].attempts, round1_calls) +
                first_bad};
}

// A corpus with every tool kind: retrieve, generate and text-only records, all retained.
std::vector<SftRecord> mixed_corpus(const World& w) {
    const std::string r1s[] = {"<think>A.<retrieve>a red mailbox</retrieve>", "<think>B.<generate>a dog chases a ball</generate>",
                               "<think>C.</think><answer>0</answer>", "<think><retrieve>dog ball</retrieve>\n"};
    const std::string r2s[] = {"Red.</think><answer>0</answer>", "Runs.</think>\n<answer>0</answer>", "", "ok</think><answer>0</answer>"};
    const std::string cots[] = {"A.Red. 0", "B.Runs. 0", "C. 0", "ok 0"};
    std::vector<QaItem> items;
    std::map<std::string, std::vector<ScriptedTurn>> script;
    for (int i = 0; i < 120; ++i) {
        const std::string id = fmt("m-%03d", i);
        items.push_back(make_item(id, "kitchen", "Which?", {"red", "blue"}, "0", cots[i % 4]));
        script[id] = {{r1s[i % 4], r2s[i % 4]}};
    }
    MockBackends mb(w, script, nullptr);
    Engine engine({}, w.store, mb.handles());
    return synthesize_corpus(items, PipelineConfig{}, engine, mb.embedder, 2).records;
}

Verdict c6_masks() {
    World w;
    auto records = mixed_corpus(w);
    const auto pr = run_planted(w);
    records.insert(records.end(), pr->run.records.begin(), pr->run.records.end());
    std::size_t bad = 0, placeholders = 0;
    for (const auto& r : records) {
        std::size_t pos = 0, excluded = 0;
        bool partition = !r.mask_spans.empty() || r.target.empty();
        for (const auto& s : r.mask_spans) {
            partition = partition && s.start == pos && s.end > s.start;
            pos = s.end;
            if (!s.included) excluded += s.length();
        }
        partition = partition && pos == r.target.size();
        std::size_t payload = 0;
        for (const auto& f : trace_frames(parse_trace(r.target))) payload += frame_placeholder(f.hash).size();
        placeholders += trace_frames(parse_trace(r.target)).size();
        if (!partition || excluded != payload) ++bad;
    }
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> prob(0.001, 1.0);
    std::size_t variant = 0;
    for (int k = 0; k < 1000 && !records.empty(); ++k) {
        const auto& r = records[static_cast<std::size_t>(k) % records.size()];
        std::vector<double> p(r.target.size());
        for (auto& x : p) x = prob(rng);
        auto q = p;
        for (const auto& s : r.mask_spans) {
            if (s.included) continue;
            for (auto i = s.start; i < s.end; ++i) q[i] = prob(rng);
        }
        if (reference_loss(r, p) != reference_loss(r, q)) ++variant;
    }
    return {bad == 0 && variant == 0 && placeholders > 0,
            fmt("%zu records (%zu placeholders): %zu partition/length failures; %zu of 1000 probability vectors changed the loss",
                records.size(), placeholders, bad, variant)};
}

// ---------------------------------------------------------------- 7

Verdict c7_statistics() {
    const std::string ph = "<frames>" + frame_placeholder(std::string(64, 'e')) + "</frames>";
    std::vector<SftRecord> records;
    auto add = [&](std::size_t n, const std::string& target, const char* source) {
        for (std::size_t i = 0; i < n; ++i) {
            SftRecord r;
            r.item_id = fmt("%s-%zu", source, i);
            r.question = "q";
            r.target = target;
            r.mask_spans = build_mask(target);
            r.provenance.attempts = 1;
            r.provenance.source_dataset = source;
            records.push_back(std::move(r));
        }
    };
    add(1026, "<think>a<retrieve>red mailbox</retrieve>" + ph + "b</think><answer>0</answer>", "retrieval");
    add(582, "<think>a<generate>dog in snow</generate>" + ph + "b</think><answer>0</answer>", "generation");
    add(1765, "<think>plain</think><answer>0</answer>", "text");

    // through the on-disk path, as the stats subcommand sees it
    TempDir dir;
    std::vector<io::Json> lines;
    for (const auto& r : records) lines.push_back(io::to_json(r));
    io::write_atomic(dir.path() / "corpus.jsonl", io::to_jsonl(lines));
    const auto s = cmd_stats(dir.path() / "corpus.jsonl", std::nullopt, {});

    const bool counts = s.total == 3373 && s.with_frames == 1608 && s.retrievals == 1026 && s.generations == 582 &&
                        s.text_only == 1765;
    const bool exact = s.frame_rate == 1608.0 / 3373.0;
    const double gap = std::fabs(s.frame_rate - 0.476727);
    const bool literal = gap <= 1e-9;
    return {counts && exact && literal,
            fmt("counts %s; frame_rate %.17g == 1608/3373: %s; |frame_rate - 0.476727| = %.3g, bound 1e-9: %s "
                "(0.476727 is 1608/3373 rounded to six places, so no implementation can meet the bound)",
                counts ? "ok" : "wrong", s.frame_rate, exact ? "yes" : "no", gap, literal ? "met" : "missed")};
}

// ---------------------------------------------------------------- 8

Verdict c8_sampling() {
    World w;
    const auto& video = w.store.video("kitchen");
    const bool counts = sample_count(10.0, 3.0) == 30 && sample_count(10.0, 1.0) == 10 &&
                        sample(video, 3.0, Provenance::Retrieved).size() == 30 &&
                        sample(video, 1.0, Provenance::Initial).size() == 10;
    std::vector<FrameRef> five, four;
    for (int i = 0; i < 5; ++i) five.push_back(FrameRef::unresolved(std::string(64, static_cast<char>('a' + i))));
    four.assign(five.begin(), five.begin() + 4);
    const bool middle = middle_frame(five).hash == five[2].hash && middle_frame(four).hash == four[1].hash;
    return {counts && middle, fmt("30 refs at 3 fps, 10 at 1 fps: %s; middle of 5 is index 2, of 4 is index 1: %s",
                                  counts ? "yes" : "no", middle ? "yes" : "no")};
}

// ---------------------------------------------------------------- 9

// Independent replay of the per-item decision stream.
std::uint64_t replay_splitmix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool replay_decision(double rate, std::uint64_t seed, const std::string& id) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : id) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    const double u = static_cast<double>(replay_splitmix(seed ^ replay_splitmix(h)) >> 11) * 0x1.0p-53;
    return u < rate;
}

Verdict c9_sweep() {
    World w;
    constexpr std::size_t kItems = 10000;
    constexpr std::uint64_t kSeed = 20240607;
    std::vector<QaItem> items;
    std::map<std::string, std::vector<ScriptedTurn>> script;
    for (std::size_t i = 0; i < kItems; ++i) {
        const std::string id = fmt("sweep-%05zu", i);
        items.push_back(make_item(id, "kitchen", "What if?", {"red", "blue"}, "0"));
        script[id] = {{"<think>Imagine.<generate>a red dog chases a ball</generate>", "So.</think><answer>0</answer>"}};
    }
    EvalOptions opts;
    opts.workers = 4;

    std::string detail;
    bool pass = true;
    std::vector<ItemResult> baseline;
    {
        MockBackends mb(w, script, nullptr);
        Engine engine({}, w.store, mb.handles());
        baseline = evaluate(items, engine, opts).items;
    }
    for (double rate : {0.0, 0.1, 0.2, 0.3}) {
        CallLog log;
        MockBackends mb(w, script, &log);
        EngineConfig cfg;
        cfg.failure_injection_rate = rate;
        cfg.rng_seed = kSeed;
        Engine engine(cfg, w.store, mb.handles());
        const auto res = evaluate(items, engine, opts);
        std::size_t injected = 0, replayed = 0, mismatched = 0, flipped_calls = 0;
        for (const auto& it : res.items) {
            injected += it.failure_injected;
            const bool expect = replay_decision(rate, kSeed, it.item_id);
            replayed += expect;
            mismatched += expect != it.failure_injected;
        }
        for (const auto& c : log.for_backend("generate")) flipped_calls += c.query != "a red dog chases a ball";
        const double frac = static_cast<double>(injected) / kItems;
        bool ok = mismatched == 0 && injected == replayed && flipped_calls == injected && std::fabs(frac - rate) <= 0.01;
        if (rate == 0.0) {
            bool identity = injected == 0 && res.items.size() == baseline.size();
            for (std::size_t i = 0; identity && i < baseline.size(); ++i) {
                const auto& a = res.items[i];
                const auto& b = baseline[i];
                identity = a.item_id == b.item_id && a.extracted_answer == b.extracted_answer && a.correct == b.correct &&
                           a.status == b.status && a.tool_used == b.tool_used;
            }
            ok = ok && identity;
        }
        pass = pass && ok;
        detail += fmt("%srate %.1f: %.4f perturbed (replay %zu/%zu)", detail.empty() ? "" : "; ", rate, frac, injected, replayed);
    }
    return {pass, detail};
}

// ---------------------------------------------------------------- 10

std::map<std::string, std::string> snapshot(const fs::path& dir) {
    std::map<std::string, std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (e.is_regular_file()) files[fs::relative(e.path(), dir).string()] = read_text(e.path());
    }
    return files;
}

Verdict c10_determinism() {
    TempDir dir;
    const auto fx = write_cli_fixture(dir.path());
    AppConfig cfg = load_config(fx.config, [](const char*) { return std::optional<std::string>{}; });
    cfg.workers = 4;
    std::map<std::string, std::string> runs[2];
    for (int k = 0; k < 2; ++k) {
        const auto out = dir.path() / ("run" + std::to_string(k));
        cmd_synthesize(cfg, fx.qa, out / "synthesize");
        cmd_eval(cfg, fx.qa, out / "eval", {});
        cmd_eval(cfg, fx.qa, out / "sweep", {{0.1, 0.2, 0.3}, "category"});
        runs[k] = snapshot(out);
    }
    return {runs[0] == runs[1] && runs[0].size() >= 8,
            fmt("%zu output files, byte-identical across two runs: %s", runs[0].size(), runs[0] == runs[1] ? "yes" : "no")};
}

}  // namespace

int main(int argc, char** argv) {
    spdlog::set_level(spdlog::level::warn);
    int only = 0;
    for (int i = 1; i < argc; ++i) {
        if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
            only = std::atoi(argv[++i]);
        } else {
            std::fprintf(stderr, "usage: %s [--only N]\n", argv[0]);
            return 2;
        }
    }
    const std::pair<const char*, std::function<Verdict()>> criteria[] = {
        {"engine equivalence", c1_engine_equivalence},
        {"generate-path ordering", c2_generate_ordering},
        {"truncation property", c3_truncation},
        {"round-trip property", c4_round_trip},
        {"filter-stack oracle", c5_filter_oracle},
        {"mask correctness", c6_masks},
        {"statistics fidelity", c7_statistics},
        {"sampling arithmetic", c8_sampling},
        {"robustness sweep", c9_sweep},
        {"determinism", c10_determinism},
    };
    if (only < 0 || only > static_cast<int>(std::size(criteria))) {
        std::fprintf(stderr, "no criterion %d\n", only);
        return 2;
    }
    int failed = 0;
    const auto start = std::chrono::steady_clock::now();
    for (std::size_t i = 0; i < std::size(criteria); ++i) {
        if (only != 0 && static_cast<int>(i) + 1 != only) continue;
        Verdict v;
        try {
            v = criteria[i].second();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        failed += !v.pass;
        std::printf("%s criterion %zu (%s): %s\n", v.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, v.detail.c_str());
        std::fflush(stdout);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%d failed, %.2f s\n", failed, secs);
    return failed == 0 ? 0 : 1;
}
