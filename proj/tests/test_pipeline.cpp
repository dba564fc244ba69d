#include "framecot/error.hpp"
#include "framecot/pipeline.hpp"
#include "testkit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace framecot;

namespace {

const std::string kRetrieveR1 = "<think>Check the box.<retrieve>a red mailbox</retrieve>";
const std::string kGoodR2 = "It is red.</think>\n<answer>0</answer>";
const std::string kWrongR2 = "It is blue.</think>\n<answer>1</answer>";
const std::string kNoCloseR2 = "It is red.<answer>0</answer>";

struct PipelineFixture : ::testing::Test {
    testkit::World world;
    CallLog log;

    SynthesisResult go(std::vector<ScriptedTurn> turns, Embedder* embedder = nullptr, PipelineConfig cfg = {},
                       std::optional<std::string> gold_cot = std::string("gold")) {
        testkit::MockBackends mb(world, {{"q", std::move(turns)}}, &log);
        Engine engine({}, world.store, mb.handles());
        auto item = testkit::make_item("q", "kitchen", "What color?", {"red", "blue"}, "0", std::move(gold_cot));
        if (embedder == nullptr) {
            testkit::TableEmbedder same;
            same.fallback = {1.0, 0.0};
            return synthesize(item, cfg, engine, same);
        }
        return synthesize(item, cfg, engine, *embedder);
    }
};

// Character-scan oracle: marks every byte of a [[frame:...]] run found between <frames> and </frames>.
std::vector<bool> oracle_included(const std::string& t) {
    std::vector<bool> inc(t.size(), true);
    bool in_block = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t.compare(i, 8, "<frames>") == 0) in_block = true;
        if (t.compare(i, 9, "</frames>") == 0) in_block = false;
        if (in_block && t.compare(i, 8, "[[frame:") == 0) {
            std::size_t j = i;
            while (t.compare(j, 2, "]]") != 0) inc[j++] = false;
            inc[j] = inc[j + 1] = false;
        }
    }
    return inc;
}

}  // namespace

TEST_F(PipelineFixture, RetainsGoodTrace) {
    auto r = go({{kRetrieveR1, kGoodR2}});
    ASSERT_TRUE(r.record) << r.report.detail;
    EXPECT_TRUE(r.report.retained);
    EXPECT_EQ(r.report.attempts, 1);
    EXPECT_EQ(r.report.similarity, 1.0);
    EXPECT_TRUE(r.report.format_ok);
    EXPECT_EQ(r.record->provenance.tool_used, ToolKind::Retrieve);
    EXPECT_EQ(r.record->provenance.matcher_version, "match-v1");
    EXPECT_EQ(r.record->initial_frames.size(), 10u);
    EXPECT_TRUE(r.generated_frames.empty());
}

TEST_F(PipelineFixture, AlwaysWrongRunsThreeTimes) {
    auto r = go({{kRetrieveR1, kWrongR2}});
    EXPECT_FALSE(r.record);
    EXPECT_EQ(r.report.attempts, 3);
    EXPECT_EQ(r.report.reject_reason, RejectReason::WrongAnswer);
    EXPECT_FALSE(r.report.similarity);
    EXPECT_EQ(log.for_backend("retrieve").size(), 3u);
}

TEST_F(PipelineFixture, NoRegenerationMeansOneAttempt) {
    PipelineConfig cfg;
    cfg.max_regenerations = 0;
    auto r = go({{kRetrieveR1, kWrongR2}, {kRetrieveR1, kGoodR2}}, nullptr, cfg);
    EXPECT_EQ(r.report.attempts, 1);
    EXPECT_EQ(r.report.reject_reason, RejectReason::WrongAnswer);
}

TEST_F(PipelineFixture, SecondAttemptCanPass) {
    auto r = go({{kRetrieveR1, kWrongR2}, {kRetrieveR1, kGoodR2}});
    ASSERT_TRUE(r.record);
    EXPECT_EQ(r.report.attempts, 2);
    EXPECT_EQ(r.record->provenance.attempts, 2);
}

TEST_F(PipelineFixture, MalformedOutputIsRegenerated) {
    auto r = go({{"<think>bad</retrieve>", ""}, {kRetrieveR1, kGoodR2}});
    ASSERT_TRUE(r.record);
    EXPECT_EQ(r.report.attempts, 2);
}

TEST_F(PipelineFixture, SimilarityBoundaryIsStrict) {
    testkit::TableEmbedder e;
    e.table["gold"] = {1.0, 0.0};
    e.fallback = testkit::at_cosine(0.8);
    auto r = go({{kRetrieveR1, kGoodR2}}, &e);
    EXPECT_EQ(r.report.similarity, 0.8);
    EXPECT_EQ(r.report.reject_reason, RejectReason::LowSimilarity);

    e.fallback = testkit::at_cosine(0.81);
    EXPECT_TRUE(go({{kRetrieveR1, kGoodR2}}, &e).report.retained);
}

TEST_F(PipelineFixture, FormatGateLast) {
    auto r = go({{kRetrieveR1, kNoCloseR2}});
    EXPECT_TRUE(r.report.answer_correct);
    EXPECT_FALSE(r.report.format_ok);
    EXPECT_EQ(r.report.reject_reason, RejectReason::BadFormat);

    // a low-similarity, badly formatted trace reports the earlier stage
    testkit::TableEmbedder e;
    e.table["gold"] = {1.0, 0.0};
    e.fallback = {0.0, 1.0};
    EXPECT_EQ(go({{kRetrieveR1, kNoCloseR2}}, &e).report.reject_reason, RejectReason::LowSimilarity);
}

TEST_F(PipelineFixture, MissingGoldCot) {
    auto r = go({{kRetrieveR1, kGoodR2}}, nullptr, {}, std::nullopt);
    EXPECT_EQ(r.report.reject_reason, RejectReason::ConfigViolation);
    EXPECT_EQ(r.report.attempts, 0);
    EXPECT_TRUE(log.snapshot().empty());

    PipelineConfig lax;
    lax.require_gold_cot_for_similarity = false;
    auto ok = go({{kRetrieveR1, kGoodR2}}, nullptr, lax, std::nullopt);
    EXPECT_TRUE(ok.report.retained);
    EXPECT_FALSE(ok.report.similarity);
}

TEST_F(PipelineFixture, BackendErrorAborts) {
    auto r = go({{"<think><retrieve>purple elephant</retrieve>", kGoodR2}});
    EXPECT_EQ(r.report.reject_reason, RejectReason::BackendError);
    EXPECT_EQ(r.report.attempts, 1);
}

TEST_F(PipelineFixture, GeneratedFramesAreCollected) {
    auto r = go({{"<think>Imagine.<generate>a dog chases a ball</generate>", kGoodR2}});
    ASSERT_TRUE(r.record);
    ASSERT_EQ(r.generated_frames.size(), 1u);
    EXPECT_NE(r.record->target.find(r.generated_frames[0].hash), std::string::npos);
}

TEST(SimilarityText, PlainTextOnly) {
    auto a = parse_trace("<think>A<retrieve>q</retrieve><frames>[[frame:" + std::string(64, 'a') + "]]</frames> B </think><answer> 0 </answer>");
    auto b = parse_trace("<think>A<retrieve>q</retrieve><frames>[[frame:" + std::string(64, 'b') + "]]</frames> B </think><answer> 0 </answer>");
    EXPECT_EQ(similarity_text(a), "A B 0");
    EXPECT_EQ(similarity_text(a), similarity_text(b));
}

TEST(BuildMask, TextOnlySingleSpan) {
    const std::string t = "<think>x</think><answer>1</answer>";
    EXPECT_EQ(build_mask(t), (std::vector<MaskSpan>{{0, t.size(), true}}));
}

TEST(BuildMask, OnePlaceholder) {
    const std::string ph = "[[frame:" + std::string(64, 'e') + "]]";
    const std::string t = "<think>a<retrieve>q</retrieve><frames>" + ph + "</frames>b</think><answer>1</answer>";
    auto spans = build_mask(t);
    std::size_t included = 0;
    for (const auto& s : spans) included += s.included ? s.length() : 0;
    EXPECT_EQ(included, t.size() - ph.size());
    EXPECT_THROW(build_mask("<think><frames></frames>"), Error);
}

TEST(BuildMask, MatchesCharacterScanOracle) {
    std::mt19937_64 rng(21);
    for (int i = 0; i < 2000; ++i) {
        const auto target = serialize(testkit::random_valid_trace(rng));
        const auto spans = build_mask(target);
        std::vector<bool> inc(target.size(), false);
        std::size_t cursor = 0;
        for (const auto& s : spans) {
            ASSERT_EQ(s.start, cursor);
            ASSERT_LT(s.start, s.end);
            for (auto p = s.start; p < s.end; ++p) inc[p] = s.included;
            cursor = s.end;
        }
        ASSERT_EQ(cursor, target.size());
        ASSERT_EQ(inc, oracle_included(target)) << target;
    }
}

TEST(ReferenceLoss, ClosedForms) {
    SftRecord r;
    r.target = "<think>x</think><answer>1</answer>";
    r.mask_spans = build_mask(r.target);
    EXPECT_EQ(reference_loss(r, std::vector<double>(r.target.size(), 1.0)), 0.0);
    EXPECT_NEAR(reference_loss(r, std::vector<double>(r.target.size(), 0.25)), -std::log(0.25), 1e-12);
    try {
        reference_loss(r, std::vector<double>(3, 1.0));
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::LengthMismatch);
    }
    EXPECT_THROW(reference_loss(r, std::vector<double>(r.target.size(), 0.0)), Error);
}

TEST(ReferenceLoss, IgnoresExcludedPositions) {
    SftRecord r;
    r.target = "<think>a<retrieve>q</retrieve><frames>[[frame:" + std::string(64, 'd') + "]]</frames>b</think><answer>1</answer>";
    r.mask_spans = build_mask(r.target);
    std::vector<double> p(r.target.size(), 0.5);
    auto q = p;
    for (const auto& s : r.mask_spans) {
        for (auto i = s.start; i < s.end; ++i) {
            if (!s.included) {
                p[i] = 1.0;
                q[i] = 0.01;
            }
        }
    }
    EXPECT_EQ(reference_loss(r, p), reference_loss(r, q));
}

TEST(CorpusStats, Arithmetic) {
    EXPECT_EQ(corpus_stats({}, {}), CorpusStats{});
    auto rec = [](const std::string& target) {
        SftRecord r;
        r.target = target;
        r.provenance.source_dataset = "s";
        return r;
    };
    const std::string ph = "<frames>[[frame:" + std::string(64, 'f') + "]]</frames>";
    std::vector<SftRecord> recs = {rec("<think><retrieve>a</retrieve>" + ph + "</think><answer>1</answer>"),
                                   rec("<think><retrieve>b</retrieve>" + ph + "</think><answer>1</answer>"),
                                   rec("<think>t</think><answer>1</answer>"),
                                   rec("<think>u</think><answer>1</answer>")};
    auto s = corpus_stats(recs, {});
    EXPECT_EQ(s.total, 4u);
    EXPECT_EQ(s.retrievals, 2u);
    EXPECT_EQ(s.generations, 0u);
    EXPECT_EQ(s.text_only, 2u);
    EXPECT_EQ(s.frame_rate, 0.5);

    auto a = corpus_stats(std::span(recs).subspan(0, 1), {});
    auto b = corpus_stats(std::span(recs).subspan(1, 3), {});
    CorpusStats merged;
    merged.merge(b);
    merged.merge(a);
    EXPECT_EQ(merged, s);
}

TEST(ReviewSample, SeededAndBounded) {
    EXPECT_EQ(review_sample(10, 100, 1).size(), 10u);
    auto a = review_sample(1000, 100, 7);
    EXPECT_EQ(a, review_sample(1000, 100, 7));
    EXPECT_NE(a, review_sample(1000, 100, 8));
    EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));
}

TEST(PipelineConfig, Validation) {
    PipelineConfig c;
    EXPECT_NO_THROW(c.validate());
    c.similarity_threshold = 0.0;
    EXPECT_THROW(c.validate(), Error);
    c.similarity_threshold = 1.0;
    c.max_regenerations = -1;
    EXPECT_THROW(c.validate(), Error);
}
