#include "framecot/digest.hpp"
#include "framecot/error.hpp"
#include "framecot/mock_backends.hpp"
#include "testkit.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <regex>
#include <set>

using namespace framecot;

namespace {

// Independent scorer: regex word-boundary search per distinct query word.
std::size_t oracle_score(const std::string& query, const std::string& caption) {
    static const std::set<std::string> stop{"a", "an", "the", "of", "in", "on", "at", "to",
                                            "is", "and", "or", "with", "from", "for", "by", "its"};
    std::string lower_caption;
    for (char c : caption) lower_caption.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    std::set<std::string> words;
    std::string cur;
    for (char c : query + " ") {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            words.insert(cur);
            cur.clear();
        }
    }
    std::size_t score = 0;
    for (const auto& w : words) {
        if (stop.count(w)) continue;
        if (std::regex_search(lower_caption, std::regex("(^|[^a-z0-9])" + w + "([^a-z0-9]|$)"))) ++score;
    }
    return score;
}

// Brute-force window search over all 3-frame windows of the 3 fps pool.
std::optional<std::size_t> oracle_window(const VideoRecord& v, const std::string& query) {
    const auto idx = sample_indices(v, 3.0);
    std::optional<std::size_t> best;
    std::size_t best_sum = 0;
    for (std::size_t s = 0; s + 3 <= idx.size(); ++s) {
        std::size_t sum = 0;
        for (std::size_t j = s; j < s + 3; ++j) sum += oracle_score(query, v.frames[idx[j]].caption.value_or(""));
        if (sum > best_sum) {
            best_sum = sum;
            best = s;
        }
    }
    return best;
}

std::vector<double> oracle_trigram(const std::string& text) {
    std::vector<double> v(256, 0.0);
    auto fnv = [](const std::string& s) {
        std::uint64_t h = 14695981039346656037ULL;
        for (unsigned char c : s) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    };
    if (text.size() < 3) {
        v[fnv(text) % 256] += 1;
    } else {
        for (std::size_t i = 0; i + 3 <= text.size(); ++i) v[fnv(text.substr(i, 3)) % 256] += 1;
    }
    return v;
}

double oracle_cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double dot = 0, na = 0, nb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    return dot / std::sqrt(na * nb);
}

}  // namespace

TEST(KeywordRetriever, FixtureQueries) {
    testkit::World w;
    KeywordRetriever r(w.store);
    auto frames = r.retrieve({"a red mailbox", "kitchen", 3.0});
    ASSERT_EQ(frames.size(), 3u);
    EXPECT_EQ(frames[0].hash, w.hash("kitchen", 6));
    EXPECT_EQ(middle_frame(frames).hash, w.hash("kitchen", 7));
    EXPECT_EQ(frames[1].provenance, Provenance::Retrieved);
    // single captioned frame 24: windows starting 22, 23, 24 tie, earliest wins
    auto fridge = r.retrieve({"man fridge", "kitchen", 3.0});
    EXPECT_EQ(fridge[0].hash, w.hash("kitchen", 22));
    try {
        r.retrieve({"purple elephant", "kitchen", 3.0});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::NoMatch);
    }
}

TEST(KeywordRetriever, MatchesBruteForceOracle) {
    const std::vector<std::string> vocab = {"red", "dog", "ball", "the", "man", "fridge", "door", "yard", "cat", "blue", "car"};
    std::mt19937_64 rng(3);
    testkit::VideoSpec spec;
    spec.video_id = "random";
    spec.duration_sec = 8.0;
    spec.frame_step = 0.25;
    for (std::size_t k = 0; k < 32; ++k) {
        if (rng() % 3 == 0) continue;
        std::string cap;
        for (int i = 0; i < 4; ++i) cap += vocab[rng() % vocab.size()] + (i % 2 ? " " : ", ");
        spec.captions[k] = cap;
    }
    testkit::World w({spec});
    KeywordRetriever r(w.store);
    const auto& video = w.store.video("random");
    for (int i = 0; i < 300; ++i) {
        std::string q;
        for (int j = 0; j < 1 + static_cast<int>(rng() % 3); ++j) q += vocab[rng() % vocab.size()] + " ";
        const auto expect = oracle_window(video, q);
        if (!expect) {
            EXPECT_THROW(r.retrieve({q, "random", 3.0}), Error) << q;
            continue;
        }
        const auto got = r.retrieve({q, "random", 3.0});
        const auto idx = sample_indices(video, 3.0);
        ASSERT_EQ(got.size(), 3u);
        for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(got[j].hash, video.frames[idx[*expect + j]].hash) << q;
    }
}

TEST(TrigramEmbedder, MatchesBruteForceCosine) {
    TrigramEmbedder e;
    std::mt19937_64 rng(5);
    for (int i = 0; i < 300; ++i) {
        const std::string a = testkit::random_text(rng, 50, false) + "x";
        const std::string b = testkit::random_text(rng, 50, false) + "y";
        const auto va = e.embed({a});
        const auto vb = e.embed({b});
        double norm = 0;
        for (double x : va) norm += x * x;
        EXPECT_NEAR(norm, 1.0, 1e-12);
        EXPECT_NEAR(cosine_similarity(va, vb), oracle_cosine(oracle_trigram(a), oracle_trigram(b)), 1e-12);
    }
    EXPECT_DOUBLE_EQ(cosine_similarity(e.embed({"same text"}), e.embed({"same text"})), 1.0);
}

TEST(CosineSimilarity, BoundaryIsExact) {
    const std::vector<double> a{1.0, 0.0};
    const std::vector<double> b{0.8, 0.6};
    EXPECT_EQ(cosine_similarity(a, b), 0.8);
    const std::vector<double> c{1.0};
    EXPECT_THROW(cosine_similarity(a, c), Error);
    const std::vector<double> zero{0.0, 0.0};
    EXPECT_EQ(cosine_similarity(a, zero), 0.0);
}

TEST(WatermarkGenerator, DeterministicOutput) {
    testkit::World w;
    CallLog log;
    WatermarkGenerator g(w.store, &log);
    auto cond = w.retrieved("kitchen", 16);
    auto f1 = g.generate({"a cat chases a ball", cond});
    auto f2 = g.generate({"a cat chases a ball", cond});
    EXPECT_EQ(f1, f2);
    EXPECT_EQ(f1.provenance, Provenance::Generated);
    EXPECT_EQ(f1.timestamp_sec, cond.timestamp_sec);
    const std::string expected = testkit::frame_bytes("kitchen", 16) + "\n#framecot-watermark:" + sha256_hex("a cat chases a ball");
    EXPECT_EQ(std::get<InlineBytes>(f1.content).bytes, expected);
    EXPECT_EQ(f1.hash, sha256_hex(expected));
    EXPECT_NE(g.generate({"a dog chases a ball", cond}).hash, f1.hash);
    ASSERT_EQ(log.for_backend("generate").size(), 3u);
    EXPECT_EQ(log.for_backend("generate")[0].hashes, std::vector<std::string>{cond.hash});
}

TEST(WatermarkGenerator, UnreadableConditioningFails) {
    testkit::World w;
    WatermarkGenerator g(w.store);
    try {
        g.generate({"x", FrameRef::unresolved(std::string(64, 'c'))});
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::GenerationFailed);
    }
}

TEST(ScriptedReasoner, TurnSelection) {
    ScriptedReasoner r({{"q1", {{"first", "first-2"}, {"second", "second-2"}}}});
    ReasonRequest req;
    req.item_id = "q1";
    EXPECT_EQ(r.reason(req), "first");
    req.attempt = 1;
    EXPECT_EQ(r.reason(req), "second");
    req.attempt = 5;
    EXPECT_EQ(r.reason(req), "second");
    req.pretext = "p";
    EXPECT_EQ(r.reason(req), "second-2");
    req.item_id = "missing";
    EXPECT_THROW(r.reason(req), Error);
}

TEST(ScriptedReasoner, FromFile) {
    testkit::TempDir dir;
    testkit::write_text(dir.path() / "s.json", R"({"a": {"round1": "x"}, "b": [{"round1": "y", "round2": "z"}]})");
    auto r = ScriptedReasoner::from_file(dir.path() / "s.json");
    ReasonRequest req;
    req.item_id = "a";
    EXPECT_EQ(r.reason(req), "x");
    req.item_id = "b";
    req.pretext = "";
    EXPECT_EQ(r.reason(req), "z");
}
