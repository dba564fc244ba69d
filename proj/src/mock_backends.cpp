#include "framecot/mock_backends.hpp"

#include "framecot/digest.hpp"
#include "framecot/error.hpp"
#include "framecot/text_util.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <set>

namespace framecot {

void CallLog::append(CallRecord record) {
    std::lock_guard lock(mu_);
    records_.push_back(std::move(record));
}

std::vector<CallRecord> CallLog::snapshot() const {
    std::lock_guard lock(mu_);
    return records_;
}

std::vector<CallRecord> CallLog::for_backend(std::string_view backend) const {
    std::lock_guard lock(mu_);
    std::vector<CallRecord> out;
    for (const auto& r : records_) {
        if (r.backend == backend) out.push_back(r);
    }
    return out;
}

void CallLog::clear() {
    std::lock_guard lock(mu_);
    records_.clear();
}

// --- ScriptedReasoner -------------------------------------------------------

ScriptedReasoner::ScriptedReasoner(std::map<std::string, std::vector<ScriptedTurn>> script, CallLog* log)
    : script_(std::move(script)), log_(log) {
    for (const auto& [id, turns] : script_) {
        if (turns.empty()) fail(ErrorCode::ConfigError, "script for item '" + id + "' has no turns");
    }
}

ScriptedReasoner ScriptedReasoner::from_file(const std::filesystem::path& path, CallLog* log) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open script " + path.string());
    std::map<std::string, std::vector<ScriptedTurn>> script;
    try {
        auto doc = nlohmann::json::parse(in);
        for (auto& [id, value] : doc.items()) {
            auto read_turn = [](const nlohmann::json& t) {
                return ScriptedTurn{t.at("round1").get<std::string>(), t.value("round2", std::string{})};
            };
            auto& turns = script[id];
            if (value.is_array()) {
                for (const auto& t : value) turns.push_back(read_turn(t));
            } else {
                turns.push_back(read_turn(value));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        fail(ErrorCode::ConfigError, "bad script " + path.string() + ": " + e.what());
    }
    return ScriptedReasoner(std::move(script), log);
}

std::string ScriptedReasoner::reason(const ReasonRequest& req) {
    auto it = script_.find(req.item_id);
    if (it == script_.end()) fail(ErrorCode::BackendUnavailable, "no scripted output for item '" + req.item_id + "'");
    const auto& turns = it->second;
    const auto idx = std::min<std::size_t>(static_cast<std::size_t>(std::max(req.attempt, 0)), turns.size() - 1);
    if (log_ != nullptr) {
        std::vector<std::string> hashes;
        for (const auto& f : req.frames) hashes.push_back(f.hash);
        log_->append({"reason", req.item_id, req.pretext ? "round2" : "round1", std::move(hashes)});
    }
    return req.pretext ? turns[idx].round2 : turns[idx].round1;
}

// --- KeywordRetriever -------------------------------------------------------

namespace {

const std::set<std::string>& stopwords() {
    static const std::set<std::string> kWords{"a",  "an", "the", "of",   "in",   "on",   "at", "to",
                                              "is", "and", "or",  "with", "from", "for", "by", "its"};
    return kWords;
}

}  // namespace

KeywordRetriever::KeywordRetriever(const FrameStore& store, std::size_t window, CallLog* log)
    : store_(store), window_(window), log_(log) {
    if (window_ == 0) fail(ErrorCode::InvalidArgument, "retrieval window must be >= 1");
}

std::size_t KeywordRetriever::caption_score(std::string_view query, std::string_view caption) {
    std::set<std::string> caption_words;
    for (auto& w : word_tokens(caption)) caption_words.insert(std::move(w));
    std::set<std::string> seen;
    std::size_t score = 0;
    for (auto& w : word_tokens(query)) {
        if (stopwords().count(w) != 0 || !seen.insert(w).second) continue;
        score += caption_words.count(w);
    }
    return score;
}

std::vector<FrameRef> KeywordRetriever::retrieve(const RetrieveRequest& req) {
    validate(req);
    const auto& video = store_.video(req.video_id);
    const auto indices = sample_indices(video, req.fps);

    std::vector<std::size_t> scores;
    scores.reserve(indices.size());
    for (std::size_t idx : indices) {
        const auto& caption = video.frames[idx].caption;
        scores.push_back(caption ? caption_score(req.query, *caption) : 0);
    }

    const std::size_t w = std::min(window_, indices.size());
    std::size_t best_start = 0;
    std::size_t best_sum = 0;
    for (std::size_t s = 0; s + w <= indices.size(); ++s) {
        std::size_t sum = 0;
        for (std::size_t j = s; j < s + w; ++j) sum += scores[j];
        if (sum > best_sum) {
            best_sum = sum;
            best_start = s;
        }
    }
    if (best_sum == 0) fail(ErrorCode::NoMatch, "no caption matches query '" + req.query + "'");

    std::vector<FrameRef> out;
    std::vector<std::string> hashes;
    for (std::size_t j = best_start; j < best_start + w; ++j) {
        const auto& f = video.frames[indices[j]];
        out.push_back(FrameRef::from_file(video.video_id, f.timestamp_sec, Provenance::Retrieved, f.path, f.hash));
        hashes.push_back(f.hash);
    }
    if (log_ != nullptr) log_->append({"retrieve", {}, req.query, std::move(hashes)});
    return out;
}

// --- WatermarkGenerator -----------------------------------------------------

WatermarkGenerator::WatermarkGenerator(const FrameStore& store, CallLog* log) : store_(store), log_(log) {}

std::string WatermarkGenerator::watermark(std::string_view query) {
    return "\n#framecot-watermark:" + sha256_hex(trim(query));
}

FrameRef WatermarkGenerator::generate(const GenerateRequest& req) {
    validate(req);
    if (log_ != nullptr) log_->append({"generate", {}, req.query, {req.conditioning.hash}});
    std::string bytes;
    try {
        bytes = store_.resolve(req.conditioning);
    } catch (const Error& e) {
        fail(ErrorCode::GenerationFailed, std::string("conditioning frame unavailable: ") + e.what());
    }
    bytes += watermark(req.query);
    return FrameRef::from_bytes(req.conditioning.video_id, req.conditioning.timestamp_sec, Provenance::Generated,
                                std::move(bytes));
}

// --- TrigramEmbedder --------------------------------------------------------

TrigramEmbedder::TrigramEmbedder(std::size_t dimension, CallLog* log) : dimension_(dimension), log_(log) {
    if (dimension_ == 0) fail(ErrorCode::InvalidArgument, "embedding dimension must be >= 1");
}

std::size_t TrigramEmbedder::bucket(std::string_view gram) const {
    return static_cast<std::size_t>(fnv1a64(gram) % dimension_);
}

std::vector<double> TrigramEmbedder::embed(const EmbedRequest& req) {
    validate(req);
    if (log_ != nullptr) log_->append({"embed", {}, req.text, {}});
    std::vector<double> v(dimension_, 0.0);
    const std::string_view text = req.text;
    if (text.size() < 3) {
        v[bucket(text)] += 1.0;
    } else {
        for (std::size_t i = 0; i + 3 <= text.size(); ++i) v[bucket(text.substr(i, 3))] += 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

}  // namespace framecot
