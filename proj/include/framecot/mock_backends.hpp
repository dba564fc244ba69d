#pragma once

// Deterministic in-process backends. Each is a pure function of (request, fixtures):
// repeated calls return identical results and no call mutates shared state other than
// the optional call log.

#include "framecot/backends.hpp"
#include "framecot/frame_store.hpp"

#include <filesystem>
#include <map>
#include <mutex>
#include <string>
#include <vector>

namespace framecot {

struct CallRecord {
    std::string backend;  // "reason", "retrieve", "generate", "embed"
    std::string item_id;  // reason calls only
    std::string query;
    std::vector<std::string> hashes;  // frames returned, or the conditioning frame for generate

    bool operator==(const CallRecord&) const = default;
};

// Append-only, thread-safe record of backend calls.
class CallLog {
public:
    void append(CallRecord record);
    std::vector<CallRecord> snapshot() const;
    std::vector<CallRecord> for_backend(std::string_view backend) const;
    void clear();

private:
    mutable std::mutex mu_;
    std::vector<CallRecord> records_;
};

struct ScriptedTurn {
    std::string round1;
    std::string round2;
};

// Canned outputs keyed by item id. Attempt i uses turn min(i, n - 1); a request with
// pretext gets that turn's round-2 text.
class ScriptedReasoner final : public Reasoner {
public:
    explicit ScriptedReasoner(std::map<std::string, std::vector<ScriptedTurn>> script, CallLog* log = nullptr);

    // {"<item_id>": [{"round1": str, "round2": str}, ...]}; a single object is one turn.
    static ScriptedReasoner from_file(const std::filesystem::path& path, CallLog* log = nullptr);

    std::string reason(const ReasonRequest& req) override;

private:
    std::map<std::string, std::vector<ScriptedTurn>> script_;
    CallLog* log_;
};

// Scores each frame of the fps-sampled pool by the number of distinct query words found in
// its caption and returns the best window of adjacent frames (ties toward earlier frames).
class KeywordRetriever final : public Retriever {
public:
    explicit KeywordRetriever(const FrameStore& store, std::size_t window = 3, CallLog* log = nullptr);

    std::vector<FrameRef> retrieve(const RetrieveRequest& req) override;

    static std::size_t caption_score(std::string_view query, std::string_view caption);

private:
    const FrameStore& store_;
    std::size_t window_;
    CallLog* log_;
};

// Appends a watermark derived from the query hash to the conditioning frame bytes.
class WatermarkGenerator final : public Generator {
public:
    explicit WatermarkGenerator(const FrameStore& store, CallLog* log = nullptr);

    FrameRef generate(const GenerateRequest& req) override;

    static std::string watermark(std::string_view query);

private:
    const FrameStore& store_;
    CallLog* log_;
};

// L2-normalized byte-trigram counts hashed into a fixed number of buckets.
// Texts shorter than three bytes count as a single gram.
class TrigramEmbedder final : public Embedder {
public:
    static constexpr std::size_t kDefaultDimension = 256;

    explicit TrigramEmbedder(std::size_t dimension = kDefaultDimension, CallLog* log = nullptr);

    std::vector<double> embed(const EmbedRequest& req) override;

    std::size_t bucket(std::string_view gram) const;
    std::size_t dimension() const { return dimension_; }

private:
    std::size_t dimension_;
    CallLog* log_;
};

}  // namespace framecot
