#pragma once

// HTTP clients for the wire protocol in wire.hpp.
//
// Transport failures surface as BackendUnavailable, timeouts as Timeout, undecodable
// bodies as ProtocolError. reason/retrieve/embed retry BackendUnavailable and Timeout up
// to `retries` extra times; generate is never retried.

#include "framecot/backends.hpp"
#include "framecot/frame_store.hpp"

#include <condition_variable>
#include <memory>
#include <mutex>
#include <string>

namespace framecot {

struct EndpointConfig {
    std::string base_url;  // e.g. "http://127.0.0.1:8080"
    int timeout_ms = 60000;
    int retries = 2;
    int concurrency = 4;  // in-flight requests per backend
};

class Semaphore {
public:
    explicit Semaphore(int permits) : permits_(permits) {}
    void acquire();
    void release();

private:
    std::mutex mu_;
    std::condition_variable cv_;
    int permits_;
};

class HttpEndpoint {
public:
    explicit HttpEndpoint(EndpointConfig config);

    // POSTs a JSON body and returns the 200 response body.
    // Non-200: 404 -> NoMatch, 422 -> GenerationFailed, anything else -> BackendUnavailable.
    std::string post(std::string_view path, const std::string& body, bool retryable);

    const EndpointConfig& config() const { return config_; }

private:
    std::string post_once(std::string_view path, const std::string& body);

    EndpointConfig config_;
    Semaphore slots_;
};

class RemoteReasoner final : public Reasoner {
public:
    RemoteReasoner(EndpointConfig config, const FrameStore& store);
    std::string reason(const ReasonRequest& req) override;

private:
    HttpEndpoint http_;
    const FrameStore& store_;
};

class RemoteRetriever final : public Retriever {
public:
    RemoteRetriever(EndpointConfig config, const FrameStore& store);
    // Returned hashes must name ingested frames of the requested video.
    std::vector<FrameRef> retrieve(const RetrieveRequest& req) override;

private:
    HttpEndpoint http_;
    const FrameStore& store_;
};

class RemoteGenerator final : public Generator {
public:
    RemoteGenerator(EndpointConfig config, const FrameStore& store);
    FrameRef generate(const GenerateRequest& req) override;

private:
    HttpEndpoint http_;
    const FrameStore& store_;
};

class RemoteEmbedder final : public Embedder {
public:
    explicit RemoteEmbedder(EndpointConfig config);
    // Re-normalizes the returned vector.
    std::vector<double> embed(const EmbedRequest& req) override;

private:
    HttpEndpoint http_;
};

}  // namespace framecot
