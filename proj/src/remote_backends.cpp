#include "framecot/remote_backends.hpp"

#include "framecot/error.hpp"
#include "framecot/wire.hpp"

#include <httplib.h>

#include <cmath>

namespace framecot {

void Semaphore::acquire() {
    std::unique_lock lock(mu_);
    cv_.wait(lock, [this] { return permits_ > 0; });
    --permits_;
}

void Semaphore::release() {
    {
        std::lock_guard lock(mu_);
        ++permits_;
    }
    cv_.notify_one();
}

namespace {

struct SlotGuard {
    explicit SlotGuard(Semaphore& s) : sem(s) { sem.acquire(); }
    ~SlotGuard() { sem.release(); }
    Semaphore& sem;
};

}  // namespace

HttpEndpoint::HttpEndpoint(EndpointConfig config) : config_(std::move(config)), slots_(config_.concurrency) {
    if (config_.base_url.empty()) fail(ErrorCode::ConfigError, "backend base_url is empty");
    if (config_.timeout_ms <= 0) fail(ErrorCode::ConfigError, "backend timeout must be positive");
    if (config_.retries < 0) fail(ErrorCode::ConfigError, "backend retries must be >= 0");
    if (config_.concurrency <= 0) fail(ErrorCode::ConfigError, "backend concurrency must be >= 1");
}

std::string HttpEndpoint::post_once(std::string_view path, const std::string& body) {
    SlotGuard slot(slots_);
    httplib::Client client(config_.base_url);
    const auto timeout = std::chrono::milliseconds(config_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);

    auto res = client.Post(std::string(path), body, "application/json");
    if (!res) {
        const auto err = res.error();
        const std::string what = config_.base_url + std::string(path) + ": " + httplib::to_string(err);
        if (err == httplib::Error::Read || err == httplib::Error::Write || err == httplib::Error::ConnectionTimeout) {
            fail(ErrorCode::Timeout, what);
        }
        fail(ErrorCode::BackendUnavailable, what);
    }
    if (res->status == 200) return res->body;

    const std::string message = config_.base_url + std::string(path) + " returned " + std::to_string(res->status) +
                                ": " + wire::parse_error(res->body);
    if (res->status == 404) fail(ErrorCode::NoMatch, message);
    if (res->status == 422) fail(ErrorCode::GenerationFailed, message);
    fail(ErrorCode::BackendUnavailable, message);
}

std::string HttpEndpoint::post(std::string_view path, const std::string& body, bool retryable) {
    const int attempts = retryable ? 1 + config_.retries : 1;
    for (int i = 0;; ++i) {
        try {
            return post_once(path, body);
        } catch (const Error& e) {
            const bool transient = e.code() == ErrorCode::BackendUnavailable || e.code() == ErrorCode::Timeout;
            if (!transient || i + 1 >= attempts) throw;
        }
    }
}

RemoteReasoner::RemoteReasoner(EndpointConfig config, const FrameStore& store)
    : http_(std::move(config)), store_(store) {}

std::string RemoteReasoner::reason(const ReasonRequest& req) {
    auto body = wire::reason_request(req, store_);
    return wire::parse_reason_response(http_.post(wire::kReasonPath, body, true));
}

RemoteRetriever::RemoteRetriever(EndpointConfig config, const FrameStore& store)
    : http_(std::move(config)), store_(store) {}

std::vector<FrameRef> RemoteRetriever::retrieve(const RetrieveRequest& req) {
    validate(req);
    auto frames = wire::parse_retrieve_response(http_.post(wire::kRetrievePath, wire::retrieve_request(req), true));
    if (frames.empty()) fail(ErrorCode::NoMatch, "retriever returned no frames for '" + req.query + "'");

    const auto& video = store_.video(req.video_id);
    std::vector<FrameRef> out;
    for (const auto& rf : frames) {
        const SourceFrame* match = nullptr;
        for (const auto& f : video.frames) {
            if (f.hash == rf.hash) {
                match = &f;
                if (f.timestamp_sec == rf.t) break;
            }
        }
        if (match == nullptr) fail(ErrorCode::ProtocolError, "retriever returned unknown frame " + rf.hash);
        out.push_back(FrameRef::from_file(video.video_id, match->timestamp_sec, Provenance::Retrieved, match->path,
                                          match->hash));
    }
    return out;
}

RemoteGenerator::RemoteGenerator(EndpointConfig config, const FrameStore& store)
    : http_(std::move(config)), store_(store) {}

FrameRef RemoteGenerator::generate(const GenerateRequest& req) {
    validate(req);
    std::string body;
    try {
        body = wire::generate_request(req, store_);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::UnknownFrame) fail(ErrorCode::GenerationFailed, e.what());
        throw;
    }
    auto image = wire::parse_generate_response(http_.post(wire::kGeneratePath, body, false));
    return FrameRef::from_bytes(req.conditioning.video_id, req.conditioning.timestamp_sec, Provenance::Generated,
                                std::move(image.bytes));
}

RemoteEmbedder::RemoteEmbedder(EndpointConfig config) : http_(std::move(config)) {}

std::vector<double> RemoteEmbedder::embed(const EmbedRequest& req) {
    validate(req);
    auto v = wire::parse_embed_response(http_.post(wire::kEmbedPath, wire::embed_request(req), true));
    double norm = 0.0;
    for (double x : v) norm += x * x;
    if (!(norm > 0.0) || !std::isfinite(norm)) fail(ErrorCode::ProtocolError, "embedding has no finite nonzero norm");
    norm = std::sqrt(norm);
    for (double& x : v) x /= norm;
    return v;
}

}  // namespace framecot
