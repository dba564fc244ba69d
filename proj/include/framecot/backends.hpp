#pragma once

// Backend contracts: the reasoning model, the frame retriever, the frame generator and the
// text embedder. Implementations must be safe to call from several worker threads at once.

#include "framecot/trace_model.hpp"

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace framecot {

struct ReasonRequest {
    std::vector<FrameRef> frames;
    std::string prompt;
    std::optional<std::string> pretext;  // set only for the round-2 call

    // Routing metadata for scripted backends; not part of the wire body.
    std::string item_id;
    int attempt = 0;
};

struct RetrieveRequest {
    std::string query;
    std::string video_id;
    double fps = 3.0;
};

struct GenerateRequest {
    std::string query;
    FrameRef conditioning;
};

struct EmbedRequest {
    std::string text;
};

class Reasoner {
public:
    virtual ~Reasoner() = default;
    // Raw, untruncated model text.
    virtual std::string reason(const ReasonRequest& req) = 0;
};

class Retriever {
public:
    virtual ~Retriever() = default;
    // Adjacent frames ranked by the backend; never empty (NoMatch instead).
    virtual std::vector<FrameRef> retrieve(const RetrieveRequest& req) = 0;
};

class Generator {
public:
    virtual ~Generator() = default;
    // A new frame with Generated provenance.
    virtual FrameRef generate(const GenerateRequest& req) = 0;
};

class Embedder {
public:
    virtual ~Embedder() = default;
    // Unit-norm vector of fixed dimension.
    virtual std::vector<double> embed(const EmbedRequest& req) = 0;
};

// Non-owning bundle handed to the engine, pipeline and harness.
struct Backends {
    Reasoner& reasoner;
    Retriever& retriever;
    Generator& generator;
    Embedder& embedder;
};

// Precondition checks shared by every implementation. Throw InvalidArgument.
void validate(const RetrieveRequest& req);
void validate(const GenerateRequest& req);
void validate(const EmbedRequest& req);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace framecot
