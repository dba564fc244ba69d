#include "framecot/trace_model.hpp"

#include "framecot/digest.hpp"
#include "framecot/error.hpp"
#include "framecot/text_util.hpp"

namespace framecot {

std::string_view to_string(Provenance p) noexcept {
    switch (p) {
        case Provenance::Initial: return "initial";
        case Provenance::Retrieved: return "retrieved";
        case Provenance::Generated: return "generated";
    }
    return "initial";
}

std::string_view to_string(ToolKind k) noexcept { return k == ToolKind::Retrieve ? "retrieve" : "generate"; }

Provenance provenance_from_string(std::string_view s) {
    if (s == "initial") return Provenance::Initial;
    if (s == "retrieved") return Provenance::Retrieved;
    if (s == "generated") return Provenance::Generated;
    fail(ErrorCode::InvalidArgument, "unknown provenance '" + std::string(s) + "'");
}

ToolKind tool_kind_from_string(std::string_view s) {
    if (s == "retrieve") return ToolKind::Retrieve;
    if (s == "generate") return ToolKind::Generate;
    fail(ErrorCode::InvalidArgument, "unknown tool kind '" + std::string(s) + "'");
}

std::string_view to_string(RejectReason r) noexcept {
    switch (r) {
        case RejectReason::WrongAnswer: return "wrong_answer";
        case RejectReason::LowSimilarity: return "low_similarity";
        case RejectReason::BadFormat: return "bad_format";
        case RejectReason::BackendError: return "backend_error";
        case RejectReason::ConfigViolation: return "config_violation";
    }
    return "wrong_answer";
}

RejectReason reject_reason_from_string(std::string_view s) {
    for (auto r : {RejectReason::WrongAnswer, RejectReason::LowSimilarity, RejectReason::BadFormat,
                   RejectReason::BackendError, RejectReason::ConfigViolation}) {
        if (to_string(r) == s) return r;
    }
    fail(ErrorCode::InvalidArgument, "unknown reject reason '" + std::string(s) + "'");
}

FrameRef FrameRef::from_file(std::string video_id, double timestamp_sec, Provenance provenance,
                             std::filesystem::path path, std::string hash) {
    if (!(timestamp_sec >= 0.0)) fail(ErrorCode::InvalidArgument, "frame timestamp must be >= 0");
    return FrameRef{std::move(video_id), timestamp_sec, provenance, std::move(path), std::move(hash)};
}

FrameRef FrameRef::from_bytes(std::string video_id, double timestamp_sec, Provenance provenance, std::string bytes) {
    if (!(timestamp_sec >= 0.0)) fail(ErrorCode::InvalidArgument, "frame timestamp must be >= 0");
    std::string hash = sha256_hex(bytes);
    return FrameRef{std::move(video_id), timestamp_sec, provenance, InlineBytes{std::move(bytes)}, std::move(hash)};
}

FrameRef FrameRef::unresolved(std::string hash) {
    FrameRef f;
    f.provenance = Provenance::Retrieved;
    f.hash = std::move(hash);
    return f;
}

std::string ToolCall::trimmed_query() const { return std::string(trim(query)); }

std::optional<std::string> trace_violation(const InterleavedTrace& trace) {
    std::size_t calls = 0;
    // Index of the last segment that is not whitespace-only text.
    const Segment* previous = nullptr;
    for (const auto& seg : trace.think) {
        if (const auto* call = std::get_if<ToolCall>(&seg)) {
            if (++calls > 1) return "more than one tool call";
            if (trim(call->query).empty()) return "empty tool query";
        } else if (const auto* block = std::get_if<FrameBlock>(&seg)) {
            if (block->frames.empty()) return "empty frame block";
            if (previous == nullptr || !std::holds_alternative<ToolCall>(*previous)) {
                return "frame block not preceded by a tool call";
            }
        } else if (trim(std::get<TextSegment>(seg).content).empty()) {
            continue;
        }
        previous = &seg;
    }
    if (trace.complete && !trace.answer) return "complete trace without answer";
    if (!trim(trace.separator).empty()) return "non-whitespace separator";
    return std::nullopt;
}

std::size_t trace_frame_count(const InterleavedTrace& trace) {
    std::size_t n = 0;
    for (const auto& seg : trace.think) {
        if (const auto* block = std::get_if<FrameBlock>(&seg)) n += block->frames.size();
    }
    return n;
}

std::size_t trace_tool_call_count(const InterleavedTrace& trace) {
    std::size_t n = 0;
    for (const auto& seg : trace.think) n += std::holds_alternative<ToolCall>(seg) ? 1 : 0;
    return n;
}

std::optional<ToolCall> first_tool_call(const InterleavedTrace& trace) {
    for (const auto& seg : trace.think) {
        if (const auto* call = std::get_if<ToolCall>(&seg)) return *call;
    }
    return std::nullopt;
}

std::vector<FrameRef> trace_frames(const InterleavedTrace& trace) {
    std::vector<FrameRef> out;
    for (const auto& seg : trace.think) {
        if (const auto* block = std::get_if<FrameBlock>(&seg)) {
            out.insert(out.end(), block->frames.begin(), block->frames.end());
        }
    }
    return out;
}

}  // namespace framecot
