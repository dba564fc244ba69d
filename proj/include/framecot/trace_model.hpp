#pragma once

// Value types shared by the engine, the dataset pipeline and the evaluation harness.
// Everything here is an immutable-after-construction value and safe to copy across threads.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace framecot {

enum class Provenance { Initial, Retrieved, Generated };
enum class ToolKind { Retrieve, Generate };

std::string_view to_string(Provenance p) noexcept;
std::string_view to_string(ToolKind k) noexcept;
Provenance provenance_from_string(std::string_view s);
ToolKind tool_kind_from_string(std::string_view s);

struct InlineBytes {
    std::string bytes;
    bool operator==(const InlineBytes&) const = default;
};

// monostate: the frame is known only by hash (e.g. parsed from a placeholder with no resolver).
using ContentLocator = std::variant<std::monostate, std::filesystem::path, InlineBytes>;

struct FrameRef {
    std::string video_id;
    double timestamp_sec = 0.0;
    Provenance provenance = Provenance::Initial;
    ContentLocator content;
    std::string hash;  // sha256 hex of the raw bytes

    bool operator==(const FrameRef&) const = default;

    static FrameRef from_file(std::string video_id, double timestamp_sec, Provenance provenance,
                              std::filesystem::path path, std::string hash);
    static FrameRef from_bytes(std::string video_id, double timestamp_sec, Provenance provenance,
                               std::string bytes);
    static FrameRef unresolved(std::string hash);

    bool has_content() const noexcept { return !std::holds_alternative<std::monostate>(content); }
};

struct TextSegment {
    std::string content;
    bool operator==(const TextSegment&) const = default;
};

struct ToolCall {
    ToolKind kind = ToolKind::Retrieve;
    std::string query;  // verbatim text between the tags

    std::string trimmed_query() const;
    bool operator==(const ToolCall&) const = default;
};

struct FrameBlock {
    std::vector<FrameRef> frames;
    bool operator==(const FrameBlock&) const = default;
};

using Segment = std::variant<TextSegment, ToolCall, FrameBlock>;

struct InterleavedTrace {
    std::string preamble;        // text before <think>
    std::vector<Segment> think;  // never holds the answer
    bool think_closed = true;    // false when </think> never appeared
    std::string separator;       // whitespace between </think> and <answer>
    std::optional<std::string> answer;
    bool complete = false;

    bool operator==(const InterleavedTrace&) const = default;
};

// First structural invariant the trace breaks, or nullopt when it is well formed:
// at most one tool call, every frame block directly follows a tool call
// (whitespace-only text in between is tolerated), frame blocks nonempty,
// tool queries nonempty, complete implies an answer.
std::optional<std::string> trace_violation(const InterleavedTrace& trace);

std::size_t trace_frame_count(const InterleavedTrace& trace);
std::size_t trace_tool_call_count(const InterleavedTrace& trace);
std::optional<ToolCall> first_tool_call(const InterleavedTrace& trace);
std::vector<FrameRef> trace_frames(const InterleavedTrace& trace);

struct QaItem {
    std::string item_id;
    std::string video_id;
    std::string question;
    std::vector<std::string> choices;
    std::string gold_answer;
    std::optional<std::string> gold_cot;
    std::string source_dataset;
    std::optional<std::string> category;

    bool operator==(const QaItem&) const = default;
};

struct MaskSpan {
    std::size_t start = 0;
    std::size_t end = 0;  // half-open
    bool included = true;

    std::size_t length() const noexcept { return end - start; }
    bool operator==(const MaskSpan&) const = default;
};

struct SftProvenance {
    int attempts = 1;
    std::optional<double> similarity;
    std::string source_dataset;
    std::optional<ToolKind> tool_used;
    std::string matcher_version;
    std::string similarity_text;  // which trace text fed the similarity gate

    bool operator==(const SftProvenance&) const = default;
};

struct SftRecord {
    std::string item_id;
    std::vector<FrameRef> initial_frames;
    std::string question;
    std::vector<std::string> choices;
    std::string target;
    std::vector<MaskSpan> mask_spans;
    SftProvenance provenance;

    bool operator==(const SftRecord&) const = default;
};

enum class RejectReason { WrongAnswer, LowSimilarity, BadFormat, BackendError, ConfigViolation };

std::string_view to_string(RejectReason r) noexcept;
RejectReason reject_reason_from_string(std::string_view s);

struct QualityReport {
    std::string item_id;
    int attempts = 1;
    bool answer_correct = false;
    std::optional<double> similarity;
    bool format_ok = false;
    bool retained = false;
    std::optional<RejectReason> reject_reason;
    std::string detail;  // free text for backend / config failures

    bool operator==(const QualityReport&) const = default;
};

}  // namespace framecot
