#pragma once

// Tag grammar for interleaved reasoning traces.
//
//   preamble <think> text | <retrieve>q</retrieve> | <generate>q</generate> | <frames>[[frame:H]]...</frames>
//   </think> <answer>...</answer>
//
// Tag names are fixed ASCII literals. Model outputs arrive as complete texts; stop
// semantics are applied after the fact by cutting at the first stop marker, which
// is equivalent to breaking the decode loop on that marker.

#include "framecot/trace_model.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>

namespace framecot {

namespace tags {
inline constexpr std::string_view kThinkOpen = "<think>";
inline constexpr std::string_view kThinkClose = "</think>";
inline constexpr std::string_view kRetrieveOpen = "<retrieve>";
inline constexpr std::string_view kRetrieveClose = "</retrieve>";
inline constexpr std::string_view kGenerateOpen = "<generate>";
inline constexpr std::string_view kGenerateClose = "</generate>";
inline constexpr std::string_view kFramesOpen = "<frames>";
inline constexpr std::string_view kFramesClose = "</frames>";
inline constexpr std::string_view kAnswerOpen = "<answer>";
inline constexpr std::string_view kAnswerClose = "</answer>";
inline constexpr std::string_view kPlaceholderOpen = "[[frame:";
inline constexpr std::string_view kPlaceholderClose = "]]";

std::string_view open_tag(ToolKind kind) noexcept;
std::string_view close_tag(ToolKind kind) noexcept;
}  // namespace tags

enum class StopMarker { EndRetrieve, EndGenerate, EndAnswer, EndOfSequence };

std::string_view to_string(StopMarker m) noexcept;

struct ExtractedQuery {
    ToolKind kind = ToolKind::Retrieve;
    std::string query;  // trimmed
    bool operator==(const ExtractedQuery&) const = default;
};

struct ScanResult {
    std::string retained_prefix;
    StopMarker marker = StopMarker::EndOfSequence;
    std::optional<ExtractedQuery> extracted_query;
    std::optional<std::string> extracted_answer;  // trimmed

    bool operator==(const ScanResult&) const = default;
};

// Cuts a round-1 output at the first of </retrieve>, </generate>, </answer>.
// Throws MalformedTag for a close tag without a matching open tag, or a kind mismatch.
ScanResult scan_round1(std::string_view raw);

struct Round2Scan {
    std::string retained;
    StopMarker marker = StopMarker::EndOfSequence;  // EndAnswer or EndOfSequence
    bool contains_tool_tag = false;
};

// Cuts a round-2 continuation at the first </answer> and reports any tool tag in the kept text.
Round2Scan scan_round2(std::string_view raw);

// Maps a content hash to a full FrameRef. Returning nullopt leaves the frame unresolved.
using FrameResolver = std::function<std::optional<FrameRef>(std::string_view hash)>;

// Throws MalformedTag, MissingThink or DanglingFrames.
InterleavedTrace parse_trace(std::string_view raw, const FrameResolver& resolve = {});

std::string serialize(const InterleavedTrace& trace);

bool check_format(const InterleavedTrace& trace) noexcept;

std::string frame_placeholder(std::string_view hash);
std::string frames_block(std::span<const FrameRef> frames);

// True when s contains any tag literal of the vocabulary.
bool contains_tag(std::string_view s) noexcept;

}  // namespace framecot
