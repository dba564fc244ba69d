#include "framecot/tag_parser.hpp"

#include "framecot/digest.hpp"
#include "framecot/error.hpp"
#include "framecot/text_util.hpp"

#include <array>
#include <vector>

namespace framecot {

namespace tags {
std::string_view open_tag(ToolKind kind) noexcept { return kind == ToolKind::Retrieve ? kRetrieveOpen : kGenerateOpen; }
std::string_view close_tag(ToolKind kind) noexcept {
    return kind == ToolKind::Retrieve ? kRetrieveClose : kGenerateClose;
}
}  // namespace tags

std::string_view to_string(StopMarker m) noexcept {
    switch (m) {
        case StopMarker::EndRetrieve: return "end_retrieve";
        case StopMarker::EndGenerate: return "end_generate";
        case StopMarker::EndAnswer: return "end_answer";
        case StopMarker::EndOfSequence: return "eos";
    }
    return "eos";
}

namespace {

enum class Tag {
    ThinkOpen,
    ThinkClose,
    RetrieveOpen,
    RetrieveClose,
    GenerateOpen,
    GenerateClose,
    FramesOpen,
    FramesClose,
    AnswerOpen,
    AnswerClose,
};

struct TagLiteral {
    Tag tag;
    std::string_view text;
};

constexpr std::array<TagLiteral, 10> kTags{{
    {Tag::ThinkOpen, tags::kThinkOpen},
    {Tag::ThinkClose, tags::kThinkClose},
    {Tag::RetrieveOpen, tags::kRetrieveOpen},
    {Tag::RetrieveClose, tags::kRetrieveClose},
    {Tag::GenerateOpen, tags::kGenerateOpen},
    {Tag::GenerateClose, tags::kGenerateClose},
    {Tag::FramesOpen, tags::kFramesOpen},
    {Tag::FramesClose, tags::kFramesClose},
    {Tag::AnswerOpen, tags::kAnswerOpen},
    {Tag::AnswerClose, tags::kAnswerClose},
}};

std::string_view literal(Tag t) noexcept { return kTags[static_cast<std::size_t>(t)].text; }

struct Token {
    bool is_tag = false;
    Tag tag = Tag::ThinkOpen;
    std::string_view text;  // text run, or the tag literal
};

std::vector<Token> lex(std::string_view raw) {
    std::vector<Token> out;
    std::size_t text_start = 0;
    std::size_t pos = 0;
    while ((pos = raw.find('<', pos)) != std::string_view::npos) {
        const TagLiteral* hit = nullptr;
        for (const auto& lit : kTags) {
            if (raw.compare(pos, lit.text.size(), lit.text) == 0) {
                hit = &lit;
                break;
            }
        }
        if (hit == nullptr) {
            ++pos;
            continue;
        }
        if (pos > text_start) out.push_back({false, Tag::ThinkOpen, raw.substr(text_start, pos - text_start)});
        out.push_back({true, hit->tag, hit->text});
        pos += hit->text.size();
        text_start = pos;
    }
    if (text_start < raw.size()) out.push_back({false, Tag::ThinkOpen, raw.substr(text_start)});
    return out;
}

[[noreturn]] void malformed(const std::string& what) { fail(ErrorCode::MalformedTag, what); }

std::vector<std::string> parse_placeholders(std::string_view body) {
    std::vector<std::string> hashes;
    while (!body.empty()) {
        if (body.substr(0, tags::kPlaceholderOpen.size()) != tags::kPlaceholderOpen) {
            malformed("frames block content is not a frame placeholder");
        }
        body.remove_prefix(tags::kPlaceholderOpen.size());
        auto close = body.find(tags::kPlaceholderClose);
        if (close == std::string_view::npos) malformed("unterminated frame placeholder");
        auto hash = body.substr(0, close);
        if (!is_content_hash(hash)) malformed("frame placeholder carries an invalid content hash");
        hashes.emplace_back(hash);
        body.remove_prefix(close + tags::kPlaceholderClose.size());
    }
    if (hashes.empty()) malformed("empty frames block");
    return hashes;
}

class TraceParser {
public:
    TraceParser(std::string_view raw, const FrameResolver& resolve) : tokens_(lex(raw)), resolve_(resolve) {}

    InterleavedTrace run() {
        parse_preamble();
        parse_think();
        if (trace_.think_closed) parse_after_think();
        parse_trailer();
        trace_.complete = trace_.answer.has_value();
        return std::move(trace_);
    }

private:
    bool at_end() const { return i_ >= tokens_.size(); }
    const Token& peek() const { return tokens_[i_]; }
    const Token& next() { return tokens_[i_++]; }

    void parse_preamble() {
        while (!at_end()) {
            const Token& tok = next();
            if (!tok.is_tag) {
                trace_.preamble.append(tok.text);
                continue;
            }
            if (tok.tag == Tag::ThinkOpen) return;
            if (tok.tag == Tag::AnswerOpen) fail(ErrorCode::MissingThink, "answer without a think block");
            malformed(std::string(tok.text) + " before <think>");
        }
        fail(ErrorCode::MissingThink, "no <think> block");
    }

    void append_text(std::string_view text) {
        if (!trace_.think.empty()) {
            if (auto* seg = std::get_if<TextSegment>(&trace_.think.back())) {
                seg->content.append(text);
                return;
            }
        }
        trace_.think.emplace_back(TextSegment{std::string(text)});
    }

    // Body text between an open tag and its close tag; empty when the close follows directly.
    std::string_view take_body(Tag close, std::string_view what) {
        std::string_view body;
        if (!at_end() && !peek().is_tag) body = next().text;
        if (at_end()) malformed("unterminated " + std::string(what));
        const Token& tok = next();
        if (!tok.is_tag || tok.tag != close) {
            malformed("expected " + std::string(literal(close)) + ", found " + std::string(tok.text));
        }
        return body;
    }

    bool last_meaningful_is_tool_call() const {
        for (auto it = trace_.think.rbegin(); it != trace_.think.rend(); ++it) {
            if (const auto* text = std::get_if<TextSegment>(&*it)) {
                if (is_blank(text->content)) continue;
                return false;
            }
            return std::holds_alternative<ToolCall>(*it);
        }
        return false;
    }

    void parse_think() {
        while (!at_end()) {
            const Token& tok = next();
            if (!tok.is_tag) {
                append_text(tok.text);
                continue;
            }
            switch (tok.tag) {
                case Tag::RetrieveOpen:
                case Tag::GenerateOpen: {
                    ToolKind kind = tok.tag == Tag::RetrieveOpen ? ToolKind::Retrieve : ToolKind::Generate;
                    Tag close = kind == ToolKind::Retrieve ? Tag::RetrieveClose : Tag::GenerateClose;
                    auto body = take_body(close, tok.text);
                    if (is_blank(body)) malformed("empty tool query");
                    trace_.think.emplace_back(ToolCall{kind, std::string(body)});
                    break;
                }
                case Tag::FramesOpen: {
                    if (!last_meaningful_is_tool_call()) {
                        fail(ErrorCode::DanglingFrames, "frames block not preceded by a tool call");
                    }
                    auto body = take_body(Tag::FramesClose, tok.text);
                    FrameBlock block;
                    for (auto& hash : parse_placeholders(body)) block.frames.push_back(resolve(hash));
                    trace_.think.emplace_back(std::move(block));
                    break;
                }
                case Tag::ThinkClose:
                    trace_.think_closed = true;
                    return;
                case Tag::AnswerOpen:
                    trace_.think_closed = false;
                    parse_answer_body();
                    return;
                default:
                    malformed("unexpected " + std::string(tok.text) + " inside <think>");
            }
        }
        trace_.think_closed = false;
    }

    void parse_answer_body() {
        auto body = take_body(Tag::AnswerClose, tags::kAnswerOpen);
        trace_.answer = std::string(body);
    }

    void parse_after_think() {
        while (!at_end()) {
            const Token& tok = next();
            if (!tok.is_tag) {
                if (!is_blank(tok.text)) malformed("text between </think> and <answer>");
                trace_.separator.append(tok.text);
                continue;
            }
            if (tok.tag == Tag::AnswerOpen) {
                parse_answer_body();
                return;
            }
            malformed("unexpected " + std::string(tok.text) + " after </think>");
        }
    }

    void parse_trailer() {
        while (!at_end()) {
            const Token& tok = next();
            if (tok.is_tag || !is_blank(tok.text)) malformed("content after the end of the trace");
        }
    }

    FrameRef resolve(const std::string& hash) const {
        if (resolve_) {
            if (auto ref = resolve_(hash)) return *ref;
        }
        return FrameRef::unresolved(hash);
    }

    std::vector<Token> tokens_;
    std::size_t i_ = 0;
    const FrameResolver& resolve_;
    InterleavedTrace trace_;
};

}  // namespace

ScanResult scan_round1(std::string_view raw) {
    struct Candidate {
        std::string_view close;
        StopMarker marker;
    };
    constexpr std::array<Candidate, 3> kStops{{
        {tags::kRetrieveClose, StopMarker::EndRetrieve},
        {tags::kGenerateClose, StopMarker::EndGenerate},
        {tags::kAnswerClose, StopMarker::EndAnswer},
    }};

    std::size_t best = std::string_view::npos;
    const Candidate* hit = nullptr;
    for (const auto& c : kStops) {
        auto pos = raw.find(c.close);
        if (pos < best) {
            best = pos;
            hit = &c;
        }
    }

    ScanResult result;
    if (hit == nullptr) {
        result.retained_prefix = std::string(raw);
        result.marker = StopMarker::EndOfSequence;
        return result;
    }

    const std::size_t end = best + hit->close.size();
    result.retained_prefix = std::string(raw.substr(0, end));
    result.marker = hit->marker;
    std::string_view head = raw.substr(0, best);

    if (hit->marker == StopMarker::EndAnswer) {
        auto open = head.rfind(tags::kAnswerOpen);
        if (open == std::string_view::npos) malformed("</answer> without <answer>");
        auto body = head.substr(open + tags::kAnswerOpen.size());
        if (contains_tag(body)) malformed("tag inside <answer>");
        result.extracted_answer = std::string(trim(body));
        return result;
    }

    const ToolKind kind = hit->marker == StopMarker::EndRetrieve ? ToolKind::Retrieve : ToolKind::Generate;
    const ToolKind other = kind == ToolKind::Retrieve ? ToolKind::Generate : ToolKind::Retrieve;
    auto open = head.rfind(tags::open_tag(kind));
    auto other_open = head.rfind(tags::open_tag(other));
    if (open == std::string_view::npos && other_open == std::string_view::npos) {
        malformed(std::string(hit->close) + " without a matching open tag");
    }
    if (other_open != std::string_view::npos && (open == std::string_view::npos || other_open > open)) {
        malformed(std::string(tags::open_tag(other)) + " closed by " + std::string(hit->close));
    }
    auto body = head.substr(open + tags::open_tag(kind).size());
    if (contains_tag(body)) malformed("tag inside tool query");
    auto query = trim(body);
    if (query.empty()) malformed("empty tool query");
    result.extracted_query = ExtractedQuery{kind, std::string(query)};
    return result;
}

Round2Scan scan_round2(std::string_view raw) {
    Round2Scan scan;
    auto pos = raw.find(tags::kAnswerClose);
    if (pos == std::string_view::npos) {
        scan.retained = std::string(raw);
    } else {
        scan.retained = std::string(raw.substr(0, pos + tags::kAnswerClose.size()));
        scan.marker = StopMarker::EndAnswer;
    }
    for (auto t : {tags::kRetrieveOpen, tags::kRetrieveClose, tags::kGenerateOpen, tags::kGenerateClose}) {
        if (scan.retained.find(t) != std::string::npos) scan.contains_tool_tag = true;
    }
    return scan;
}

InterleavedTrace parse_trace(std::string_view raw, const FrameResolver& resolve) {
    return TraceParser(raw, resolve).run();
}

std::string frame_placeholder(std::string_view hash) {
    std::string out(tags::kPlaceholderOpen);
    out.append(hash);
    out.append(tags::kPlaceholderClose);
    return out;
}

std::string frames_block(std::span<const FrameRef> frames) {
    std::string out(tags::kFramesOpen);
    for (const auto& f : frames) out += frame_placeholder(f.hash);
    out.append(tags::kFramesClose);
    return out;
}

std::string serialize(const InterleavedTrace& trace) {
    std::string out = trace.preamble;
    out.append(tags::kThinkOpen);
    for (const auto& seg : trace.think) {
        if (const auto* text = std::get_if<TextSegment>(&seg)) {
            out += text->content;
        } else if (const auto* call = std::get_if<ToolCall>(&seg)) {
            out.append(tags::open_tag(call->kind));
            out += call->query;
            out.append(tags::close_tag(call->kind));
        } else {
            out += frames_block(std::get<FrameBlock>(seg).frames);
        }
    }
    if (trace.think_closed) {
        out.append(tags::kThinkClose);
        out += trace.separator;
    }
    if (trace.answer) {
        out.append(tags::kAnswerOpen);
        out += *trace.answer;
        out.append(tags::kAnswerClose);
    }
    return out;
}

bool check_format(const InterleavedTrace& trace) noexcept {
    return trace.think_closed && trace.answer.has_value() && !trace_violation(trace).has_value();
}

bool contains_tag(std::string_view s) noexcept {
    for (const auto& lit : kTags) {
        if (s.find(lit.text) != std::string_view::npos) return true;
    }
    return false;
}

}  // namespace framecot
