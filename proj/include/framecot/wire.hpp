#pragma once

// JSON-over-HTTP bodies for the four backend endpoints.
//
//   POST /v1/reason    {"frames":[{"hash":hex,"b64":...}],"prompt":str,"pretext":str|null} -> {"text":str}
//   POST /v1/retrieve  {"query":str,"video_id":str,"fps":num} -> {"frames":[{"t":num,"hash":hex}]}
//   POST /v1/generate  {"query":str,"conditioning":{"hash":hex,"b64":...}} -> {"frame":{"hash":hex,"b64":...}}
//   POST /v1/embed     {"text":str} -> {"vector":[num,...]}
//
// Failures are non-200 responses carrying {"error":str}. Both the client and the server
// side of each body live here so that adapters and test servers share one definition.
// Malformed bodies raise Error(ProtocolError).

#include "framecot/backends.hpp"
#include "framecot/frame_store.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace framecot::wire {

inline constexpr std::string_view kReasonPath = "/v1/reason";
inline constexpr std::string_view kRetrievePath = "/v1/retrieve";
inline constexpr std::string_view kGeneratePath = "/v1/generate";
inline constexpr std::string_view kEmbedPath = "/v1/embed";

struct Image {
    std::string hash;
    std::string bytes;  // decoded; hash verified
};

struct RetrievedFrame {
    double t = 0.0;
    std::string hash;
};

// client side
std::string reason_request(const ReasonRequest& req, const FrameStore& store);
std::string parse_reason_response(std::string_view body);
std::string retrieve_request(const RetrieveRequest& req);
std::vector<RetrievedFrame> parse_retrieve_response(std::string_view body);
std::string generate_request(const GenerateRequest& req, const FrameStore& store);
Image parse_generate_response(std::string_view body);
std::string embed_request(const EmbedRequest& req);
std::vector<double> parse_embed_response(std::string_view body);

// server side
struct ReasonCall {
    std::vector<Image> frames;
    std::string prompt;
    std::optional<std::string> pretext;
};
ReasonCall parse_reason_request(std::string_view body);
std::string reason_response(std::string_view text);
RetrieveRequest parse_retrieve_request(std::string_view body);
std::string retrieve_response(const std::vector<FrameRef>& frames);
struct GenerateCall {
    std::string query;
    Image conditioning;
};
GenerateCall parse_generate_request(std::string_view body);
std::string generate_response(std::string_view frame_bytes);
EmbedRequest parse_embed_request(std::string_view body);
std::string embed_response(const std::vector<double>& vector);

std::string error_response(std::string_view message);
// The "error" field of a failure body, or the raw body when it is not one.
std::string parse_error(std::string_view body);

}  // namespace framecot::wire
