#include "framecot/wire.hpp"

#include "framecot/digest.hpp"
#include "framecot/error.hpp"

#include <nlohmann/json.hpp>

namespace framecot::wire {

using Json = nlohmann::ordered_json;

namespace {

[[noreturn]] void protocol(const std::string& what) { fail(ErrorCode::ProtocolError, what); }

Json parse_body(std::string_view body) {
    try {
        auto doc = Json::parse(body);
        if (!doc.is_object()) protocol("body is not a JSON object");
        return doc;
    } catch (const Json::exception& e) {
        protocol(std::string("body is not JSON: ") + e.what());
    }
}

template <typename T>
T field(const Json& doc, const char* key) {
    try {
        return doc.at(key).get<T>();
    } catch (const Json::exception& e) {
        protocol(std::string("field '") + key + "': " + e.what());
    }
}

Json image_json(const FrameRef& ref, const FrameStore& store) {
    Json j;
    j["hash"] = ref.hash;
    j["b64"] = base64_encode(store.resolve(ref));
    return j;
}

Image parse_image(const Json& j) {
    if (!j.is_object()) protocol("image is not an object");
    Image img;
    img.hash = field<std::string>(j, "hash");
    img.bytes = base64_decode(field<std::string>(j, "b64"));
    if (!is_content_hash(img.hash)) protocol("image hash is not a sha256 hex digest");
    if (sha256_hex(img.bytes) != img.hash) protocol("image hash does not match its bytes");
    return img;
}

}  // namespace

std::string reason_request(const ReasonRequest& req, const FrameStore& store) {
    Json body;
    body["frames"] = Json::array();
    for (const auto& f : req.frames) body["frames"].push_back(image_json(f, store));
    body["prompt"] = req.prompt;
    body["pretext"] = req.pretext ? Json(*req.pretext) : Json(nullptr);
    return body.dump();
}

std::string parse_reason_response(std::string_view body) { return field<std::string>(parse_body(body), "text"); }

std::string retrieve_request(const RetrieveRequest& req) {
    Json body;
    body["query"] = req.query;
    body["video_id"] = req.video_id;
    body["fps"] = req.fps;
    return body.dump();
}

std::vector<RetrievedFrame> parse_retrieve_response(std::string_view body) {
    auto doc = parse_body(body);
    auto frames = field<Json>(doc, "frames");
    if (!frames.is_array()) protocol("frames is not an array");
    std::vector<RetrievedFrame> out;
    for (const auto& f : frames) {
        if (!f.is_object()) protocol("frame entry is not an object");
        RetrievedFrame rf{field<double>(f, "t"), field<std::string>(f, "hash")};
        if (!is_content_hash(rf.hash)) protocol("frame hash is not a sha256 hex digest");
        out.push_back(std::move(rf));
    }
    return out;
}

std::string generate_request(const GenerateRequest& req, const FrameStore& store) {
    Json body;
    body["query"] = req.query;
    body["conditioning"] = image_json(req.conditioning, store);
    return body.dump();
}

Image parse_generate_response(std::string_view body) { return parse_image(field<Json>(parse_body(body), "frame")); }

std::string embed_request(const EmbedRequest& req) {
    Json body;
    body["text"] = req.text;
    return body.dump();
}

std::vector<double> parse_embed_response(std::string_view body) {
    auto vec = field<Json>(parse_body(body), "vector");
    if (!vec.is_array() || vec.empty()) protocol("vector is not a nonempty array");
    std::vector<double> out;
    for (const auto& x : vec) {
        if (!x.is_number()) protocol("vector entry is not a number");
        out.push_back(x.get<double>());
    }
    return out;
}

ReasonCall parse_reason_request(std::string_view body) {
    auto doc = parse_body(body);
    ReasonCall call;
    auto frames = field<Json>(doc, "frames");
    if (!frames.is_array()) protocol("frames is not an array");
    for (const auto& f : frames) call.frames.push_back(parse_image(f));
    call.prompt = field<std::string>(doc, "prompt");
    if (doc.contains("pretext") && !doc["pretext"].is_null()) call.pretext = field<std::string>(doc, "pretext");
    return call;
}

std::string reason_response(std::string_view text) {
    Json body;
    body["text"] = std::string(text);
    return body.dump();
}

RetrieveRequest parse_retrieve_request(std::string_view body) {
    auto doc = parse_body(body);
    return RetrieveRequest{field<std::string>(doc, "query"), field<std::string>(doc, "video_id"),
                           field<double>(doc, "fps")};
}

std::string retrieve_response(const std::vector<FrameRef>& frames) {
    Json body;
    body["frames"] = Json::array();
    for (const auto& f : frames) {
        Json j;
        j["t"] = f.timestamp_sec;
        j["hash"] = f.hash;
        body["frames"].push_back(std::move(j));
    }
    return body.dump();
}

GenerateCall parse_generate_request(std::string_view body) {
    auto doc = parse_body(body);
    return GenerateCall{field<std::string>(doc, "query"), parse_image(field<Json>(doc, "conditioning"))};
}

std::string generate_response(std::string_view frame_bytes) {
    Json frame;
    frame["hash"] = sha256_hex(frame_bytes);
    frame["b64"] = base64_encode(frame_bytes);
    Json body;
    body["frame"] = std::move(frame);
    return body.dump();
}

EmbedRequest parse_embed_request(std::string_view body) {
    return EmbedRequest{field<std::string>(parse_body(body), "text")};
}

std::string embed_response(const std::vector<double>& vector) {
    Json body;
    body["vector"] = vector;
    return body.dump();
}

std::string error_response(std::string_view message) {
    Json body;
    body["error"] = std::string(message);
    return body.dump();
}

std::string parse_error(std::string_view body) {
    try {
        auto doc = Json::parse(body);
        if (doc.is_object() && doc.contains("error") && doc["error"].is_string()) return doc["error"].get<std::string>();
    } catch (const Json::exception&) {
    }
    return std::string(body);
}

}  // namespace framecot::wire
