#include "framecot/frame_store.hpp"

#include "framecot/digest.hpp"
#include "framecot/error.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

namespace framecot {

std::string read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

std::size_t sample_count(double duration_sec, double fps) {
    if (!(fps > 0.0)) fail(ErrorCode::InvalidArgument, "fps must be positive");
    // Absorb float noise so that e.g. 10.0 s at 3 fps yields 30, not 31.
    double n = std::ceil(duration_sec * fps - 1e-9);
    return static_cast<std::size_t>(std::max(1.0, n));
}

std::vector<std::size_t> sample_indices(const VideoRecord& video, double fps) {
    if (video.frames.empty()) fail(ErrorCode::EmptyVideo, "video '" + video.video_id + "' has no frames");
    const std::size_t n = sample_count(video.duration_sec, fps);
    std::vector<std::size_t> out;
    out.reserve(n);
    const auto& frames = video.frames;
    for (std::size_t k = 0; k < n; ++k) {
        const double target = static_cast<double>(k) / fps;
        auto it = std::lower_bound(frames.begin(), frames.end(), target,
                                   [](const SourceFrame& f, double t) { return f.timestamp_sec < t; });
        std::size_t idx;
        if (it == frames.end()) {
            idx = frames.size() - 1;
        } else if (it == frames.begin()) {
            idx = 0;
        } else {
            std::size_t hi = static_cast<std::size_t>(it - frames.begin());
            double d_hi = frames[hi].timestamp_sec - target;
            double d_lo = target - frames[hi - 1].timestamp_sec;
            idx = d_lo <= d_hi ? hi - 1 : hi;
        }
        out.push_back(idx);
    }
    return out;
}

std::vector<FrameRef> sample(const VideoRecord& video, double fps, Provenance provenance) {
    std::vector<FrameRef> out;
    for (std::size_t idx : sample_indices(video, fps)) {
        const auto& f = video.frames[idx];
        out.push_back(FrameRef::from_file(video.video_id, f.timestamp_sec, provenance, f.path, f.hash));
    }
    return out;
}

FrameRef middle_frame(std::span<const FrameRef> frames) {
    if (frames.empty()) fail(ErrorCode::EmptyList, "middle_frame of an empty list");
    return frames[(frames.size() - 1) / 2];
}

namespace {

[[noreturn]] void bad_manifest(const std::filesystem::path& path, const std::string& why) {
    fail(ErrorCode::BadManifest, path.string() + ": " + why);
}

}  // namespace

VideoRecord load_manifest(const std::filesystem::path& manifest) {
    nlohmann::json doc;
    try {
        std::ifstream in(manifest);
        if (!in) bad_manifest(manifest, "cannot open");
        doc = nlohmann::json::parse(in);
    } catch (const nlohmann::json::exception& e) {
        bad_manifest(manifest, e.what());
    }
    if (!doc.is_object()) bad_manifest(manifest, "not a JSON object");

    VideoRecord video;
    try {
        video.video_id = doc.at("video_id").get<std::string>();
        video.duration_sec = doc.at("duration_sec").get<double>();
        const auto& frames = doc.at("frames");
        if (!frames.is_array()) bad_manifest(manifest, "frames is not an array");
        const auto base = manifest.parent_path();
        for (const auto& f : frames) {
            SourceFrame frame;
            frame.timestamp_sec = f.at("t").get<double>();
            frame.path = std::filesystem::absolute(base / f.at("path").get<std::string>()).lexically_normal();
            if (f.contains("caption") && !f["caption"].is_null()) frame.caption = f["caption"].get<std::string>();
            video.frames.push_back(std::move(frame));
        }
    } catch (const nlohmann::json::exception& e) {
        bad_manifest(manifest, e.what());
    }

    if (video.video_id.empty()) bad_manifest(manifest, "empty video_id");
    if (!(video.duration_sec > 0.0)) bad_manifest(manifest, "duration_sec must be positive");
    for (std::size_t i = 0; i < video.frames.size(); ++i) {
        const double t = video.frames[i].timestamp_sec;
        if (!(t >= 0.0) || t >= video.duration_sec) bad_manifest(manifest, "frame timestamp outside [0, duration)");
        if (i > 0 && !(t > video.frames[i - 1].timestamp_sec)) {
            bad_manifest(manifest, "frame timestamps not strictly increasing");
        }
    }
    for (auto& frame : video.frames) {
        std::string bytes;
        try {
            bytes = read_file_bytes(frame.path);
        } catch (const Error& e) {
            bad_manifest(manifest, e.what());
        }
        frame.hash = sha256_hex(bytes);
    }
    return video;
}

FrameStore::FrameStore(double initial_fps, std::optional<std::size_t> max_initial_frames)
    : initial_fps_(initial_fps), max_initial_frames_(max_initial_frames) {
    if (!(initial_fps > 0.0)) fail(ErrorCode::InvalidArgument, "initial fps must be positive");
    if (max_initial_frames && *max_initial_frames == 0) fail(ErrorCode::InvalidArgument, "max frames must be >= 1");
}

IngestSummary FrameStore::ingest(VideoRecord video) {
    if (videos_.count(video.video_id) != 0) fail(ErrorCode::BadManifest, "duplicate video_id '" + video.video_id + "'");
    IngestSummary summary{1, video.frames.size()};
    for (std::size_t i = 0; i < video.frames.size(); ++i) {
        by_hash_.try_emplace(video.frames[i].hash, video.video_id, i);
    }
    std::string id = video.video_id;
    videos_.emplace(std::move(id), std::move(video));
    return summary;
}

IngestSummary FrameStore::ingest_manifests(const std::vector<std::filesystem::path>& manifests) {
    IngestSummary total;
    for (const auto& m : manifests) {
        auto s = ingest(load_manifest(m));
        total.videos += s.videos;
        total.frames += s.frames;
    }
    return total;
}

const VideoRecord& FrameStore::video(const std::string& video_id) const {
    auto it = videos_.find(video_id);
    if (it == videos_.end()) fail(ErrorCode::UnknownVideo, "video '" + video_id + "' not ingested");
    return it->second;
}

std::vector<FrameRef> FrameStore::sample(const std::string& video_id, double fps) const {
    const Provenance p = fps == initial_fps_ ? Provenance::Initial : Provenance::Retrieved;
    return framecot::sample(video(video_id), fps, p);
}

std::vector<FrameRef> FrameStore::initial_frames(const std::string& video_id) const {
    auto frames = sample(video_id, initial_fps_);
    if (max_initial_frames_ && frames.size() > *max_initial_frames_) {
        const std::size_t cap = *max_initial_frames_;
        std::vector<FrameRef> capped;
        capped.reserve(cap);
        for (std::size_t j = 0; j < cap; ++j) capped.push_back(frames[j * frames.size() / cap]);
        frames = std::move(capped);
    }
    return frames;
}

const SourceFrame* FrameStore::source_frame(const FrameRef& ref) const {
    auto it = videos_.find(ref.video_id);
    if (it == videos_.end()) return nullptr;
    for (const auto& f : it->second.frames) {
        if (f.hash == ref.hash && f.timestamp_sec == ref.timestamp_sec) return &f;
    }
    return nullptr;
}

std::optional<FrameRef> FrameStore::find_by_hash(std::string_view hash) const {
    auto it = by_hash_.find(std::string(hash));
    if (it == by_hash_.end()) return std::nullopt;
    const auto& [video_id, idx] = it->second;
    const auto& f = videos_.at(video_id).frames[idx];
    return FrameRef::from_file(video_id, f.timestamp_sec, Provenance::Initial, f.path, f.hash);
}

std::string FrameStore::resolve(const FrameRef& ref) const {
    std::string bytes;
    if (const auto* inline_bytes = std::get_if<InlineBytes>(&ref.content)) {
        bytes = inline_bytes->bytes;
    } else if (const auto* path = std::get_if<std::filesystem::path>(&ref.content)) {
        try {
            bytes = read_file_bytes(*path);
        } catch (const Error&) {
            fail(ErrorCode::UnknownFrame, "frame content missing at " + path->string());
        }
    } else {
        auto found = find_by_hash(ref.hash);
        if (!found) fail(ErrorCode::UnknownFrame, "no frame with hash " + ref.hash);
        return resolve(*found);
    }
    if (sha256_hex(bytes) != ref.hash) fail(ErrorCode::UnknownFrame, "content hash mismatch for " + ref.hash);
    return bytes;
}

}  // namespace framecot
