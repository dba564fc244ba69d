#pragma once

#include "framecot/trace_model.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace framecot {

struct SourceFrame {
    double timestamp_sec = 0.0;
    std::filesystem::path path;  // absolute, resolved against the manifest directory
    std::optional<std::string> caption;
    std::string hash;
};

struct VideoRecord {
    std::string video_id;
    double duration_sec = 0.0;
    std::vector<SourceFrame> frames;  // strictly increasing timestamps, all < duration
};

// Number of sample targets k/fps for k = 0 .. ceil(duration * fps) - 1.
std::size_t sample_count(double duration_sec, double fps);

// Indices into video.frames nearest to each target k/fps. Distance ties go to the earlier frame.
std::vector<std::size_t> sample_indices(const VideoRecord& video, double fps);

// Throws EmptyVideo when the video has no frames and InvalidArgument for fps <= 0.
std::vector<FrameRef> sample(const VideoRecord& video, double fps, Provenance provenance);

// frames[(n - 1) / 2]; throws EmptyList.
FrameRef middle_frame(std::span<const FrameRef> frames);

// Parses one manifest file: {"video_id", "duration_sec", "frames": [{"t", "path", "caption"?}]}.
// Frame paths are resolved against the manifest's directory and hashed. Throws BadManifest.
VideoRecord load_manifest(const std::filesystem::path& manifest);

struct IngestSummary {
    std::size_t videos = 0;
    std::size_t frames = 0;
};

// Read-only after ingestion; concurrent reads are safe, ingestion is single-writer.
class FrameStore {
public:
    explicit FrameStore(double initial_fps = 1.0, std::optional<std::size_t> max_initial_frames = std::nullopt);

    // Throws BadManifest on duplicate video ids.
    IngestSummary ingest(VideoRecord video);
    IngestSummary ingest_manifests(const std::vector<std::filesystem::path>& manifests);

    const VideoRecord& video(const std::string& video_id) const;
    bool contains(const std::string& video_id) const { return videos_.count(video_id) != 0; }
    std::size_t video_count() const { return videos_.size(); }

    double initial_fps() const { return initial_fps_; }

    // Sampled frames, tagged Initial when fps equals the configured initial rate and Retrieved otherwise.
    std::vector<FrameRef> sample(const std::string& video_id, double fps) const;
    std::vector<FrameRef> initial_frames(const std::string& video_id) const;

    // Source frame behind a sampled ref (by video and hash); nullopt when unknown.
    const SourceFrame* source_frame(const FrameRef& ref) const;

    // Any ingested frame with this hash, as an Initial-provenance ref.
    std::optional<FrameRef> find_by_hash(std::string_view hash) const;

    // Raw bytes for a ref. Throws UnknownFrame when the content cannot be read
    // or its hash does not match.
    std::string resolve(const FrameRef& ref) const;

private:
    double initial_fps_;
    std::optional<std::size_t> max_initial_frames_;
    std::map<std::string, VideoRecord> videos_;
    std::unordered_map<std::string, std::pair<std::string, std::size_t>> by_hash_;
};

std::string read_file_bytes(const std::filesystem::path& path);

}  // namespace framecot
