#pragma once

// JSON forms of the domain types, JSON-lines readers, and atomic file output.

#include "framecot/engine.hpp"
#include "framecot/eval_harness.hpp"
#include "framecot/pipeline.hpp"
#include "framecot/trace_model.hpp"

#include <nlohmann/json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace framecot::io {

using Json = nlohmann::ordered_json;

Json to_json(const FrameRef& f);
FrameRef frame_from_json(const Json& j);

Json to_json(const QaItem& item);
QaItem qa_from_json(const Json& j);

// Mask spans as [start, end, included] triples.
Json to_json(const SftRecord& r);
SftRecord sft_from_json(const Json& j);

Json to_json(const QualityReport& r);
QualityReport report_from_json(const Json& j);

Json to_json(const CorpusStats& s);

// Frames are written by hash; the trace in canonical serialized form.
Json to_json(const EngineOutcome& o, bool with_timings = false);

Json to_json(const ItemResult& r, bool with_latency = false);
Json summary_json(const EvalResult& r);

// Non-blank lines of a text file. Throws IoError.
std::vector<std::string> read_lines(const std::filesystem::path& path);

// QaItems, one per line; multiple-choice gold answers must resolve. Throws InvalidArgument
// with the line number on malformed input.
std::vector<QaItem> read_qa_jsonl(const std::filesystem::path& path);

std::vector<SftRecord> read_corpus_jsonl(const std::filesystem::path& path);
std::vector<QualityReport> read_reports_jsonl(const std::filesystem::path& path);

// One compact JSON value per line, each terminated by '\n'.
std::string to_jsonl(const std::vector<Json>& rows);

// Writes to a sibling temporary file and renames it over the target. Throws IoError.
void write_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace framecot::io
