#include "framecot/jsonl.hpp"

#include "framecot/digest.hpp"
#include "framecot/error.hpp"
#include "framecot/tag_parser.hpp"
#include "framecot/text_util.hpp"

#include <fstream>
#include <unistd.h>

namespace framecot::io {

namespace {

Json optional_json(const std::optional<std::string>& v) { return v ? Json(*v) : Json(nullptr); }
Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

std::optional<std::string> optional_string(const Json& j, const char* key) {
    if (!j.contains(key) || j[key].is_null()) return std::nullopt;
    return j[key].get<std::string>();
}

}  // namespace

Json to_json(const FrameRef& f) {
    Json j;
    j["video_id"] = f.video_id;
    j["t"] = f.timestamp_sec;
    j["provenance"] = std::string(to_string(f.provenance));
    j["hash"] = f.hash;
    if (const auto* path = std::get_if<std::filesystem::path>(&f.content)) {
        j["path"] = path->string();
    } else if (const auto* bytes = std::get_if<InlineBytes>(&f.content)) {
        j["b64"] = base64_encode(bytes->bytes);
    }
    return j;
}

FrameRef frame_from_json(const Json& j) {
    FrameRef f;
    f.video_id = j.at("video_id").get<std::string>();
    f.timestamp_sec = j.at("t").get<double>();
    f.provenance = provenance_from_string(j.at("provenance").get<std::string>());
    f.hash = j.at("hash").get<std::string>();
    if (j.contains("path")) {
        f.content = std::filesystem::path(j["path"].get<std::string>());
    } else if (j.contains("b64")) {
        f.content = InlineBytes{base64_decode(j["b64"].get<std::string>())};
    }
    return f;
}

Json to_json(const QaItem& item) {
    Json j;
    j["item_id"] = item.item_id;
    j["video_id"] = item.video_id;
    j["question"] = item.question;
    j["choices"] = item.choices;
    j["gold_answer"] = item.gold_answer;
    j["gold_cot"] = optional_json(item.gold_cot);
    j["source_dataset"] = item.source_dataset;
    j["category"] = optional_json(item.category);
    return j;
}

QaItem qa_from_json(const Json& j) {
    QaItem item;
    item.item_id = j.at("item_id").get<std::string>();
    item.video_id = j.at("video_id").get<std::string>();
    item.question = j.at("question").get<std::string>();
    if (j.contains("choices") && !j["choices"].is_null()) item.choices = j["choices"].get<std::vector<std::string>>();
    item.gold_answer = j.at("gold_answer").get<std::string>();
    item.gold_cot = optional_string(j, "gold_cot");
    item.source_dataset = j.value("source_dataset", std::string{});
    item.category = optional_string(j, "category");
    return item;
}

Json to_json(const SftRecord& r) {
    Json j;
    j["item_id"] = r.item_id;
    j["initial_frames"] = Json::array();
    for (const auto& f : r.initial_frames) j["initial_frames"].push_back(to_json(f));
    j["question"] = r.question;
    j["choices"] = r.choices;
    j["target"] = r.target;
    j["mask_spans"] = Json::array();
    for (const auto& s : r.mask_spans) j["mask_spans"].push_back(Json::array({s.start, s.end, s.included}));
    Json p;
    p["attempts"] = r.provenance.attempts;
    p["similarity"] = optional_json(r.provenance.similarity);
    p["source_dataset"] = r.provenance.source_dataset;
    p["tool_used"] = r.provenance.tool_used ? Json(std::string(to_string(*r.provenance.tool_used))) : Json(nullptr);
    p["matcher_version"] = r.provenance.matcher_version;
    p["similarity_text"] = r.provenance.similarity_text;
    j["provenance"] = std::move(p);
    return j;
}

SftRecord sft_from_json(const Json& j) {
    SftRecord r;
    r.item_id = j.at("item_id").get<std::string>();
    for (const auto& f : j.at("initial_frames")) r.initial_frames.push_back(frame_from_json(f));
    r.question = j.at("question").get<std::string>();
    r.choices = j.at("choices").get<std::vector<std::string>>();
    r.target = j.at("target").get<std::string>();
    for (const auto& s : j.at("mask_spans")) {
        r.mask_spans.push_back({s.at(0).get<std::size_t>(), s.at(1).get<std::size_t>(), s.at(2).get<bool>()});
    }
    const auto& p = j.at("provenance");
    r.provenance.attempts = p.at("attempts").get<int>();
    if (!p.at("similarity").is_null()) r.provenance.similarity = p["similarity"].get<double>();
    r.provenance.source_dataset = p.at("source_dataset").get<std::string>();
    if (auto tool = optional_string(p, "tool_used")) r.provenance.tool_used = tool_kind_from_string(*tool);
    r.provenance.matcher_version = p.value("matcher_version", std::string{});
    r.provenance.similarity_text = p.value("similarity_text", std::string{});
    return r;
}

Json to_json(const QualityReport& r) {
    Json j;
    j["item_id"] = r.item_id;
    j["attempts"] = r.attempts;
    j["answer_correct"] = r.answer_correct;
    j["similarity"] = optional_json(r.similarity);
    j["format_ok"] = r.format_ok;
    j["retained"] = r.retained;
    j["reject_reason"] = r.reject_reason ? Json(std::string(to_string(*r.reject_reason))) : Json(nullptr);
    if (!r.detail.empty()) j["detail"] = r.detail;
    return j;
}

QualityReport report_from_json(const Json& j) {
    QualityReport r;
    r.item_id = j.at("item_id").get<std::string>();
    r.attempts = j.at("attempts").get<int>();
    r.answer_correct = j.at("answer_correct").get<bool>();
    if (!j.at("similarity").is_null()) r.similarity = j["similarity"].get<double>();
    r.format_ok = j.at("format_ok").get<bool>();
    r.retained = j.at("retained").get<bool>();
    if (auto reason = optional_string(j, "reject_reason")) r.reject_reason = reject_reason_from_string(*reason);
    r.detail = j.value("detail", std::string{});
    return r;
}

Json to_json(const CorpusStats& s) {
    Json j;
    j["total"] = s.total;
    j["with_frames"] = s.with_frames;
    j["retrievals"] = s.retrievals;
    j["generations"] = s.generations;
    j["text_only"] = s.text_only;
    j["frame_rate"] = s.frame_rate;
    j["per_source"] = Json::object();
    for (const auto& [k, v] : s.per_source) j["per_source"][k] = v;
    j["items_seen"] = s.items_seen;
    j["rejected"] = Json::object();
    for (const auto& [k, v] : s.rejected) j["rejected"][k] = v;
    return j;
}

Json to_json(const EngineOutcome& o, bool with_timings) {
    Json j;
    j["item_id"] = o.item_id;
    j["status"] = std::string(to_string(o.status));
    j["tool_used"] = o.tool_used ? Json(std::string(to_string(*o.tool_used))) : Json(nullptr);
    j["trace"] = serialize(o.trace);
    j["complete"] = o.trace.complete;
    j["round1_raw"] = o.round1_raw;
    j["round2_raw"] = o.round2_raw;
    j["initial_frames"] = Json::array();
    for (const auto& f : o.initial_frames) j["initial_frames"].push_back(f.hash);
    j["inserted_frames"] = Json::array();
    for (const auto& f : trace_frames(o.trace)) {
        Json fj;
        fj["hash"] = f.hash;
        fj["provenance"] = std::string(to_string(f.provenance));
        fj["t"] = f.timestamp_sec;
        j["inserted_frames"].push_back(std::move(fj));
    }
    j["failure_injected"] = o.failure_injected;
    if (with_timings) {
        j["timings_ms"] = {{"round1", o.timings.round1_ms}, {"tool", o.timings.tool_ms}, {"round2", o.timings.round2_ms}};
    }
    return j;
}

Json to_json(const ItemResult& r, bool with_latency) {
    Json j;
    j["item_id"] = r.item_id;
    j["extracted_answer"] = r.extracted_answer;
    j["correct"] = r.correct;
    j["tool_used"] = r.tool_used ? Json(std::string(to_string(*r.tool_used))) : Json(nullptr);
    j["status"] = r.status;
    j["error"] = optional_json(r.error);
    j["category"] = r.category;
    j["failure_injected"] = r.failure_injected;
    if (with_latency) j["latency_ms"] = r.latency_ms;
    return j;
}

Json summary_json(const EvalResult& r) {
    Json j;
    j["matcher_version"] = std::string(kMatcherVersion);
    j["failure_injection_rate"] = r.failure_injection_rate;
    j["total"] = r.total;
    j["correct"] = r.correct;
    j["with_tool"] = r.with_tool;
    j["accuracy"] = r.accuracy;
    j["call_rate"] = r.call_rate;
    auto tallies = [](const std::map<std::string, Tally>& m) {
        Json out = Json::object();
        for (const auto& [k, t] : m) out[k] = {{"correct", t.correct}, {"total", t.total}, {"accuracy", t.accuracy()}};
        return out;
    };
    j["per_category"] = tallies(r.per_category);
    j["per_tool"] = tallies(r.per_tool);
    j["incomplete"] = r.incomplete;
    return j;
}

std::vector<std::string> read_lines(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) fail(ErrorCode::IoError, "cannot open " + path.string());
    std::vector<std::string> out;
    std::string line;
    while (std::getline(in, line)) {
        if (!is_blank(line)) out.push_back(line);
    }
    return out;
}

namespace {

template <typename T, typename F>
std::vector<T> read_jsonl(const std::filesystem::path& path, F&& convert) {
    std::vector<T> out;
    std::size_t n = 0;
    for (const auto& line : read_lines(path)) {
        ++n;
        try {
            out.push_back(convert(Json::parse(line)));
        } catch (const nlohmann::json::exception& e) {
            fail(ErrorCode::InvalidArgument, path.string() + " record " + std::to_string(n) + ": " + e.what());
        }
    }
    return out;
}

}  // namespace

std::vector<QaItem> read_qa_jsonl(const std::filesystem::path& path) {
    auto items = read_jsonl<QaItem>(path, [](const Json& j) { return qa_from_json(j); });
    for (const auto& item : items) (void)gold_choice_index(item);
    return items;
}

std::vector<SftRecord> read_corpus_jsonl(const std::filesystem::path& path) {
    return read_jsonl<SftRecord>(path, [](const Json& j) { return sft_from_json(j); });
}

std::vector<QualityReport> read_reports_jsonl(const std::filesystem::path& path) {
    return read_jsonl<QualityReport>(path, [](const Json& j) { return report_from_json(j); });
}

std::string to_jsonl(const std::vector<Json>& rows) {
    std::string out;
    for (const auto& r : rows) {
        out += r.dump();
        out += '\n';
    }
    return out;
}

void write_atomic(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) fail(ErrorCode::IoError, "cannot write " + tmp.string());
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) fail(ErrorCode::IoError, "short write to " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        fail(ErrorCode::IoError, "cannot rename onto " + path.string() + ": " + ec.message());
    }
}

}  // namespace framecot::io
