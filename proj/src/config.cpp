#include "framecot/config.hpp"

#include "framecot/error.hpp"
#include "framecot/frame_store.hpp"

#include <nlohmann/json.hpp>

#include <charconv>
#include <cstdlib>
#include <set>

namespace framecot {

using nlohmann::json;

void AppConfig::set_seed(std::uint64_t s) {
    seed = s;
    engine.rng_seed = s;
    pipeline.seed = s;
}

void AppConfig::validate() const {
    if (backends.mode != "mock" && backends.mode != "remote") {
        fail(ErrorCode::ConfigError, "backends.mode must be \"mock\" or \"remote\", got \"" + backends.mode + "\"");
    }
    if (backends.mode == "remote") {
        const std::pair<const char*, const EndpointConfig*> eps[] = {{"reasoner", &backends.reasoner},
                                                                      {"retriever", &backends.retriever},
                                                                      {"generator", &backends.generator},
                                                                      {"embedder", &backends.embedder}};
        for (const auto& [name, ep] : eps) {
            if (ep->base_url.empty()) fail(ErrorCode::ConfigError, std::string("backends.") + name + ".url is required in remote mode");
            if (ep->timeout_ms <= 0 || ep->retries < 0 || ep->concurrency <= 0) {
                fail(ErrorCode::ConfigError, std::string("backends.") + name + ": timeout_ms and concurrency must be > 0, retries >= 0");
            }
        }
    }
    if (workers < 1) fail(ErrorCode::ConfigError, "workers must be >= 1");
    static const std::set<std::string> levels = {"trace", "debug", "info", "warn", "error", "critical", "off"};
    if (levels.count(log_level) == 0) fail(ErrorCode::ConfigError, "unknown log level \"" + log_level + "\"");
    if (max_initial_frames && *max_initial_frames == 0) fail(ErrorCode::ConfigError, "engine.max_initial_frames must be >= 1");
    engine.validate();
    pipeline.validate();
}

std::optional<std::string> process_env(const char* name) {
    const char* v = std::getenv(name);
    if (v == nullptr) return std::nullopt;
    return std::string(v);
}

namespace {

void check_keys(const json& obj, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!obj.is_object()) fail(ErrorCode::ConfigError, where + " must be an object");
    for (const auto& [key, _] : obj.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) fail(ErrorCode::ConfigError, "unknown key \"" + (where.empty() ? key : where + "." + key) + "\"");
    }
}

template <typename T>
void read(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        fail(ErrorCode::ConfigError, "wrong type for \"" + where + "." + key + "\"");
    }
}

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base.empty() ? base / path : path;
}

void read_endpoint(const json& obj, const std::string& where, EndpointConfig& ep) {
    check_keys(obj, where, {"url", "timeout_ms", "retries", "concurrency"});
    read(obj, "url", ep.base_url, where);
    read(obj, "timeout_ms", ep.timeout_ms, where);
    read(obj, "retries", ep.retries, where);
    read(obj, "concurrency", ep.concurrency, where);
}

template <typename T>
T parse_number(const std::string& text, const char* name) {
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end) fail(ErrorCode::ConfigError, std::string(name) + " is not a valid number: \"" + text + "\"");
    return value;
}

}  // namespace

AppConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        fail(ErrorCode::ConfigError, std::string("config is not valid JSON: ") + e.what());
    }
    AppConfig cfg;
    check_keys(root, "", {"backends", "engine", "pipeline", "paths", "seed", "workers", "log_level"});

    if (root.contains("backends")) {
        const auto& b = root["backends"];
        check_keys(b, "backends", {"mode", "script", "reasoner", "retriever", "generator", "embedder"});
        read(b, "mode", cfg.backends.mode, "backends");
        if (b.contains("script")) {
            std::string script;
            read(b, "script", script, "backends");
            cfg.backends.script = resolve(base_dir, script);
        }
        if (b.contains("reasoner")) read_endpoint(b["reasoner"], "backends.reasoner", cfg.backends.reasoner);
        if (b.contains("retriever")) read_endpoint(b["retriever"], "backends.retriever", cfg.backends.retriever);
        if (b.contains("generator")) read_endpoint(b["generator"], "backends.generator", cfg.backends.generator);
        if (b.contains("embedder")) read_endpoint(b["embedder"], "backends.embedder", cfg.backends.embedder);
    }

    if (root.contains("engine")) {
        const auto& e = root["engine"];
        check_keys(e, "engine", {"initial_fps", "retrieval_fps", "max_initial_frames", "round1_template",
                                 "round2_template", "failure_injection_rate"});
        read(e, "initial_fps", cfg.engine.initial_fps, "engine");
        read(e, "retrieval_fps", cfg.engine.retrieval_fps, "engine");
        read(e, "failure_injection_rate", cfg.engine.failure_injection_rate, "engine");
        if (e.contains("max_initial_frames") && !e["max_initial_frames"].is_null()) {
            std::size_t cap = 0;
            read(e, "max_initial_frames", cap, "engine");
            cfg.max_initial_frames = cap;
        }
        const bool r1 = e.contains("round1_template");
        const bool r2 = e.contains("round2_template");
        if (r1 != r2) fail(ErrorCode::ConfigError, "engine.round1_template and engine.round2_template go together");
        if (r1) {
            std::string p1;
            std::string p2;
            read(e, "round1_template", p1, "engine");
            read(e, "round2_template", p2, "engine");
            cfg.engine.templates = PromptTemplates::from_files(resolve(base_dir, p1), resolve(base_dir, p2));
        }
    }

    if (root.contains("pipeline")) {
        const auto& p = root["pipeline"];
        check_keys(p, "pipeline", {"similarity_threshold", "max_regenerations", "require_gold_cot_for_similarity",
                                   "review_sample_size"});
        read(p, "similarity_threshold", cfg.pipeline.similarity_threshold, "pipeline");
        read(p, "max_regenerations", cfg.pipeline.max_regenerations, "pipeline");
        read(p, "require_gold_cot_for_similarity", cfg.pipeline.require_gold_cot_for_similarity, "pipeline");
        read(p, "review_sample_size", cfg.pipeline.review_sample_size, "pipeline");
    }

    if (root.contains("paths")) {
        const auto& p = root["paths"];
        check_keys(p, "paths", {"manifests"});
        std::vector<std::string> manifests;
        read(p, "manifests", manifests, "paths");
        for (const auto& m : manifests) cfg.manifests.push_back(resolve(base_dir, m));
    }

    std::uint64_t seed = 0;
    read(root, "seed", seed, "");
    cfg.set_seed(seed);
    read(root, "workers", cfg.workers, "");
    read(root, "log_level", cfg.log_level, "");
    return cfg;
}

void apply_env(AppConfig& cfg, const EnvLookup& env) {
    if (auto v = env("FRAMECOT_BACKEND_MODE")) cfg.backends.mode = *v;
    if (auto v = env("FRAMECOT_SCRIPT")) cfg.backends.script = *v;
    if (auto v = env("FRAMECOT_REASONER_URL")) cfg.backends.reasoner.base_url = *v;
    if (auto v = env("FRAMECOT_RETRIEVER_URL")) cfg.backends.retriever.base_url = *v;
    if (auto v = env("FRAMECOT_GENERATOR_URL")) cfg.backends.generator.base_url = *v;
    if (auto v = env("FRAMECOT_EMBEDDER_URL")) cfg.backends.embedder.base_url = *v;
    for (EndpointConfig* ep : {&cfg.backends.reasoner, &cfg.backends.retriever, &cfg.backends.generator, &cfg.backends.embedder}) {
        if (auto v = env("FRAMECOT_TIMEOUT_MS")) ep->timeout_ms = parse_number<int>(*v, "FRAMECOT_TIMEOUT_MS");
        if (auto v = env("FRAMECOT_RETRIES")) ep->retries = parse_number<int>(*v, "FRAMECOT_RETRIES");
    }
    if (auto v = env("FRAMECOT_SEED")) cfg.set_seed(parse_number<std::uint64_t>(*v, "FRAMECOT_SEED"));
    if (auto v = env("FRAMECOT_WORKERS")) cfg.workers = parse_number<int>(*v, "FRAMECOT_WORKERS");
    if (auto v = env("FRAMECOT_LOG_LEVEL")) cfg.log_level = *v;
}

AppConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env) {
    AppConfig cfg;
    if (file) {
        std::string text;
        try {
            text = read_file_bytes(*file);
        } catch (const Error&) {
            fail(ErrorCode::ConfigError, "cannot read config " + file->string());
        }
        cfg = parse_config(text, file->parent_path());
    }
    apply_env(cfg, env);
    return cfg;
}

}  // namespace framecot
