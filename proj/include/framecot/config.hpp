#pragma once

// Application config. Precedence: command-line flags > FRAMECOT_* environment variables >
// config file > defaults. Flags are applied by the caller after load_config().

#include "framecot/engine.hpp"
#include "framecot/pipeline.hpp"
#include "framecot/remote_backends.hpp"

#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace framecot {

struct BackendsConfig {
    std::string mode = "mock";  // "mock" or "remote"
    std::filesystem::path script;  // mock reasoner outputs
    EndpointConfig reasoner;
    EndpointConfig retriever;
    EndpointConfig generator;
    EndpointConfig embedder;
};

struct AppConfig {
    BackendsConfig backends;
    EngineConfig engine;
    std::optional<std::size_t> max_initial_frames;
    PipelineConfig pipeline;
    std::vector<std::filesystem::path> manifests;
    std::uint64_t seed = 0;
    int workers = 1;
    std::string log_level = "info";

    // Copies the global seed into engine and pipeline.
    void set_seed(std::uint64_t s);

    // Throws ConfigError.
    void validate() const;
};

using EnvLookup = std::function<std::optional<std::string>(const char*)>;

// Process environment.
std::optional<std::string> process_env(const char* name);

// Unknown keys and wrong types are ConfigError. Relative paths resolve against the file's directory.
AppConfig parse_config(std::string_view json_text, const std::filesystem::path& base_dir = {});

// FRAMECOT_BACKEND_MODE, FRAMECOT_SCRIPT, FRAMECOT_{REASONER,RETRIEVER,GENERATOR,EMBEDDER}_URL,
// FRAMECOT_TIMEOUT_MS, FRAMECOT_RETRIES, FRAMECOT_SEED, FRAMECOT_WORKERS, FRAMECOT_LOG_LEVEL.
void apply_env(AppConfig& cfg, const EnvLookup& env);

// Defaults, then the file (when given), then the environment. Not validated.
AppConfig load_config(const std::optional<std::filesystem::path>& file, const EnvLookup& env = process_env);

}  // namespace framecot
