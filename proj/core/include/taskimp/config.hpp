#pragma once

#include <memory>
#include <string>

#include "taskimp/embedding.hpp"
#include "taskimp/retrieval.hpp"
#include "taskimp/simulation.hpp"

namespace taskimp {

enum class ProviderKind { Fallback, External };

/// Fully resolved run configuration. Relative paths in the file are resolved
/// against the config file's directory.
struct RunConfig {
    std::string impedance_db;
    std::string gripper_db;
    std::string decision_tree;
    std::string fixtures;
    std::string chain_right;
    std::string chain_left;

    ProviderKind provider = ProviderKind::Fallback;
    std::size_t embedding_dimension = 384;
    HttpProviderOptions external_embedding;  // used when provider == External

    Environment environment;
    SimConfig simulation;
    PipelineConfig pipeline;

    double accuracy_threshold = 13.0 / 14.0;
    std::string output_dir = "out";

    /// FNV-1a over the canonical serialized form; stamped into output files.
    std::uint64_t config_hash = 0;
};

RunConfig load_run_config(const std::string& path);
RunConfig parse_run_config(const std::string& json_text, const std::string& base_dir,
                           const std::string& location);

std::unique_ptr<EmbeddingProvider> make_provider(const RunConfig& config);

}  // namespace taskimp
