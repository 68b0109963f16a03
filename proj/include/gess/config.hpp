#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "gess/coupled_head.hpp"
#include "gess/depth_stability.hpp"

namespace gess::cli {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Every tunable of the tool, with defaults materialized.
///
/// Text form is INI-like: "[section]" headers and "key = value" lines; '#'
/// starts a comment. Unknown sections or keys are errors.
struct RunConfig {
    // [paths]
    std::string params_dir;  // empty: seeded random parameters
    std::string output_dir = "out";

    // [sdak]
    double alpha = 1.0;
    double beta = 1.0;
    std::size_t nms_radius = 4;
    std::size_t top_k = 10000;
    double score_threshold = 0.0;
    std::size_t border_margin = 4;

    // [stability]
    stability::StabilityConstants stability;

    // [utcf]
    std::size_t channels = 128;
    std::size_t reduction = 4;
    double mu = 0.1;

    // [semantic]
    coupled::SemanticWeightTable semantic_weights;

    // [classifier]
    coupled::SaliencyClassifierParams classifier;

    // [matcher]
    bool mutual = true;

    // [eval]
    std::vector<double> auc_thresholds{2.0, 5.0};

    // [toy]
    std::size_t patch_radius = 3;
    double relative_threshold = 0.05;

    // [run]
    std::uint64_t seed = 7;
    std::size_t jobs = 1;

    void validate() const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);
/// Canonical text form; parse_config(dump_config(c)) reproduces c.
std::string dump_config(const RunConfig& config);
/// FNV-1a of the canonical text, 16 hex digits.
std::string config_hash(const RunConfig& config);

}  // namespace gess::cli
