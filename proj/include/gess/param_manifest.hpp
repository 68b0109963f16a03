#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "gess/tensor.hpp"

namespace gess {

// A parameter directory holds one GTF file per tensor plus manifest.json:
//   {"scalars": {name: value},
//    "tensors": {name: {"file": "<name>.gtf", "role": "...", "shape": [...]}}}

struct ParamEntry {
    Tensor tensor;
    std::string role;
};

struct ParamDir {
    std::map<std::string, ParamEntry> tensors;
    std::map<std::string, double> scalars;

    [[nodiscard]] bool has(const std::string& name) const { return tensors.count(name) != 0; }
    /// Throws std::out_of_range naming the missing parameter.
    [[nodiscard]] const Tensor& tensor(const std::string& name) const;
    [[nodiscard]] double scalar(const std::string& name) const;
    void put(const std::string& name, Tensor t, std::string role);
};

inline constexpr const char* kManifestName = "manifest.json";

/// Writes tensors and manifest; existing entries from other writers are merged.
void write_param_dir(const ParamDir& params, const std::filesystem::path& dir);
ParamDir read_param_dir(const std::filesystem::path& dir);

}  // namespace gess
