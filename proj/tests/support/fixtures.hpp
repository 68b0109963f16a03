#pragma once

// Synthetic on-disk fixtures shared by the integration tests and the
// acceptance runner.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "gess/evalkit.hpp"
#include "gess/tensor.hpp"

namespace gess::fixtures {

/// Checkerboard of `cell`-pixel squares whose intensities are jittered per
/// cell, sampled at (x - shift_x, y - shift_y) so shifted copies stay
/// consistent at the borders.
Tensor jittered_checkerboard(std::size_t size, std::size_t cell, double shift_x, double shift_y,
                             std::uint64_t seed);

/// Smooth random texture in [0,1] (sum of a few sinusoids).
Tensor smooth_texture(std::size_t h, std::size_t w, std::uint64_t seed);

/// Writes <root>/<name>/1.pgm plus k.pgm and H_1_k for each target.
void write_sequence(const std::filesystem::path& root, const std::string& name, const Tensor& reference,
                    const std::vector<Tensor>& targets, const std::vector<eval::Homography>& homographies);

/// Writes <dir>/<stem>.<role>.gtf for every role except those in `omit`.
/// Uses a depth map (role "depth") unless `with_reliability` is set.
void write_cue_set(const std::filesystem::path& dir, const std::string& stem, std::size_t channels,
                   std::size_t h, std::size_t w, std::uint64_t seed, const std::vector<std::string>& omit = {},
                   bool with_reliability = false);

/// Fresh empty directory under the system temp dir.
std::filesystem::path scratch_dir(const std::string& name);

std::string read_file(const std::filesystem::path& path);

struct ProcessResult {
    int exit_code = -1;
    std::string output;  // stdout and stderr interleaved
};

/// Runs a shell command line, capturing combined output.
ProcessResult run_command(const std::string& command_line);

/// Single-quoted for /bin/sh.
std::string quote(const std::filesystem::path& p);

}  // namespace gess::fixtures
