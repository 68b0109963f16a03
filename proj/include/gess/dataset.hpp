#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "gess/evalkit.hpp"

namespace gess::eval {

/// Reference image "1" against target image k of one sequence folder.
struct SequencePair {
    std::string sequence;
    std::size_t pair_index = 0;  // k in 2..6
    std::string reference_id = "1";
    std::string target_id;
    Homography homography;  // reference -> target
    std::filesystem::path reference_image;
    std::filesystem::path target_image;
};

struct DatasetScan {
    std::vector<SequencePair> pairs;  // sorted by (sequence, pair_index)
    std::vector<std::string> warnings;
};

inline constexpr std::size_t kMaxTargetIndex = 6;

/// Reads nine whitespace-separated numbers, row-major.
Homography read_homography_file(const std::filesystem::path& path);

/// Scans an HPatches-style root: one folder per sequence holding images 1..6
/// and "H_1_k" files. Malformed folders are skipped and reported in warnings.
DatasetScan load_sequences(const std::filesystem::path& root);

/// <features_dir>/<sequence>/<image_id>.feat
std::filesystem::path feature_path(const std::filesystem::path& features_dir, const std::string& sequence,
                                   const std::string& image_id);

inline constexpr const char* kFeatureExtension = ".feat";

}  // namespace gess::eval
