#pragma once

#include <filesystem>
#include <vector>

#include "gess/numerics.hpp"

namespace gess::sdak {

struct SdakParams {
    double alpha = 1.0;
    double beta = 1.0;
    ConvSpec mask_conv;  // 3x3, semantic channels -> 1
    std::size_t nms_radius = 4;
    std::size_t top_k = 10000;
    double score_threshold = 0.0;
    std::size_t border_margin = 4;

    void validate() const;
};

/// Sub-pixel location; (0,0) is the centre of the top-left pixel.
struct Keypoint {
    double x = 0.0;
    double y = 0.0;
    double score = 0.0;

    friend bool operator==(const Keypoint&, const Keypoint&) = default;
};

/// Keypoints paired with unit-norm descriptors of equal length.
struct DescriptorSet {
    std::vector<Keypoint> keypoints;
    std::vector<std::vector<float>> descriptors;
    std::size_t dim = 0;

    [[nodiscard]] std::size_t size() const noexcept { return keypoints.size(); }
};

/// sigmoid(conv3x3(S_map)) as [H,W].
Tensor semantic_mask(const Tensor& semantic_map, const SdakParams& p);

/// K_map * (1 + alpha S_mask + beta R_map). R_map is resampled to the heatmap
/// size when extents differ.
Tensor reweight(const Tensor& heatmap, const Tensor& mask, const Tensor& reliability, const SdakParams& p);

/// Keeps a score only where it wins its (2r+1)^2 window; among equal scores the
/// earliest row-major position wins.
Tensor nms(const Tensor& heatmap, std::size_t radius);

/// NMS, threshold, border margin, then (score desc, y asc, x asc) truncated to top_k.
std::vector<Keypoint> extract_keypoints(const Tensor& heatmap, const SdakParams& p);

/// Bilinear lookup in a [C,H,W] map, L2-normalized. Zero vectors become e_0.
DescriptorSet sample_descriptors(const Tensor& descriptors, const std::vector<Keypoint>& keypoints);

// Feature file: one line of JSON {"count","descriptorDim","imageHeight","imageWidth"},
// a newline, then (when count > 0) a GTF tensor [count, 3 + C] with rows
// (x, y, score, descriptor...).

struct FeatureFile {
    DescriptorSet features;
    std::size_t image_width = 0;
    std::size_t image_height = 0;
};

std::vector<std::uint8_t> encode_features(const FeatureFile& f);
FeatureFile decode_features(std::span<const std::uint8_t> bytes);
void write_features(const FeatureFile& f, const std::filesystem::path& path);
FeatureFile read_features(const std::filesystem::path& path);

}  // namespace gess::sdak
