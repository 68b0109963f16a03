#pragma once

#include "gess/sdak.hpp"

namespace gess::eval {

/// Hand-crafted detector/descriptor used to exercise the harness without a
/// learned model: Shi-Tomasi corner heatmap plus mean-subtracted intensity
/// patches.
struct ToyParams {
    std::size_t patch_radius = 3;
    /// Keypoints must exceed this fraction of the strongest response.
    double relative_threshold = 0.05;
    sdak::SdakParams detection;
};

/// Minimum eigenvalue of the 3x3-summed structure tensor (Sobel gradients), >= 0.
Tensor corner_response(const Tensor& luma);

/// [(2r+1)^2, H, W] zero-padded neighbourhood intensities minus their mean.
Tensor patch_descriptor_map(const Tensor& luma, std::size_t radius);

sdak::FeatureFile toy_features(const Tensor& luma, const ToyParams& params);

}  // namespace gess::eval
