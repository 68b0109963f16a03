#pragma once

// Brute-force reference implementations. They share no code path with the
// production kernels and exist only to check them.

#include <vector>

#include "gess/evalkit.hpp"
#include "gess/numerics.hpp"
#include "gess/sdak.hpp"

namespace gess::oracle {

/// Explicitly zero-padded copy, then the textbook quadruple loop.
Tensor conv2d(const Tensor& input, const ConvSpec& spec);

/// Tent-kernel sum over every source pixel at the align-corners coordinate.
Tensor bilinear_resample(const Tensor& input, std::size_t out_h, std::size_t out_w);

/// Each pixel survives iff it is the (value desc, row-major index asc) winner of its window.
Tensor nms(const Tensor& heatmap, std::size_t radius);

/// Select, sort, truncate on top of oracle::nms.
std::vector<sdak::Keypoint> extract_keypoints(const Tensor& heatmap, const sdak::SdakParams& p);

/// O(n^2) nearest-neighbour scan with an explicit reciprocity check.
eval::MatchSet nn_match(const sdak::DescriptorSet& a, const sdak::DescriptorSet& b, bool mutual);

/// Midpoint Riemann sum of the empirical CDF over [0, t], `steps` cells.
double riemann_auc(const std::vector<std::vector<double>>& errors_per_pair, double t, std::size_t steps);

}  // namespace gess::oracle
