#pragma once

#include "gess/tensor.hpp"

namespace gess::stability {

/// Coefficients of the exponential decay s* = eps + (1-eps) exp(-gamma (a_d delta + a_l L)).
struct StabilityConstants {
    double alpha_delta = 2.0;
    double alpha_l = 1.0;
    double gamma = 3.0;
    double epsilon = 0.2;

    void validate() const;
};

inline constexpr std::size_t kGaussianSize = 5;
inline constexpr double kGaussianSigma = 1.0;

/// Normalized 5x5 Gaussian (sigma 1), [1,1,5,5].
Tensor gaussian_kernel();

/// Min-max rescale to [0,1] (constant maps become zeros), then 5x5 Gaussian
/// smoothing with zero-padded borders. Input and output are [H,W].
Tensor preprocess_depth(const Tensor& depth);

/// Sobel gradient magnitude, zero padding.
Tensor sobel_magnitude(const Tensor& depth);

/// |4-neighbour Laplacian|, zero padding.
Tensor laplacian_response(const Tensor& depth);

double stability_value(double delta, double lap, const StabilityConstants& k);
Tensor stability_target(const Tensor& delta, const Tensor& lap, const StabilityConstants& k);

/// Mean absolute difference.
double stability_loss(const Tensor& pred, const Tensor& target);

/// Full pipeline: preprocess, Sobel, Laplacian, decay.
Tensor depth_to_reliability(const Tensor& depth, const StabilityConstants& k);

}  // namespace gess::stability
