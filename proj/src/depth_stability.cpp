#include "gess/depth_stability.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gess/numerics.hpp"

namespace gess::stability {

namespace {

Tensor apply_kernel(const Tensor& map, const std::vector<float>& taps, std::size_t size) {
    require_rank(map, 2, "depth map");
    ConvSpec spec = ConvSpec::zeros(1, 1, size, size);
    std::copy(taps.begin(), taps.end(), spec.kernel.data().begin());
    const Tensor out = conv2d(map.reshaped({1, map.dim(0), map.dim(1)}), spec);
    return out.reshaped({map.dim(0), map.dim(1)});
}

}  // namespace

void StabilityConstants::validate() const {
    if (!(gamma > 0.0)) throw std::invalid_argument("stability: gamma must be > 0");
    if (!(epsilon >= 0.0 && epsilon < 1.0)) throw std::invalid_argument("stability: epsilon must be in [0,1)");
    if (!(alpha_delta >= 0.0) || !(alpha_l >= 0.0)) {
        throw std::invalid_argument("stability: alphas must be >= 0");
    }
}

Tensor gaussian_kernel() {
    const int r = static_cast<int>(kGaussianSize / 2);
    std::vector<double> taps;
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        for (int j = -r; j <= r; ++j) {
            const double g = std::exp(-(i * i + j * j) / (2.0 * kGaussianSigma * kGaussianSigma));
            taps.push_back(g);
            sum += g;
        }
    }
    std::vector<float> normalized;
    for (double g : taps) normalized.push_back(static_cast<float>(g / sum));
    return Tensor({1, 1, kGaussianSize, kGaussianSize}, std::move(normalized));
}

Tensor preprocess_depth(const Tensor& depth) {
    require_rank(depth, 2, "preprocess_depth");
    const auto [lo, hi] = std::minmax_element(depth.data().begin(), depth.data().end());
    const double min = *lo;
    const double range = static_cast<double>(*hi) - min;
    Tensor scaled(depth.dims());
    if (range > 0.0) {
        for (std::size_t i = 0; i < depth.size(); ++i) {
            scaled[i] = static_cast<float>((depth[i] - min) / range);
        }
    }
    const Tensor kernel = gaussian_kernel();
    return apply_kernel(scaled, kernel.values(), kGaussianSize);
}

Tensor sobel_magnitude(const Tensor& depth) {
    const Tensor gx = apply_kernel(depth, {-1, 0, 1, -2, 0, 2, -1, 0, 1}, 3);
    const Tensor gy = apply_kernel(depth, {-1, -2, -1, 0, 0, 0, 1, 2, 1}, 3);
    Tensor out(depth.dims());
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = static_cast<float>(std::hypot(static_cast<double>(gx[i]), static_cast<double>(gy[i])));
    }
    return out;
}

Tensor laplacian_response(const Tensor& depth) {
    Tensor out = apply_kernel(depth, {0, 1, 0, 1, -4, 1, 0, 1, 0}, 3);
    for (float& v : out.data()) v = std::fabs(v);
    return out;
}

double stability_value(double delta, double lap, const StabilityConstants& k) {
    return k.epsilon + (1.0 - k.epsilon) * std::exp(-k.gamma * (k.alpha_delta * delta + k.alpha_l * lap));
}

Tensor stability_target(const Tensor& delta, const Tensor& lap, const StabilityConstants& k) {
    k.validate();
    require_same_dims(delta.dims(), lap.dims(), "stability_target");
    Tensor out(delta.dims());
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (delta[i] < 0.0f || lap[i] < 0.0f) {
            throw std::invalid_argument("stability_target: negative input at index " + std::to_string(i));
        }
        out[i] = static_cast<float>(stability_value(delta[i], lap[i], k));
    }
    return out;
}

double stability_loss(const Tensor& pred, const Tensor& target) {
    require_same_dims(pred.dims(), target.dims(), "stability_loss");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        sum += std::fabs(static_cast<double>(pred[i]) - static_cast<double>(target[i]));
    }
    return sum / static_cast<double>(pred.size());
}

Tensor depth_to_reliability(const Tensor& depth, const StabilityConstants& k) {
    if (!all_finite(depth)) {
        throw std::invalid_argument("depth_to_reliability: non-finite depth");
    }
    const Tensor smoothed = preprocess_depth(depth);
    return stability_target(sobel_magnitude(smoothed), laplacian_response(smoothed), k);
}

}  // namespace gess::stability
