#include "gess/toy_features.hpp"

#include <algorithm>
#include <cmath>

namespace gess::eval {

namespace {

Tensor filter3(const Tensor& plane, std::initializer_list<float> taps) {
    ConvSpec spec = ConvSpec::zeros(1, 1, 3, 3);
    std::copy(taps.begin(), taps.end(), spec.kernel.data().begin());
    return conv2d(plane.reshaped({1, plane.dim(0), plane.dim(1)}), spec).reshaped(plane.dims());
}

}  // namespace

Tensor corner_response(const Tensor& luma) {
    require_rank(luma, 2, "corner_response");
    const Tensor gx = filter3(luma, {-1, 0, 1, -2, 0, 2, -1, 0, 1});
    const Tensor gy = filter3(luma, {-1, -2, -1, 0, 0, 0, 1, 2, 1});
    Tensor xx(luma.dims());
    Tensor xy(luma.dims());
    Tensor yy(luma.dims());
    for (std::size_t i = 0; i < luma.size(); ++i) {
        xx[i] = gx[i] * gx[i];
        xy[i] = gx[i] * gy[i];
        yy[i] = gy[i] * gy[i];
    }
    const std::initializer_list<float> box{1, 1, 1, 1, 1, 1, 1, 1, 1};
    const Tensor a = filter3(xx, box);
    const Tensor b = filter3(xy, box);
    const Tensor c = filter3(yy, box);
    Tensor out(luma.dims());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double half_trace = 0.5 * (static_cast<double>(a[i]) + c[i]);
        const double half_diff = 0.5 * (static_cast<double>(a[i]) - c[i]);
        const double lambda_min = half_trace - std::sqrt(half_diff * half_diff + static_cast<double>(b[i]) * b[i]);
        out[i] = static_cast<float>(std::max(lambda_min, 0.0));
    }
    return out;
}

Tensor patch_descriptor_map(const Tensor& luma, std::size_t radius) {
    require_rank(luma, 2, "patch_descriptor_map");
    const auto h = static_cast<std::ptrdiff_t>(luma.dim(0));
    const auto w = static_cast<std::ptrdiff_t>(luma.dim(1));
    const auto r = static_cast<std::ptrdiff_t>(radius);
    const std::size_t side = 2 * radius + 1;
    const std::size_t channels = side * side;
    Tensor out({channels, luma.dim(0), luma.dim(1)});
    std::vector<double> patch(channels);
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            double mean = 0.0;
            std::size_t k = 0;
            for (std::ptrdiff_t dy = -r; dy <= r; ++dy) {
                for (std::ptrdiff_t dx = -r; dx <= r; ++dx, ++k) {
                    const std::ptrdiff_t sy = y + dy;
                    const std::ptrdiff_t sx = x + dx;
                    const bool inside = sy >= 0 && sy < h && sx >= 0 && sx < w;
                    patch[k] = inside ? luma[static_cast<std::size_t>(sy * w + sx)] : 0.0;
                    mean += patch[k];
                }
            }
            mean /= static_cast<double>(channels);
            for (std::size_t c = 0; c < channels; ++c) {
                out.at(c, static_cast<std::size_t>(y), static_cast<std::size_t>(x)) =
                    static_cast<float>(patch[c] - mean);
            }
        }
    }
    return out;
}

sdak::FeatureFile toy_features(const Tensor& luma, const ToyParams& params) {
    const Tensor heat = corner_response(luma);
    const float peak = *std::max_element(heat.data().begin(), heat.data().end());
    sdak::SdakParams detection = params.detection;
    detection.score_threshold = std::max(detection.score_threshold, params.relative_threshold * peak);
    const auto kps = sdak::extract_keypoints(heat, detection);
    sdak::FeatureFile out;
    out.features = sdak::sample_descriptors(patch_descriptor_map(luma, params.patch_radius), kps);
    out.image_height = luma.dim(0);
    out.image_width = luma.dim(1);
    return out;
}

}  // namespace gess::eval
