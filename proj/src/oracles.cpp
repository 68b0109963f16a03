#include "gess/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>

namespace gess::oracle {

Tensor conv2d(const Tensor& input, const ConvSpec& spec) {
    const std::size_t c_in = input.dim(0);
    const std::size_t h = input.dim(1);
    const std::size_t w = input.dim(2);
    const std::size_t p = spec.padding;
    Tensor64 padded({c_in, h + 2 * p, w + 2 * p});
    for (std::size_t c = 0; c < c_in; ++c) {
        for (std::size_t y = 0; y < h; ++y) {
            for (std::size_t x = 0; x < w; ++x) padded.at(c, y + p, x + p) = input.at(c, y, x);
        }
    }
    const std::size_t kh = spec.kernel.dim(2);
    const std::size_t kw = spec.kernel.dim(3);
    const std::size_t out_h = (h + 2 * p - kh) / spec.stride + 1;
    const std::size_t out_w = (w + 2 * p - kw) / spec.stride + 1;
    const std::size_t c_out = spec.kernel.dim(0);
    Tensor out({c_out, out_h, out_w});
    for (std::size_t o = 0; o < c_out; ++o) {
        for (std::size_t y = 0; y < out_h; ++y) {
            for (std::size_t x = 0; x < out_w; ++x) {
                double acc = 0.0;
                for (std::size_t c = 0; c < c_in; ++c) {
                    for (std::size_t i = 0; i < kh; ++i) {
                        for (std::size_t j = 0; j < kw; ++j) {
                            acc += spec.kernel.at(o, c, i, j) *
                                   padded.at(c, y * spec.stride + i, x * spec.stride + j);
                        }
                    }
                }
                out.at(o, y, x) = static_cast<float>(acc + spec.bias[o]);
            }
        }
    }
    return out;
}

Tensor bilinear_resample(const Tensor& input, std::size_t out_h, std::size_t out_w) {
    const std::size_t c = input.dim(0);
    const std::size_t h = input.dim(1);
    const std::size_t w = input.dim(2);
    auto coord = [](std::size_t i, std::size_t in, std::size_t out) {
        return out > 1 ? static_cast<double>(i) * static_cast<double>(in - 1) / static_cast<double>(out - 1)
                       : static_cast<double>(in - 1) / 2.0;
    };
    Tensor out({c, out_h, out_w});
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t y = 0; y < out_h; ++y) {
            for (std::size_t x = 0; x < out_w; ++x) {
                const double sy = coord(y, h, out_h);
                const double sx = coord(x, w, out_w);
                double acc = 0.0;
                for (std::size_t i = 0; i < h; ++i) {
                    const double wy = std::max(0.0, 1.0 - std::fabs(sy - static_cast<double>(i)));
                    for (std::size_t j = 0; j < w; ++j) {
                        const double wx = std::max(0.0, 1.0 - std::fabs(sx - static_cast<double>(j)));
                        acc += wy * wx * input.at(ch, i, j);
                    }
                }
                out.at(ch, y, x) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Tensor nms(const Tensor& heatmap, std::size_t radius) {
    const auto h = static_cast<long>(heatmap.dim(0));
    const auto w = static_cast<long>(heatmap.dim(1));
    const auto r = static_cast<long>(radius);
    Tensor out(heatmap.dims());
    for (long y = 0; y < h; ++y) {
        for (long x = 0; x < w; ++x) {
            // Winner key: highest value, then smallest row-major index.
            std::tuple<float, long> best{-INFINITY, 0};
            long best_index = -1;
            for (long yy = y - r; yy <= y + r; ++yy) {
                for (long xx = x - r; xx <= x + r; ++xx) {
                    if (yy < 0 || yy >= h || xx < 0 || xx >= w) continue;
                    const long idx = yy * w + xx;
                    const std::tuple<float, long> key{heatmap[static_cast<std::size_t>(idx)], -idx};
                    if (best_index < 0 || key > best) {
                        best = key;
                        best_index = idx;
                    }
                }
            }
            const long self = y * w + x;
            if (best_index == self) out[static_cast<std::size_t>(self)] = heatmap[static_cast<std::size_t>(self)];
        }
    }
    return out;
}

std::vector<sdak::Keypoint> extract_keypoints(const Tensor& heatmap, const sdak::SdakParams& p) {
    const Tensor kept = oracle::nms(heatmap, p.nms_radius);
    const std::size_t h = heatmap.dim(0);
    const std::size_t w = heatmap.dim(1);
    std::vector<std::tuple<double, double, double>> rows;  // (-score, y, x)
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const bool inside = y >= p.border_margin && x >= p.border_margin && y + p.border_margin < h &&
                                x + p.border_margin < w;
            const double s = kept.at(y, x);
            if (inside && s > p.score_threshold) {
                rows.emplace_back(-s, static_cast<double>(y), static_cast<double>(x));
            }
        }
    }
    std::sort(rows.begin(), rows.end());
    if (rows.size() > p.top_k) rows.resize(p.top_k);
    std::vector<sdak::Keypoint> out;
    for (const auto& [neg, y, x] : rows) out.push_back({x, y, -neg});
    return out;
}

eval::MatchSet nn_match(const sdak::DescriptorSet& a, const sdak::DescriptorSet& b, bool mutual) {
    auto dist = [&](std::size_t i, std::size_t j) {
        double acc = 0.0;
        for (std::size_t k = 0; k < a.dim; ++k) {
            const double d = static_cast<double>(a.descriptors[i][k]) - b.descriptors[j][k];
            acc += d * d;
        }
        return acc;
    };
    auto nearest_in_b = [&](std::size_t i) {
        std::size_t best = 0;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (dist(i, j) < dist(i, best)) best = j;
        }
        return best;
    };
    auto nearest_in_a = [&](std::size_t j) {
        std::size_t best = 0;
        for (std::size_t i = 0; i < a.size(); ++i) {
            if (dist(i, j) < dist(best, j)) best = i;
        }
        return best;
    };
    eval::MatchSet out;
    if (a.size() == 0 || b.size() == 0) return out;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const std::size_t j = nearest_in_b(i);
        if (!mutual || nearest_in_a(j) == i) out.push_back({i, j, std::sqrt(dist(i, j))});
    }
    return out;
}

double riemann_auc(const std::vector<std::vector<double>>& errors_per_pair, double t, std::size_t steps) {
    std::vector<double> pooled;
    for (const auto& p : errors_per_pair) pooled.insert(pooled.end(), p.begin(), p.end());
    if (pooled.empty()) return 0.0;
    std::sort(pooled.begin(), pooled.end());
    const double dx = t / static_cast<double>(steps);
    double area = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
        const double e = (static_cast<double>(i) + 0.5) * dx;
        const auto below = std::upper_bound(pooled.begin(), pooled.end(), e) - pooled.begin();
        area += static_cast<double>(below) / static_cast<double>(pooled.size()) * dx;
    }
    return area / t;
}

}  // namespace gess::oracle
