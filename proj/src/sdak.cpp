#include "gess/sdak.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>

#include <json.hpp>

#include "gess/gtf.hpp"

namespace gess::sdak {

void SdakParams::validate() const {
    if (!(alpha >= 0.0) || !(beta >= 0.0)) throw std::invalid_argument("sdak: alpha and beta must be >= 0");
    if (nms_radius < 1) throw std::invalid_argument("sdak: nms radius must be >= 1");
    if (top_k < 1) throw std::invalid_argument("sdak: top_k must be >= 1");
    if (!(score_threshold >= 0.0)) throw std::invalid_argument("sdak: score threshold must be >= 0");
}

Tensor semantic_mask(const Tensor& semantic_map, const SdakParams& p) {
    require_rank(semantic_map, 3, "semantic_mask input");
    if (p.mask_conv.out_channels() != 1) {
        throw ShapeError("semantic_mask: mask conv must have one output channel");
    }
    const Tensor logits = conv2d(semantic_map, p.mask_conv);
    return activate(logits, Activation::sigmoid).reshaped({logits.dim(1), logits.dim(2)});
}

Tensor reweight(const Tensor& heatmap, const Tensor& mask, const Tensor& reliability, const SdakParams& p) {
    require_rank(heatmap, 2, "reweight heatmap");
    require_same_dims(mask.dims(), heatmap.dims(), "reweight mask");
    require_rank(reliability, 2, "reweight reliability");
    if (p.alpha == 0.0 && p.beta == 0.0) {
        return heatmap;
    }
    Tensor aligned = reliability;
    if (reliability.dims() != heatmap.dims()) {
        aligned = bilinear_resample(reliability.reshaped({1, reliability.dim(0), reliability.dim(1)}),
                                    heatmap.dim(0), heatmap.dim(1))
                      .reshaped(heatmap.dims());
    }
    Tensor out(heatmap.dims());
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double gain = 1.0 + p.alpha * mask[i] + p.beta * aligned[i];
        out[i] = static_cast<float>(heatmap[i] * gain);
    }
    return out;
}

Tensor nms(const Tensor& heatmap, std::size_t radius) {
    require_rank(heatmap, 2, "nms heatmap");
    if (radius < 1) throw std::invalid_argument("nms: radius must be >= 1");
    const auto h = static_cast<std::ptrdiff_t>(heatmap.dim(0));
    const auto w = static_cast<std::ptrdiff_t>(heatmap.dim(1));
    const auto r = static_cast<std::ptrdiff_t>(radius);
    Tensor out(heatmap.dims());
    for (std::ptrdiff_t y = 0; y < h; ++y) {
        for (std::ptrdiff_t x = 0; x < w; ++x) {
            const float v = heatmap[static_cast<std::size_t>(y * w + x)];
            bool keep = true;
            for (std::ptrdiff_t yy = std::max<std::ptrdiff_t>(0, y - r); keep && yy <= std::min(h - 1, y + r); ++yy) {
                for (std::ptrdiff_t xx = std::max<std::ptrdiff_t>(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
                    if (yy == y && xx == x) continue;
                    const float u = heatmap[static_cast<std::size_t>(yy * w + xx)];
                    const bool earlier = yy < y || (yy == y && xx < x);
                    if (u > v || (u == v && earlier)) {
                        keep = false;
                        break;
                    }
                }
            }
            if (keep) out[static_cast<std::size_t>(y * w + x)] = v;
        }
    }
    return out;
}

std::vector<Keypoint> extract_keypoints(const Tensor& heatmap, const SdakParams& p) {
    p.validate();
    const Tensor suppressed = nms(heatmap, p.nms_radius);
    const std::size_t h = heatmap.dim(0);
    const std::size_t w = heatmap.dim(1);
    std::vector<Keypoint> kps;
    const std::size_t m = p.border_margin;
    if (h <= 2 * m || w <= 2 * m) {
        return kps;
    }
    for (std::size_t y = m; y < h - m; ++y) {
        for (std::size_t x = m; x < w - m; ++x) {
            const float s = suppressed.at(y, x);
            if (s > p.score_threshold) {
                kps.push_back({static_cast<double>(x), static_cast<double>(y), static_cast<double>(s)});
            }
        }
    }
    std::sort(kps.begin(), kps.end(), [](const Keypoint& a, const Keypoint& b) {
        if (a.score != b.score) return a.score > b.score;
        if (a.y != b.y) return a.y < b.y;
        return a.x < b.x;
    });
    if (kps.size() > p.top_k) kps.resize(p.top_k);
    return kps;
}

DescriptorSet sample_descriptors(const Tensor& descriptors, const std::vector<Keypoint>& keypoints) {
    require_rank(descriptors, 3, "sample_descriptors map");
    const std::size_t c = descriptors.dim(0);
    const std::size_t h = descriptors.dim(1);
    const std::size_t w = descriptors.dim(2);
    DescriptorSet out;
    out.dim = c;
    out.keypoints = keypoints;
    out.descriptors.reserve(keypoints.size());
    for (const Keypoint& kp : keypoints) {
        if (!(kp.x >= 0.0 && kp.y >= 0.0 && kp.x <= static_cast<double>(w - 1) &&
              kp.y <= static_cast<double>(h - 1))) {
            throw std::out_of_range("sample_descriptors: keypoint (" + std::to_string(kp.x) + ", " +
                                    std::to_string(kp.y) + ") outside the map");
        }
        const auto x0 = static_cast<std::size_t>(std::floor(kp.x));
        const auto y0 = static_cast<std::size_t>(std::floor(kp.y));
        const std::size_t x1 = std::min(x0 + 1, w - 1);
        const std::size_t y1 = std::min(y0 + 1, h - 1);
        const double fx = kp.x - static_cast<double>(x0);
        const double fy = kp.y - static_cast<double>(y0);
        std::vector<double> v(c);
        double norm2 = 0.0;
        for (std::size_t ch = 0; ch < c; ++ch) {
            const double top = (1.0 - fx) * descriptors.at(ch, y0, x0) + fx * descriptors.at(ch, y0, x1);
            const double bottom = (1.0 - fx) * descriptors.at(ch, y1, x0) + fx * descriptors.at(ch, y1, x1);
            v[ch] = (1.0 - fy) * top + fy * bottom;
            norm2 += v[ch] * v[ch];
        }
        std::vector<float> d(c, 0.0f);
        if (norm2 > 0.0) {
            const double inv = 1.0 / std::sqrt(norm2);
            for (std::size_t ch = 0; ch < c; ++ch) d[ch] = static_cast<float>(v[ch] * inv);
        } else {
            d[0] = 1.0f;
        }
        out.descriptors.push_back(std::move(d));
    }
    return out;
}

std::vector<std::uint8_t> encode_features(const FeatureFile& f) {
    const DescriptorSet& set = f.features;
    if (set.descriptors.size() != set.keypoints.size()) {
        throw std::invalid_argument("features: keypoint and descriptor counts differ");
    }
    const nlohmann::json header = {{"count", set.size()},
                                   {"descriptorDim", set.dim},
                                   {"imageHeight", f.image_height},
                                   {"imageWidth", f.image_width}};
    const std::string line = header.dump() + "\n";
    std::vector<std::uint8_t> out(line.begin(), line.end());
    if (set.size() == 0) {
        return out;
    }
    const std::size_t cols = 3 + set.dim;
    Tensor rows({set.size(), cols});
    for (std::size_t i = 0; i < set.size(); ++i) {
        if (set.descriptors[i].size() != set.dim) {
            throw std::invalid_argument("features: descriptor " + std::to_string(i) + " has wrong length");
        }
        rows.at(i, 0) = static_cast<float>(set.keypoints[i].x);
        rows.at(i, 1) = static_cast<float>(set.keypoints[i].y);
        rows.at(i, 2) = static_cast<float>(set.keypoints[i].score);
        std::copy(set.descriptors[i].begin(), set.descriptors[i].end(), &rows.at(i, 3));
    }
    const auto payload = gtf_encode(rows);
    out.insert(out.end(), payload.begin(), payload.end());
    return out;
}

FeatureFile decode_features(std::span<const std::uint8_t> bytes) {
    const auto newline = std::find(bytes.begin(), bytes.end(), std::uint8_t{'\n'});
    if (newline == bytes.end()) {
        throw std::runtime_error("features: missing header line");
    }
    const auto header = nlohmann::json::parse(bytes.begin(), newline);
    FeatureFile f;
    const auto count = header.at("count").get<std::size_t>();
    f.features.dim = header.at("descriptorDim").get<std::size_t>();
    f.image_height = header.at("imageHeight").get<std::size_t>();
    f.image_width = header.at("imageWidth").get<std::size_t>();
    const auto rest = bytes.subspan(static_cast<std::size_t>(newline - bytes.begin()) + 1);
    if (count == 0) {
        if (!rest.empty()) throw std::runtime_error("features: payload present for zero keypoints");
        return f;
    }
    const Tensor rows = gtf_decode(rest);
    if (rows.rank() != 2 || rows.dim(0) != count || rows.dim(1) != 3 + f.features.dim) {
        throw std::runtime_error("features: payload shape " + shape_string(rows.dims()) +
                                 " disagrees with header");
    }
    for (std::size_t i = 0; i < count; ++i) {
        f.features.keypoints.push_back({rows.at(i, 0), rows.at(i, 1), rows.at(i, 2)});
        const float* d = &rows.at(i, 3);
        f.features.descriptors.emplace_back(d, d + f.features.dim);
    }
    return f;
}

void write_features(const FeatureFile& f, const std::filesystem::path& path) {
    const auto bytes = encode_features(f);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
}

FeatureFile read_features(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return decode_features(bytes);
}

}  // namespace gess::sdak
