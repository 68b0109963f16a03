#include "gess/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <random>
#include <sstream>

#include "gess/coupled_head.hpp"
#include "gess/depth_stability.hpp"
#include "gess/evalkit.hpp"
#include "gess/gtf.hpp"
#include "gess/numerics.hpp"
#include "gess/oracles.hpp"
#include "gess/sdak.hpp"
#include "gess/utcf.hpp"

namespace gess::selfcheck {

namespace {

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return std::uniform_int_distribution<std::size_t>(lo, hi)(rng);
}

Tensor random_tensor(Rng& rng, std::vector<std::size_t> dims, double lo = -1.0, double hi = 1.0) {
    Tensor t(std::move(dims));
    for (auto& v : t.data()) v = static_cast<float>(uniform(rng, lo, hi));
    return t;
}

CheckResult finish(std::string name, double max_error, double tolerance, std::string detail = {}) {
    CheckResult r{std::move(name), max_error, tolerance, max_error <= tolerance, {}};
    if (!r.passed) r.detail = std::move(detail);
    return r;
}

// Heatmaps quantized to a few levels so ties are common.
Tensor random_heatmap(Rng& rng, std::size_t h, std::size_t w) {
    Tensor t({h, w});
    for (auto& v : t.data()) v = static_cast<float>(pick(rng, 0, 8)) / 8.0f;
    return t;
}

sdak::DescriptorSet random_descriptors(Rng& rng, std::size_t n, std::size_t dim) {
    sdak::DescriptorSet s;
    s.dim = dim;
    for (std::size_t i = 0; i < n; ++i) {
        s.keypoints.push_back({static_cast<double>(i), 0.0, 1.0});
        std::vector<float> d(dim);
        double norm = 0.0;
        for (auto& v : d) {
            v = static_cast<float>(uniform(rng, -1.0, 1.0));
            norm += static_cast<double>(v) * v;
        }
        for (auto& v : d) v = static_cast<float>(v / std::sqrt(norm));
        s.descriptors.push_back(std::move(d));
    }
    return s;
}

std::array<double, 3> random_unit(Rng& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    for (;;) {
        std::array<double, 3> v{g(rng), g(rng), g(rng)};
        const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
        if (n > 1e-3) return {v[0] / n, v[1] / n, v[2] / n};
    }
}

struct CoupledFixture {
    coupled::VectorField v;
    coupled::NormalMap n_star;
    coupled::SemanticLabelMap labels{1, 1, {0}};
    coupled::SaliencyClassifierParams classifier;
};

// Magnitudes in [0.5, 2] keep every pixel inside the gradient's domain;
// |n . n*| <= 0.99 keeps arccos away from its singular endpoints.
CoupledFixture random_coupled(Rng& rng, std::size_t h, std::size_t w) {
    CoupledFixture f;
    f.v.field = Tensor64({3, h, w});
    f.n_star.normals = Tensor64({3, h, w});
    std::vector<int> labels(h * w);
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const auto dir = random_unit(rng);
            std::array<double, 3> target{};
            do {
                target = random_unit(rng);
            } while (std::fabs(dir[0] * target[0] + dir[1] * target[1] + dir[2] * target[2]) > 0.99);
            const double mag = uniform(rng, 0.5, 2.0);
            for (std::size_t c = 0; c < 3; ++c) {
                f.v.field.at(c, y, x) = mag * dir[c];
                f.n_star.normals.at(c, y, x) = target[c];
            }
            labels[y * w + x] = static_cast<int>(pick(rng, 0, coupled::kNumClasses - 1));
        }
    }
    f.labels = coupled::SemanticLabelMap(h, w, std::move(labels));
    for (std::size_t k = 0; k < coupled::kNumClasses; ++k) {
        f.classifier.weights[k] = uniform(rng, -2.0, 2.0);
        f.classifier.biases[k] = uniform(rng, -1.0, 1.0);
    }
    return f;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    return a.dims() == b.dims() && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

CheckResult conv_oracle(std::size_t cases, std::uint64_t seed, bool inject_fault) {
    Rng rng(seed);
    double worst = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < cases; ++i) {
        const std::size_t k = 2 * pick(rng, 0, 2) + 1;
        const std::size_t c_in = pick(rng, 1, 4);
        const std::size_t c_out = pick(rng, 1, 4);
        ConvSpec spec;
        spec.kernel = random_tensor(rng, {c_out, c_in, k, k});
        spec.bias = random_tensor(rng, {c_out});
        spec.stride = pick(rng, 1, 2);
        spec.padding = pick(rng, 0, k / 2);
        // Extents chosen so every stride tiles the padded input exactly.
        const std::size_t h = (pick(rng, 1, 8) - 1) * spec.stride + k - 2 * spec.padding;
        const std::size_t w = (pick(rng, 1, 8) - 1) * spec.stride + k - 2 * spec.padding;
        const Tensor input = random_tensor(rng, {c_in, h, w});
        const Tensor expected = oracle::conv2d(input, spec);
        if (inject_fault && i == 0) spec.kernel[0] = -spec.kernel[0] + 1.0f;
        const Tensor got = gess::conv2d(input, spec);
        if (got.dims() != expected.dims()) {
            return finish("conv2d vs oracle", INFINITY, 1e-5, "case " + std::to_string(i) + ": shape mismatch");
        }
        for (std::size_t j = 0; j < got.size(); ++j) {
            const double e = std::fabs(static_cast<double>(got[j]) - expected[j]);
            if (e > worst) {
                worst = e;
                detail = "case " + std::to_string(i) + " element " + std::to_string(j);
            }
        }
    }
    return finish("conv2d vs oracle", worst, 1e-5, detail);
}

CheckResult bilinear_oracle(std::size_t cases, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t i = 0; i < cases; ++i) {
        const Tensor input = random_tensor(rng, {pick(rng, 1, 3), pick(rng, 1, 9), pick(rng, 1, 9)});
        const std::size_t oh = pick(rng, 1, 13);
        const std::size_t ow = pick(rng, 1, 13);
        const Tensor got = gess::bilinear_resample(input, oh, ow);
        const Tensor expected = oracle::bilinear_resample(input, oh, ow);
        for (std::size_t j = 0; j < got.size(); ++j) {
            worst = std::max(worst, std::fabs(static_cast<double>(got[j]) - expected[j]));
        }
    }
    return finish("bilinear_resample vs oracle", worst, 1e-5, "align-corners sample mismatch");
}

CheckResult nms_oracle(std::size_t maps, std::uint64_t seed) {
    Rng rng(seed);
    double mismatches = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < maps; ++i) {
        const Tensor heat = random_heatmap(rng, pick(rng, 1, 24), pick(rng, 1, 24));
        const std::size_t r = pick(rng, 1, 4);
        const Tensor got = sdak::nms(heat, r);
        const Tensor expected = oracle::nms(heat, r);
        for (std::size_t j = 0; j < got.size(); ++j) {
            if ((got[j] != 0.0f) != (expected[j] != 0.0f) || got[j] != expected[j]) {
                mismatches += 1.0;
                if (detail.empty()) detail = "map " + std::to_string(i) + " pixel " + std::to_string(j);
            }
        }
    }
    return finish("nms vs oracle (mismatching pixels)", mismatches, 0.0, detail);
}

CheckResult keypoint_oracle(std::size_t maps, std::uint64_t seed) {
    Rng rng(seed);
    double mismatches = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < maps; ++i) {
        const Tensor heat = random_heatmap(rng, pick(rng, 4, 32), pick(rng, 4, 32));
        sdak::SdakParams p;
        p.nms_radius = pick(rng, 1, 3);
        p.top_k = pick(rng, 1, 40);
        p.border_margin = pick(rng, 0, 3);
        p.score_threshold = 0.25;
        if (sdak::extract_keypoints(heat, p) != oracle::extract_keypoints(heat, p)) {
            mismatches += 1.0;
            if (detail.empty()) detail = "map " + std::to_string(i);
        }
    }
    return finish("extract_keypoints vs oracle (mismatching maps)", mismatches, 0.0, detail);
}

CheckResult nn_oracle(std::size_t sets, std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    double mismatches = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < sets; ++i) {
        const auto a = random_descriptors(rng, n, n);
        const auto b = random_descriptors(rng, n, n);
        for (bool mutual : {true, false}) {
            const auto got = eval::nn_match(a, b, mutual);
            const auto expected = oracle::nn_match(a, b, mutual);
            bool same = got.size() == expected.size();
            for (std::size_t k = 0; same && k < got.size(); ++k) {
                same = got[k].index_a == expected[k].index_a && got[k].index_b == expected[k].index_b;
            }
            if (!same) {
                mismatches += 1.0;
                if (detail.empty()) detail = "set " + std::to_string(i) + (mutual ? " mutual" : " one-way");
            }
        }
    }
    return finish("nn_match vs oracle (mismatching sets)", mismatches, 0.0, detail);
}

CheckResult auc_oracle(std::size_t steps, std::uint64_t seed) {
    Rng rng(seed);
    double worst = 0.0;
    for (std::size_t trial = 0; trial < 5; ++trial) {
        std::vector<std::vector<double>> errors(pick(rng, 1, 4));
        for (auto& pair : errors) {
            const std::size_t n = pick(rng, 0, 30);
            for (std::size_t k = 0; k < n; ++k) pair.push_back(uniform(rng, 0.0, 12.0));
        }
        for (double t : {1.0, 2.0, 5.0, 10.0}) {
            worst = std::max(worst, std::fabs(eval::auc(errors, t) - oracle::riemann_auc(errors, t, steps)));
        }
    }
    return finish("auc vs Riemann sum", worst, 1e-4);
}

CheckResult gradient_orthogonality(std::size_t pixels, std::uint64_t seed) {
    Rng rng(seed);
    const auto f = random_coupled(rng, 1, pixels);
    const auto g = coupled::coupled_gradient(f.v, f.classifier, f.labels, f.n_star);
    // Normalized violation |r.t| / (|r||t| + 1e-12) against 1e-6.
    double worst = 0.0;
    for (std::size_t x = 0; x < pixels; ++x) {
        double dot = 0.0, rr = 0.0, tt = 0.0;
        for (std::size_t c = 0; c < 3; ++c) {
            const double r = g.radial.at(c, 0, x);
            const double t = g.tangential.at(c, 0, x);
            dot += r * t;
            rr += r * r;
            tt += t * t;
        }
        worst = std::max(worst, std::fabs(dot) / (std::sqrt(rr) * std::sqrt(tt) + 1e-12));
    }
    return finish("radial/tangential orthogonality", worst, 1e-6);
}

CheckResult gradient_finite_difference(std::size_t fields, std::uint64_t seed) {
    Rng rng(seed);
    // The three-point stencil's O(h^2) truncation alone reaches ~2e-5 relative
    // near |n.n*| = 0.99 at h = 1e-4; the five-point stencil keeps the
    // reference well below the tolerance. Elements whose derivative is near
    // zero are compared against kScaleFloor instead of their own magnitude.
    constexpr double kScaleFloor = 1e-6;
    double worst = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < fields; ++i) {
        const auto f = random_coupled(rng, 3, 3);
        const auto analytic = coupled::coupled_gradient(f.v, f.classifier, f.labels, f.n_star).grad;
        const auto numeric = finite_diff_gradient(
            [&](const Tensor64& x) {
                return coupled::coupled_loss(coupled::VectorField{x}, f.classifier, f.labels, f.n_star).total;
            },
            f.v.field, 1e-4, FdStencil::central5);
        for (std::size_t j = 0; j < analytic.size(); ++j) {
            const double scale = std::max({std::fabs(analytic[j]), std::fabs(numeric[j]), kScaleFloor});
            const double e = std::fabs(analytic[j] - numeric[j]) / scale;
            if (e > worst) {
                worst = e;
                detail = "field " + std::to_string(i) + " element " + std::to_string(j);
            }
        }
    }
    return finish("coupled gradient vs finite differences (relative)", worst, 1e-5, detail);
}

CheckResult stability_reference_values(std::size_t random_inputs, std::uint64_t seed) {
    const stability::StabilityConstants k;
    // 0.2 + 0.8 exp(-0.9) evaluated independently of stability_value.
    const double reference = 0.2 + 0.8 * std::exp(-0.9);
    std::string detail;
    if (stability::stability_value(0.0, 0.0, k) != 1.0) detail = "s*(0,0) is not exactly 1";
    double worst = std::fabs(stability::stability_value(0.1, 0.1, k) - reference);
    Rng rng(seed);
    Tensor delta({1, random_inputs});
    Tensor lap({1, random_inputs});
    for (auto& v : delta.data()) v = static_cast<float>(uniform(rng, 0.0, 1.0));
    for (auto& v : lap.data()) v = static_cast<float>(uniform(rng, 0.0, 1.0));
    const Tensor s = stability::stability_target(delta, lap, k);
    for (float v : s.values()) {
        if (!(v > 0.2f && v <= 1.0f)) detail = "value " + std::to_string(v) + " outside (0.2, 1]";
    }
    if (!detail.empty()) worst = INFINITY;
    return finish("stability target reference values", worst, 1e-6, detail);
}

CheckResult seg_loss_reference_values() {
    const std::size_t n = 6;
    Tensor64 uniform_probs({coupled::kNumClasses, 1, n}, 0.25);
    std::vector<int> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[i] = static_cast<int>(i % coupled::kNumClasses);
    const coupled::SemanticLabelMap map(1, n, labels);
    const double uniform_err = std::fabs(coupled::seg_loss(uniform_probs, map) - std::log(4.0));
    Tensor64 perfect({coupled::kNumClasses, 1, n}, 0.0);
    for (std::size_t i = 0; i < n; ++i) perfect.at(static_cast<std::size_t>(labels[i]), 0, i) = 1.0;
    const double perfect_err = std::fabs(coupled::seg_loss(perfect, map));
    return finish("seg_loss reference values", std::max(uniform_err, perfect_err), 1e-6);
}

CheckResult utcf_limits(std::uint64_t seed) {
    Rng rng(seed);
    const std::size_t c = 8, h = 5, w = 6;
    const Tensor texture = random_tensor(rng, {c, h, w});
    const Tensor normal = random_tensor(rng, {c, h, w});
    std::string detail;
    if (!bit_equal(utcf::gated_fuse(texture, normal, Tensor({h, w}, 0.0f)), texture)) detail = "g=0 differs from texture";
    if (!bit_equal(utcf::gated_fuse(texture, normal, Tensor({h, w}, 1.0f)), normal)) detail = "g=1 differs from normal";

    utcf::UtcfDims dims;
    dims.channels = c;
    dims.semantic_channels = 6;
    dims.gate_hidden = 8;
    auto params = utcf::UtcfParams::random(dims, seed);
    params.output_projection = ConvSpec::zeros(c, c, 1, 1);
    const Tensor semantic = random_tensor(rng, {dims.semantic_channels, h, w});
    const Tensor fused = random_tensor(rng, {c, h, w});
    const Tensor out = utcf::refine_and_output(fused, semantic, texture, Tensor({h, w}, 1.0f), params);
    if (!bit_equal(out, texture)) detail = "zero output projection does not return D_initial";
    return finish("utcf gate and residual limits (bit-exact)", detail.empty() ? 0.0 : 1.0, 0.0, detail);
}

CheckResult sdak_identity(std::uint64_t seed) {
    Rng rng(seed);
    std::string detail;
    for (std::size_t trial = 0; trial < 10 && detail.empty(); ++trial) {
        const std::size_t h = pick(rng, 8, 32), w = pick(rng, 8, 32);
        const Tensor heat = random_tensor(rng, {h, w}, 0.0, 1.0);
        const Tensor mask = random_tensor(rng, {h, w}, 0.0, 1.0);
        const Tensor rel = random_tensor(rng, {h, w}, 0.2, 1.0);
        sdak::SdakParams p;
        p.alpha = 0.0;
        p.beta = 0.0;
        if (!bit_equal(sdak::reweight(heat, mask, rel, p), heat)) detail = "alpha=beta=0 changed the heatmap";

        const Tensor const_mask({h, w}, static_cast<float>(uniform(rng, 0.0, 1.0)));
        const Tensor const_rel({h, w}, static_cast<float>(uniform(rng, 0.2, 1.0)));
        p.nms_radius = 2;
        p.border_margin = 2;
        auto coords = [](const std::vector<sdak::Keypoint>& kps) {
            std::vector<std::pair<double, double>> out;
            for (const auto& k : kps) out.emplace_back(k.x, k.y);
            std::sort(out.begin(), out.end());
            return out;
        };
        const auto base = coords(sdak::extract_keypoints(sdak::reweight(heat, const_mask, const_rel, p), p));
        p.alpha = 1.0;
        p.beta = 1.0;
        const auto boosted = coords(sdak::extract_keypoints(sdak::reweight(heat, const_mask, const_rel, p), p));
        if (base != boosted) detail = "constant masks changed the keypoint set in trial " + std::to_string(trial);
    }
    return finish("sdak identity and argmax preservation", detail.empty() ? 0.0 : 1.0, 0.0, detail);
}

CheckResult gtf_roundtrip(std::size_t tensors, std::uint64_t seed) {
    Rng rng(seed);
    double failures = 0.0;
    std::string detail;
    for (std::size_t i = 0; i < tensors; ++i) {
        std::vector<std::size_t> dims(pick(rng, 1, 4));
        for (auto& d : dims) d = pick(rng, 1, 7);
        Tensor t(dims);
        for (auto& v : t.data()) {
            // Raw bit patterns, excluding NaNs whose payload may not survive comparisons.
            std::uint32_t bits = static_cast<std::uint32_t>(rng());
            if ((bits & 0x7f800000u) == 0x7f800000u) bits &= 0xbfffffffu;
            std::memcpy(&v, &bits, sizeof v);
        }
        const Tensor back = gtf_decode(gtf_encode(t));
        if (!bit_equal(back, t)) {
            failures += 1.0;
            if (detail.empty()) detail = "tensor " + std::to_string(i) + " " + shape_string(dims);
        }
    }
    return finish("gtf round trip (failures)", failures, 0.0, detail);
}

CheckResult aux_loss_additivity(std::uint64_t seed) {
    Rng rng(seed);
    const auto f = random_coupled(rng, 4, 5);
    const Tensor pred = random_tensor(rng, {4, 5}, 0.2, 1.0);
    const Tensor delta = random_tensor(rng, {4, 5}, 0.0, 1.0);
    const Tensor lap = random_tensor(rng, {4, 5}, 0.0, 1.0);
    const stability::StabilityConstants k;
    const Tensor target = stability::stability_target(delta, lap, k);

    const auto coupled_part = coupled::coupled_loss(f.v, f.classifier, f.labels, f.n_star);
    const double composed = coupled_part.total + stability::stability_loss(pred, target);

    const auto parts = coupled::decompose(f.v);
    const double l_normal = coupled::normal_loss(parts.normals, f.n_star);
    const double l_seg = coupled::seg_loss(coupled::classify_saliency(parts.saliency, f.classifier), f.labels);
    const double l_sta = stability::stability_loss(pred, target);
    const double separate = l_seg + l_normal + l_sta;
    std::ostringstream detail;
    if (composed != separate) detail << "composed " << composed << " vs separate " << separate;
    return finish("aux loss additivity (bit-exact)", std::fabs(composed - separate), 0.0, detail.str());
}

std::vector<CheckResult> run_all(std::uint64_t seed, bool inject_fault) {
    const std::vector<std::pair<std::string, std::function<CheckResult()>>> checks = {
        {"conv2d vs oracle", [&] { return conv_oracle(200, seed + 1, inject_fault); }},
        {"bilinear_resample vs oracle", [&] { return bilinear_oracle(50, seed + 2); }},
        {"nms vs oracle", [&] { return nms_oracle(50, seed + 3); }},
        {"extract_keypoints vs oracle", [&] { return keypoint_oracle(50, seed + 4); }},
        {"nn_match vs oracle", [&] { return nn_oracle(20, 20, seed + 5); }},
        {"auc vs Riemann sum", [&] { return auc_oracle(100000, seed + 6); }},
        {"radial/tangential orthogonality", [&] { return gradient_orthogonality(100, seed + 7); }},
        {"coupled gradient vs finite differences", [&] { return gradient_finite_difference(20, seed + 8); }},
        {"stability target reference values", [&] { return stability_reference_values(1000, seed + 9); }},
        {"seg_loss reference values", [] { return seg_loss_reference_values(); }},
        {"utcf gate and residual limits", [&] { return utcf_limits(seed + 10); }},
        {"sdak identity and argmax preservation", [&] { return sdak_identity(seed + 11); }},
        {"gtf round trip", [&] { return gtf_roundtrip(50, seed + 12); }},
        {"aux loss additivity", [&] { return aux_loss_additivity(seed + 13); }},
    };
    std::vector<CheckResult> out;
    for (const auto& [name, check] : checks) {
        try {
            out.push_back(check());
        } catch (const std::exception& e) {
            out.push_back({name, INFINITY, 0.0, false, std::string("threw: ") + e.what()});
        }
    }
    return out;
}

}  // namespace gess::selfcheck
