#include "gess/coupled_head.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "gess/numerics.hpp"

namespace gess::coupled {

namespace {

void require_field(const Tensor64& t, std::string_view what) {
    if (t.rank() != 3 || t.dim(0) != 3) {
        throw ShapeError(std::string(what) + ": expected [3,H,W], got " + shape_string(t.dims()));
    }
}

void require_plane(const std::vector<std::size_t>& field_dims, std::size_t h, std::size_t w,
                   std::string_view what) {
    require_same_dims({field_dims[1], field_dims[2]}, {h, w}, what);
}

std::array<double, kNumClasses> softmax(const SaliencyClassifierParams& p, double s) {
    std::array<double, kNumClasses> logits{};
    double peak = -std::numeric_limits<double>::infinity();
    for (std::size_t m = 0; m < kNumClasses; ++m) {
        logits[m] = p.weights[m] * s + p.biases[m];
        peak = std::max(peak, logits[m]);
    }
    double sum = 0.0;
    for (double& l : logits) {
        l = std::exp(l - peak);
        sum += l;
    }
    for (double& l : logits) l /= sum;
    return logits;
}

}  // namespace

SemanticLabelMap::SemanticLabelMap(std::size_t height, std::size_t width, std::vector<int> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
    if (height_ == 0 || width_ == 0 || labels_.size() != height_ * width_) {
        throw ShapeError("SemanticLabelMap: label count does not match " + std::to_string(height_) +
                         "x" + std::to_string(width_));
    }
    for (std::size_t i = 0; i < labels_.size(); ++i) {
        if (labels_[i] < 0 || labels_[i] >= static_cast<int>(kNumClasses)) {
            throw std::invalid_argument("SemanticLabelMap: label " + std::to_string(labels_[i]) +
                                        " at index " + std::to_string(i) + " outside 0..3");
        }
    }
}

SemanticLabelMap SemanticLabelMap::from_tensor(const Tensor& t) {
    require_rank(t, 2, "semantic labels");
    std::vector<int> labels(t.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        const float v = t[i];
        if (v != std::round(v)) {
            throw std::invalid_argument("semantic labels: non-integer value at index " + std::to_string(i));
        }
        labels[i] = static_cast<int>(v);
    }
    return {t.dim(0), t.dim(1), std::move(labels)};
}

void SemanticWeightTable::validate() const {
    for (double w : weights) {
        if (!(w >= 0.0 && w <= 1.0)) {
            throw std::invalid_argument("semantic weight " + std::to_string(w) + " outside [0,1]");
        }
    }
}

Decomposition decompose(const VectorField& v) {
    require_field(v.field, "decompose");
    const std::size_t h = v.field.dim(1);
    const std::size_t w = v.field.dim(2);
    Tensor64 normals({3, h, w});
    Tensor64 magnitude({h, w});
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const double a = v.field.at(0, y, x);
            const double b = v.field.at(1, y, x);
            const double c = v.field.at(2, y, x);
            const double s = std::sqrt(a * a + b * b + c * c);
            const double denom = std::max(s, kNormClamp);
            magnitude.at(y, x) = s;
            normals.at(0, y, x) = a / denom;
            normals.at(1, y, x) = b / denom;
            normals.at(2, y, x) = c / denom;
        }
    }
    return {NormalMap{std::move(normals)}, SaliencyMap{std::move(magnitude)}};
}

Tensor64 classify_saliency(const SaliencyMap& s, const SaliencyClassifierParams& params) {
    if (s.magnitude.rank() != 2) {
        throw ShapeError("classify_saliency: expected [H,W], got " + shape_string(s.magnitude.dims()));
    }
    const std::size_t h = s.magnitude.dim(0);
    const std::size_t w = s.magnitude.dim(1);
    Tensor64 probs({kNumClasses, h, w});
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            const auto p = softmax(params, s.magnitude.at(y, x));
            for (std::size_t m = 0; m < kNumClasses; ++m) probs.at(m, y, x) = p[m];
        }
    }
    return probs;
}

double normal_loss(const NormalMap& n, const NormalMap& n_star) {
    require_field(n.normals, "normal_loss prediction");
    require_same_dims(n.normals.dims(), n_star.normals.dims(), "normal_loss");
    const std::size_t plane = n.normals.dim(1) * n.normals.dim(2);
    double sum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
        double dot = 0.0;
        for (std::size_t k = 0; k < 3; ++k) dot += n.normals[k * plane + i] * n_star.normals[k * plane + i];
        sum += std::acos(std::clamp(dot, -1.0, 1.0));
    }
    return sum / static_cast<double>(plane);
}

double seg_loss(const Tensor64& probs, const SemanticLabelMap& labels) {
    if (probs.rank() != 3 || probs.dim(0) != kNumClasses) {
        throw ShapeError("seg_loss: expected [4,H,W] probabilities, got " + shape_string(probs.dims()));
    }
    require_same_dims({probs.dim(1), probs.dim(2)}, {labels.height(), labels.width()}, "seg_loss");
    const std::size_t plane = labels.size();
    double sum = 0.0;
    for (std::size_t i = 0; i < plane; ++i) {
        const double p = probs[static_cast<std::size_t>(labels[i]) * plane + i];
        sum -= std::log(std::max(p, kLogFloor));
    }
    return sum / static_cast<double>(plane);
}

VectorField fuse_labels(const NormalMap& n_star, const SemanticLabelMap& labels,
                        const SemanticWeightTable& table) {
    require_field(n_star.normals, "fuse_labels");
    require_plane(n_star.normals.dims(), labels.height(), labels.width(), "fuse_labels");
    table.validate();
    Tensor64 field(n_star.normals.dims());
    const std::size_t plane = labels.size();
    for (std::size_t i = 0; i < plane; ++i) {
        const double weight = table.weights[static_cast<std::size_t>(labels[i])];
        for (std::size_t k = 0; k < 3; ++k) field[k * plane + i] = weight * n_star.normals[k * plane + i];
    }
    return VectorField{std::move(field)};
}

CoupledLoss coupled_loss(const VectorField& v, const SaliencyClassifierParams& params,
                         const SemanticLabelMap& labels, const NormalMap& n_star) {
    require_field(v.field, "coupled_loss");
    require_same_dims(v.field.dims(), n_star.normals.dims(), "coupled_loss normals");
    require_plane(v.field.dims(), labels.height(), labels.width(), "coupled_loss labels");
    const auto parts = decompose(v);
    CoupledLoss out;
    out.seg = seg_loss(classify_saliency(parts.saliency, params), labels);
    out.normal = normal_loss(parts.normals, n_star);
    out.total = out.seg + out.normal;
    return out;
}

CoupledGradient coupled_gradient(const VectorField& v, const SaliencyClassifierParams& params,
                                 const SemanticLabelMap& labels, const NormalMap& n_star) {
    require_field(v.field, "coupled_gradient");
    require_same_dims(v.field.dims(), n_star.normals.dims(), "coupled_gradient normals");
    require_plane(v.field.dims(), labels.height(), labels.width(), "coupled_gradient labels");
    const std::size_t h = v.field.dim(1);
    const std::size_t w = v.field.dim(2);
    const std::size_t plane = h * w;

    std::vector<std::array<std::size_t, 2>> degenerate;
    for (std::size_t i = 0; i < plane; ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < 3; ++k) sq += v.field[k * plane + i] * v.field[k * plane + i];
        if (std::sqrt(sq) <= kMinGradientMagnitude) degenerate.push_back({i / w, i % w});
    }
    if (!degenerate.empty()) {
        std::string msg = "coupled_gradient: magnitude <= 1e-6 at (y,x):";
        for (const auto& p : degenerate) {
            msg += " (" + std::to_string(p[0]) + "," + std::to_string(p[1]) + ")";
        }
        throw GradientDomainError(msg, std::move(degenerate));
    }

    const double inv_count = 1.0 / static_cast<double>(plane);
    CoupledGradient out{Tensor64({3, h, w}), Tensor64({3, h, w}), Tensor64({3, h, w})};
    for (std::size_t i = 0; i < plane; ++i) {
        std::array<double, 3> vec{};
        for (std::size_t k = 0; k < 3; ++k) vec[k] = v.field[k * plane + i];
        const double s = std::sqrt(vec[0] * vec[0] + vec[1] * vec[1] + vec[2] * vec[2]);
        std::array<double, 3> n{vec[0] / s, vec[1] / s, vec[2] / s};
        std::array<double, 3> target{};
        for (std::size_t k = 0; k < 3; ++k) target[k] = n_star.normals[k * plane + i];

        // Radial scalar: d(-log p_y)/ds through the softmax classifier.
        const auto label = static_cast<std::size_t>(labels[i]);
        const auto p = softmax(params, s);
        double dseg_ds = 0.0;
        if (p[label] >= kLogFloor) {
            for (std::size_t m = 0; m < kNumClasses; ++m) dseg_ds += p[m] * params.weights[m];
            dseg_ds -= params.weights[label];
        }
        dseg_ds *= inv_count;

        // dL_normal/dn = -n* / sqrt(1 - d^2), with d kept away from +-1.
        double dot = n[0] * target[0] + n[1] * target[1] + n[2] * target[2];
        dot = std::clamp(dot, -1.0 + kArccosGradClamp, 1.0 - kArccosGradClamp);
        const double dacos = -inv_count / std::sqrt(1.0 - dot * dot);
        std::array<double, 3> dn{dacos * target[0], dacos * target[1], dacos * target[2]};
        const double along = n[0] * dn[0] + n[1] * dn[1] + n[2] * dn[2];

        for (std::size_t k = 0; k < 3; ++k) {
            const double radial = dseg_ds * n[k];
            const double tangential = (dn[k] - along * n[k]) / s;
            out.radial[k * plane + i] = radial;
            out.tangential[k * plane + i] = tangential;
            out.grad[k * plane + i] = radial + tangential;
        }
    }
    return out;
}

}  // namespace gess::coupled
