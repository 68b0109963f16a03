#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "gess/tensor.hpp"

namespace gess::coupled {

inline constexpr std::size_t kNumClasses = 4;
/// Denominator clamp used when splitting a vector into direction and length.
inline constexpr double kNormClamp = 1e-8;
/// The gradient refuses pixels whose magnitude is at or below this.
inline constexpr double kMinGradientMagnitude = 1e-6;
inline constexpr double kLogFloor = 1e-12;
inline constexpr double kArccosGradClamp = 1e-6;

/// Predicted 3-channel field V, [3,H,W].
struct VectorField {
    Tensor64 field;
};

/// Unit direction per pixel, [3,H,W].
struct NormalMap {
    Tensor64 normals;
};

/// Vector magnitude per pixel, [H,W].
struct SaliencyMap {
    Tensor64 magnitude;
};

/// Per-pixel class index in {0,..,3}.
class SemanticLabelMap {
public:
    SemanticLabelMap(std::size_t height, std::size_t width, std::vector<int> labels);
    /// Accepts an integer-valued [H,W] tensor.
    static SemanticLabelMap from_tensor(const Tensor& t);

    [[nodiscard]] std::size_t height() const noexcept { return height_; }
    [[nodiscard]] std::size_t width() const noexcept { return width_; }
    [[nodiscard]] int at(std::size_t y, std::size_t x) const { return labels_[y * width_ + x]; }
    [[nodiscard]] int operator[](std::size_t i) const { return labels_[i]; }
    [[nodiscard]] std::size_t size() const noexcept { return labels_.size(); }

private:
    std::size_t height_;
    std::size_t width_;
    std::vector<int> labels_;
};

/// Per-pixel affine map from magnitude to four logits, followed by softmax.
struct SaliencyClassifierParams {
    std::array<double, kNumClasses> weights{};
    std::array<double, kNumClasses> biases{};
};

/// Reliability weight per class: stable, medium, low, dynamic.
struct SemanticWeightTable {
    std::array<double, kNumClasses> weights{1.0, 0.7, 0.4, 0.1};

    void validate() const;
};

struct Decomposition {
    NormalMap normals;
    SaliencyMap saliency;
};

struct CoupledLoss {
    double total = 0.0;
    double seg = 0.0;
    double normal = 0.0;
};

struct CoupledGradient {
    Tensor64 grad;
    Tensor64 radial;
    Tensor64 tangential;
};

Decomposition decompose(const VectorField& v);
/// [4,H,W] per-pixel class probabilities.
Tensor64 classify_saliency(const SaliencyMap& s, const SaliencyClassifierParams& params);
/// Mean angular deviation in radians.
double normal_loss(const NormalMap& n, const NormalMap& n_star);
/// Mean cross-entropy of the labelled class.
double seg_loss(const Tensor64& probs, const SemanticLabelMap& labels);
VectorField fuse_labels(const NormalMap& n_star, const SemanticLabelMap& labels,
                        const SemanticWeightTable& table);

CoupledLoss coupled_loss(const VectorField& v, const SaliencyClassifierParams& params,
                         const SemanticLabelMap& labels, const NormalMap& n_star);

/// Analytic dL_couple/dV split into a radial part along n (segmentation) and a
/// tangential part orthogonal to n (normals). Throws GradientDomainError when
/// any pixel magnitude is <= kMinGradientMagnitude.
CoupledGradient coupled_gradient(const VectorField& v, const SaliencyClassifierParams& params,
                                 const SemanticLabelMap& labels, const NormalMap& n_star);

class GradientDomainError : public std::domain_error {
public:
    GradientDomainError(const std::string& msg, std::vector<std::array<std::size_t, 2>> pixels)
        : std::domain_error(msg), pixels_(std::move(pixels)) {}
    /// Offending (y, x) coordinates.
    [[nodiscard]] const std::vector<std::array<std::size_t, 2>>& pixels() const noexcept {
        return pixels_;
    }

private:
    std::vector<std::array<std::size_t, 2>> pixels_;
};

}  // namespace gess::coupled
