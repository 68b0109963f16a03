#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gess/sdak.hpp"

namespace gess::eval {

inline constexpr std::size_t kNumThresholds = 10;  // MMA at 1..10 px

class ProjectionError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Planar projective transform, row-major, normalized so h[2][2] = 1 when possible.
class Homography {
public:
    Homography() : Homography(identity_values()) {}
    explicit Homography(const std::array<double, 9>& values);

    static Homography identity() { return Homography(); }
    static Homography translation(double tx, double ty);

    [[nodiscard]] const std::array<double, 9>& values() const noexcept { return h_; }
    [[nodiscard]] double operator()(std::size_t r, std::size_t c) const { return h_[3 * r + c]; }
    [[nodiscard]] double determinant() const;
    [[nodiscard]] Homography inverse() const;
    /// Throws ProjectionError when the point maps to infinity.
    [[nodiscard]] std::pair<double, double> project(double x, double y) const;

private:
    static std::array<double, 9> identity_values() { return {1, 0, 0, 0, 1, 0, 0, 0, 1}; }
    std::array<double, 9> h_;
};

struct Match {
    std::size_t index_a = 0;
    std::size_t index_b = 0;
    double distance = 0.0;

    friend bool operator==(const Match&, const Match&) = default;
};

using MatchSet = std::vector<Match>;

/// Nearest neighbour by Euclidean distance (ties to the lowest index). In mutual
/// mode a pair survives only when each side is the other's nearest.
MatchSet nn_match(const sdak::DescriptorSet& a, const sdak::DescriptorSet& b, bool mutual);

/// Reprojection error |H(kpA) - kpB| per match, in input order.
std::vector<double> match_errors(const MatchSet& matches, const std::vector<sdak::Keypoint>& kps_a,
                                 const std::vector<sdak::Keypoint>& kps_b, const Homography& h);

/// Fraction of errors <= t for t = 1..10; all zeros for an empty list.
std::array<double, kNumThresholds> mma(const std::vector<double>& errors);

/// Normalized integral over [0,t] of the empirical CDF of the pooled errors.
double auc(const std::vector<std::vector<double>>& errors_per_pair, double t);

}  // namespace gess::eval
