#include "gess/evalkit.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gess::eval {

namespace {
constexpr double kSingularTolerance = 1e-12;
}

Homography::Homography(const std::array<double, 9>& values) : h_(values) {
    for (double v : h_) {
        if (!std::isfinite(v)) throw std::invalid_argument("homography: non-finite entry");
    }
    if (std::fabs(h_[8]) > kSingularTolerance) {
        const double s = h_[8];
        for (double& v : h_) v /= s;
    }
    if (std::fabs(determinant()) <= kSingularTolerance) {
        throw std::invalid_argument("homography: matrix is singular");
    }
}

Homography Homography::translation(double tx, double ty) {
    return Homography({1, 0, tx, 0, 1, ty, 0, 0, 1});
}

double Homography::determinant() const {
    const auto& m = h_;
    return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
           m[2] * (m[3] * m[7] - m[4] * m[6]);
}

Homography Homography::inverse() const {
    const auto& m = h_;
    const double det = determinant();
    std::array<double, 9> inv{
        (m[4] * m[8] - m[5] * m[7]) / det, (m[2] * m[7] - m[1] * m[8]) / det, (m[1] * m[5] - m[2] * m[4]) / det,
        (m[5] * m[6] - m[3] * m[8]) / det, (m[0] * m[8] - m[2] * m[6]) / det, (m[2] * m[3] - m[0] * m[5]) / det,
        (m[3] * m[7] - m[4] * m[6]) / det, (m[1] * m[6] - m[0] * m[7]) / det, (m[0] * m[4] - m[1] * m[3]) / det,
    };
    return Homography(inv);
}

std::pair<double, double> Homography::project(double x, double y) const {
    const auto& m = h_;
    const double w = m[6] * x + m[7] * y + m[8];
    if (std::fabs(w) <= kSingularTolerance) {
        throw ProjectionError("homography maps (" + std::to_string(x) + ", " + std::to_string(y) +
                              ") to a point at infinity");
    }
    return {(m[0] * x + m[1] * y + m[2]) / w, (m[3] * x + m[4] * y + m[5]) / w};
}

namespace {

double squared_distance(const std::vector<float>& a, const std::vector<float>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        acc += d * d;
    }
    return acc;
}

}  // namespace

MatchSet nn_match(const sdak::DescriptorSet& a, const sdak::DescriptorSet& b, bool mutual) {
    if (a.size() != 0 && b.size() != 0 && a.dim != b.dim) {
        throw std::invalid_argument("nn_match: descriptor dims differ (" + std::to_string(a.dim) + " vs " +
                                    std::to_string(b.dim) + ")");
    }
    MatchSet out;
    if (a.size() == 0 || b.size() == 0) {
        return out;
    }
    const std::size_t na = a.size();
    const std::size_t nb = b.size();
    std::vector<double> dist(na * nb);
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 0; j < nb; ++j) dist[i * nb + j] = squared_distance(a.descriptors[i], b.descriptors[j]);
    }
    // Strict < keeps the lowest index on ties.
    std::vector<std::size_t> best_b(na, 0);
    for (std::size_t i = 0; i < na; ++i) {
        for (std::size_t j = 1; j < nb; ++j) {
            if (dist[i * nb + j] < dist[i * nb + best_b[i]]) best_b[i] = j;
        }
    }
    std::vector<std::size_t> best_a(nb, 0);
    if (mutual) {
        for (std::size_t j = 0; j < nb; ++j) {
            for (std::size_t i = 1; i < na; ++i) {
                if (dist[i * nb + j] < dist[best_a[j] * nb + j]) best_a[j] = i;
            }
        }
    }
    for (std::size_t i = 0; i < na; ++i) {
        const std::size_t j = best_b[i];
        if (mutual && best_a[j] != i) continue;
        out.push_back({i, j, std::sqrt(dist[i * nb + j])});
    }
    return out;
}

std::vector<double> match_errors(const MatchSet& matches, const std::vector<sdak::Keypoint>& kps_a,
                                 const std::vector<sdak::Keypoint>& kps_b, const Homography& h) {
    std::vector<double> errors;
    errors.reserve(matches.size());
    for (const Match& m : matches) {
        if (m.index_a >= kps_a.size() || m.index_b >= kps_b.size()) {
            throw std::out_of_range("match_errors: match index out of range");
        }
        const auto [px, py] = h.project(kps_a[m.index_a].x, kps_a[m.index_a].y);
        errors.push_back(std::hypot(px - kps_b[m.index_b].x, py - kps_b[m.index_b].y));
    }
    return errors;
}

std::array<double, kNumThresholds> mma(const std::vector<double>& errors) {
    std::array<double, kNumThresholds> out{};
    if (errors.empty()) {
        return out;
    }
    for (std::size_t t = 1; t <= kNumThresholds; ++t) {
        std::size_t hits = 0;
        for (double e : errors) {
            if (e <= static_cast<double>(t)) ++hits;
        }
        out[t - 1] = static_cast<double>(hits) / static_cast<double>(errors.size());
    }
    return out;
}

double auc(const std::vector<std::vector<double>>& errors_per_pair, double t) {
    if (!(t > 0.0)) throw std::invalid_argument("auc: threshold must be positive");
    // The step CDF integrates to sum(max(0, t - e_i)) / n over [0, t].
    std::size_t n = 0;
    double area = 0.0;
    for (const auto& pair : errors_per_pair) {
        for (double e : pair) {
            ++n;
            if (e < t) area += t - e;
        }
    }
    if (n == 0) {
        return 0.0;
    }
    return area / (static_cast<double>(n) * t);
}

}  // namespace gess::eval
