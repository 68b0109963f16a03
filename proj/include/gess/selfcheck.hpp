#pragma once

// Seeded self-contained checks shared by `gess verify` and the acceptance
// runner. Each returns the worst observed error next to its tolerance.

#include <cstdint>
#include <string>
#include <vector>

namespace gess::selfcheck {

struct CheckResult {
    std::string name;
    double max_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
    std::string detail;  // first failing case, empty when passed
};

CheckResult conv_oracle(std::size_t cases, std::uint64_t seed, bool inject_fault = false);
CheckResult bilinear_oracle(std::size_t cases, std::uint64_t seed);
/// Exact kept-set equality; max_error counts mismatching pixels.
CheckResult nms_oracle(std::size_t maps, std::uint64_t seed);
CheckResult keypoint_oracle(std::size_t maps, std::uint64_t seed);
/// `sets` random pairs of n x n descriptor sets (n descriptors of dimension n).
CheckResult nn_oracle(std::size_t sets, std::size_t n, std::uint64_t seed);
CheckResult auc_oracle(std::size_t steps, std::uint64_t seed);
CheckResult gradient_orthogonality(std::size_t pixels, std::uint64_t seed);
CheckResult gradient_finite_difference(std::size_t fields, std::uint64_t seed);
CheckResult stability_reference_values(std::size_t random_inputs, std::uint64_t seed);
CheckResult seg_loss_reference_values();
CheckResult utcf_limits(std::uint64_t seed);
CheckResult sdak_identity(std::uint64_t seed);
CheckResult gtf_roundtrip(std::size_t tensors, std::uint64_t seed);
/// L_normal + L_seg + L_sta composed against the three losses summed separately.
CheckResult aux_loss_additivity(std::uint64_t seed);

std::vector<CheckResult> run_all(std::uint64_t seed, bool inject_fault);

}  // namespace gess::selfcheck
