#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gess/tensor.hpp"

namespace gess {

// GTF tensor file, little-endian:
//   bytes 0-3  magic "GTF1"
//   byte  4    dtype code (0x01 = f32)
//   byte  5    rank N, 1..4
//   N x u32    extents, outermost first
//   product(extents) x f32 payload, row-major, nothing after it

enum class GtfErrorKind {
    io,
    bad_magic,
    bad_dtype,
    bad_rank,
    bad_extent,
    dim_overflow,
    truncated_payload,
    trailing_bytes,
};

const char* to_string(GtfErrorKind kind);

class GtfError : public std::runtime_error {
public:
    GtfError(GtfErrorKind kind, const std::string& detail);
    [[nodiscard]] GtfErrorKind kind() const noexcept { return kind_; }

private:
    GtfErrorKind kind_;
};

inline constexpr std::uint8_t kGtfDtypeF32 = 0x01;

std::vector<std::uint8_t> gtf_encode(const Tensor& t);
Tensor gtf_decode(std::span<const std::uint8_t> bytes);

void gtf_write(const Tensor& t, const std::filesystem::path& path);
Tensor gtf_read(const std::filesystem::path& path);

}  // namespace gess
