#pragma once

#include <filesystem>
#include <stdexcept>

#include "gess/tensor.hpp"

namespace gess::image {

class ImageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Decodes 8-bit grayscale or RGB PNG and binary PGM/PPM (P5/P6) into a
/// [H,W] luma tensor in [0,1]. RGB uses 0.299 R + 0.587 G + 0.114 B.
Tensor read_luma(const std::filesystem::path& path);

/// Writes an 8-bit image; [H,W] becomes P5, [3,H,W] becomes P6. Values are
/// clamped to [0,1] and rounded.
void write_pnm(const Tensor& image, const std::filesystem::path& path);
/// 8-bit grayscale ([H,W]) or RGB ([3,H,W]) PNG.
void write_png(const Tensor& image, const std::filesystem::path& path);

bool is_image_file(const std::filesystem::path& path);

}  // namespace gess::image
