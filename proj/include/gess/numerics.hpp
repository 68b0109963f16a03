#pragma once

#include <cstddef>
#include <functional>
#include <string_view>

#include "gess/tensor.hpp"

namespace gess {

/// Thrown when operands have incompatible shapes. The message names the axis.
class ShapeError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// 2-D convolution parameters. `kernel` is [C_out, C_in, kH, kW], `bias` is
/// [C_out]. Kernels are odd-sized; borders are zero-padded.
struct ConvSpec {
    Tensor kernel;
    Tensor bias;
    std::size_t stride = 1;
    std::size_t padding = 0;

    [[nodiscard]] std::size_t out_channels() const { return kernel.dim(0); }
    [[nodiscard]] std::size_t in_channels() const { return kernel.dim(1); }
    [[nodiscard]] std::size_t kernel_h() const { return kernel.dim(2); }
    [[nodiscard]] std::size_t kernel_w() const { return kernel.dim(3); }

    /// Zero-initialized spec with "same" padding for a kh x kw kernel.
    static ConvSpec zeros(std::size_t out_ch, std::size_t in_ch, std::size_t kh, std::size_t kw);
};

/// Inference-form batch normalization:
/// y = scale * (x - mean) / sqrt(var + kBatchNormEpsilon) + shift, per channel.
struct BatchNorm {
    Tensor mean;
    Tensor var;
    Tensor scale;
    Tensor shift;

    static BatchNorm identity(std::size_t channels);
};

inline constexpr double kBatchNormEpsilon = 1e-5;

enum class Activation { sigmoid, relu };

Tensor conv2d(const Tensor& input, const ConvSpec& spec);
Tensor batch_norm(const Tensor& input, const BatchNorm& bn);
Tensor activate(const Tensor& input, Activation mode);
Tensor global_avg_pool(const Tensor& input);
/// Align-corners bilinear resampling of a [C,H,W] tensor.
Tensor bilinear_resample(const Tensor& input, std::size_t out_h, std::size_t out_w);

double sigmoid(double x);

enum class FdStencil {
    central3,  // (f(x+h) - f(x-h)) / 2h, truncation O(h^2)
    central5,  // five-point, truncation O(h^4)
};

/// Finite-difference gradient of a scalar function, evaluated per element.
Tensor64 finite_diff_gradient(const std::function<double(const Tensor64&)>& f, const Tensor64& x, double h,
                              FdStencil stencil = FdStencil::central3);

/// Concatenates [C_i,H,W] tensors along the channel axis.
Tensor concat_channels(std::initializer_list<const Tensor*> parts);

void require_rank(const Tensor& t, std::size_t rank, std::string_view what);
void require_same_dims(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                       std::string_view what);
bool all_finite(const Tensor& t);

}  // namespace gess
