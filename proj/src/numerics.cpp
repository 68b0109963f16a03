#include "gess/numerics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gess {

std::string shape_string(const std::vector<std::size_t>& dims) {
    std::ostringstream os;
    os << '[';
    for (std::size_t i = 0; i < dims.size(); ++i) {
        if (i != 0) os << ',';
        os << dims[i];
    }
    os << ']';
    return os.str();
}

void require_rank(const Tensor& t, std::size_t rank, std::string_view what) {
    if (t.rank() != rank) {
        throw ShapeError(std::string(what) + ": expected rank " + std::to_string(rank) + ", got " +
                         shape_string(t.dims()));
    }
}

void require_same_dims(const std::vector<std::size_t>& a, const std::vector<std::size_t>& b,
                       std::string_view what) {
    if (a.size() != b.size()) {
        throw ShapeError(std::string(what) + ": rank mismatch " + shape_string(a) + " vs " +
                         shape_string(b));
    }
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] != b[i]) {
            throw ShapeError(std::string(what) + ": axis " + std::to_string(i) + " mismatch (" +
                             std::to_string(a[i]) + " vs " + std::to_string(b[i]) + ")");
        }
    }
}

bool all_finite(const Tensor& t) {
    return std::all_of(t.data().begin(), t.data().end(), [](float v) { return std::isfinite(v); });
}

ConvSpec ConvSpec::zeros(std::size_t out_ch, std::size_t in_ch, std::size_t kh, std::size_t kw) {
    ConvSpec spec;
    spec.kernel = Tensor({out_ch, in_ch, kh, kw});
    spec.bias = Tensor({out_ch});
    spec.stride = 1;
    spec.padding = kh / 2;
    return spec;
}

BatchNorm BatchNorm::identity(std::size_t channels) {
    // var + eps rounds to 1 within float precision.
    return BatchNorm{Tensor({channels}, 0.0f), Tensor({channels}, 1.0f - 1e-5f),
                     Tensor({channels}, 1.0f), Tensor({channels}, 0.0f)};
}

Tensor conv2d(const Tensor& input, const ConvSpec& spec) {
    require_rank(input, 3, "conv2d input");
    require_rank(spec.kernel, 4, "conv2d kernel");
    require_rank(spec.bias, 1, "conv2d bias");
    const std::size_t c_in = input.dim(0);
    const std::size_t h = input.dim(1);
    const std::size_t w = input.dim(2);
    const std::size_t c_out = spec.out_channels();
    const std::size_t kh = spec.kernel_h();
    const std::size_t kw = spec.kernel_w();
    if (spec.in_channels() != c_in) {
        throw ShapeError("conv2d: input channel axis (0) mismatch: kernel expects " +
                         std::to_string(spec.in_channels()) + ", input has " + std::to_string(c_in));
    }
    if (spec.bias.dim(0) != c_out) {
        throw ShapeError("conv2d: bias axis (0) has " + std::to_string(spec.bias.dim(0)) +
                         " entries for " + std::to_string(c_out) + " output channels");
    }
    if (kh % 2 == 0 || kw % 2 == 0) {
        throw ShapeError("conv2d: kernel extents must be odd, got " + shape_string(spec.kernel.dims()));
    }
    if (spec.stride == 0) {
        throw ShapeError("conv2d: stride must be positive");
    }
    const std::size_t pad = spec.padding;
    if (h + 2 * pad < kh || (h + 2 * pad - kh) % spec.stride != 0) {
        throw ShapeError("conv2d: height axis (1) of " + std::to_string(h) +
                         " is incompatible with kernel/stride/padding");
    }
    if (w + 2 * pad < kw || (w + 2 * pad - kw) % spec.stride != 0) {
        throw ShapeError("conv2d: width axis (2) of " + std::to_string(w) +
                         " is incompatible with kernel/stride/padding");
    }
    const std::size_t out_h = (h + 2 * pad - kh) / spec.stride + 1;
    const std::size_t out_w = (w + 2 * pad - kw) / spec.stride + 1;

    Tensor out({c_out, out_h, out_w});
    const auto ih = static_cast<std::ptrdiff_t>(h);
    const auto iw = static_cast<std::ptrdiff_t>(w);
    for (std::size_t o = 0; o < c_out; ++o) {
        for (std::size_t y = 0; y < out_h; ++y) {
            for (std::size_t x = 0; x < out_w; ++x) {
                double acc = spec.bias[o];
                const auto y0 = static_cast<std::ptrdiff_t>(y * spec.stride) - static_cast<std::ptrdiff_t>(pad);
                const auto x0 = static_cast<std::ptrdiff_t>(x * spec.stride) - static_cast<std::ptrdiff_t>(pad);
                for (std::size_t c = 0; c < c_in; ++c) {
                    for (std::size_t i = 0; i < kh; ++i) {
                        const auto sy = y0 + static_cast<std::ptrdiff_t>(i);
                        if (sy < 0 || sy >= ih) continue;
                        for (std::size_t j = 0; j < kw; ++j) {
                            const auto sx = x0 + static_cast<std::ptrdiff_t>(j);
                            if (sx < 0 || sx >= iw) continue;
                            acc += static_cast<double>(spec.kernel.at(o, c, i, j)) *
                                   input.at(c, static_cast<std::size_t>(sy), static_cast<std::size_t>(sx));
                        }
                    }
                }
                out.at(o, y, x) = static_cast<float>(acc);
            }
        }
    }
    return out;
}

Tensor batch_norm(const Tensor& input, const BatchNorm& bn) {
    require_rank(input, 3, "batch_norm input");
    const std::size_t c = input.dim(0);
    for (const Tensor* p : {&bn.mean, &bn.var, &bn.scale, &bn.shift}) {
        require_same_dims(p->dims(), {c}, "batch_norm parameters");
    }
    Tensor out(input.dims());
    const std::size_t plane = input.dim(1) * input.dim(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        const double inv = 1.0 / std::sqrt(static_cast<double>(bn.var[ch]) + kBatchNormEpsilon);
        const double g = bn.scale[ch];
        const double m = bn.mean[ch];
        const double b = bn.shift[ch];
        for (std::size_t i = 0; i < plane; ++i) {
            const std::size_t k = ch * plane + i;
            out[k] = static_cast<float>(g * (input[k] - m) * inv + b);
        }
    }
    return out;
}

double sigmoid(double x) {
    if (x >= 0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

Tensor activate(const Tensor& input, Activation mode) {
    Tensor out(input.dims());
    for (std::size_t i = 0; i < input.size(); ++i) {
        const float v = input[i];
        out[i] = mode == Activation::sigmoid ? static_cast<float>(sigmoid(v)) : std::max(v, 0.0f);
    }
    return out;
}

Tensor global_avg_pool(const Tensor& input) {
    require_rank(input, 3, "global_avg_pool input");
    const std::size_t c = input.dim(0);
    const std::size_t plane = input.dim(1) * input.dim(2);
    Tensor out({c});
    for (std::size_t ch = 0; ch < c; ++ch) {
        double sum = 0.0;
        for (std::size_t i = 0; i < plane; ++i) sum += input[ch * plane + i];
        out[ch] = static_cast<float>(sum / static_cast<double>(plane));
    }
    return out;
}

namespace {

double source_coord(std::size_t out_index, std::size_t in_extent, std::size_t out_extent) {
    if (out_extent == 1) {
        return static_cast<double>(in_extent - 1) / 2.0;
    }
    return static_cast<double>(out_index) * static_cast<double>(in_extent - 1) /
           static_cast<double>(out_extent - 1);
}

}  // namespace

Tensor bilinear_resample(const Tensor& input, std::size_t out_h, std::size_t out_w) {
    require_rank(input, 3, "bilinear_resample input");
    if (out_h == 0 || out_w == 0) {
        throw ShapeError("bilinear_resample: output extents must be positive");
    }
    const std::size_t c = input.dim(0);
    const std::size_t h = input.dim(1);
    const std::size_t w = input.dim(2);
    Tensor out({c, out_h, out_w});
    for (std::size_t y = 0; y < out_h; ++y) {
        const double sy = source_coord(y, h, out_h);
        const auto y0 = static_cast<std::size_t>(std::floor(sy));
        const std::size_t y1 = std::min(y0 + 1, h - 1);
        const double fy = sy - static_cast<double>(y0);
        for (std::size_t x = 0; x < out_w; ++x) {
            const double sx = source_coord(x, w, out_w);
            const auto x0 = static_cast<std::size_t>(std::floor(sx));
            const std::size_t x1 = std::min(x0 + 1, w - 1);
            const double fx = sx - static_cast<double>(x0);
            for (std::size_t ch = 0; ch < c; ++ch) {
                const double top = (1.0 - fx) * input.at(ch, y0, x0) + fx * input.at(ch, y0, x1);
                const double bottom = (1.0 - fx) * input.at(ch, y1, x0) + fx * input.at(ch, y1, x1);
                out.at(ch, y, x) = static_cast<float>((1.0 - fy) * top + fy * bottom);
            }
        }
    }
    return out;
}

Tensor64 finite_diff_gradient(const std::function<double(const Tensor64&)>& f, const Tensor64& x, double h,
                              FdStencil stencil) {
    if (!(h > 0.0)) {
        throw std::invalid_argument("finite_diff_gradient: step must be positive");
    }
    Tensor64 grad(x.dims());
    Tensor64 probe = x;
    auto at = [&](std::size_t i, double offset) {
        probe[i] = x[i] + offset;
        const double v = f(probe);
        probe[i] = x[i];
        if (!std::isfinite(v)) {
            throw std::domain_error("finite_diff_gradient: non-finite function value at element " +
                                    std::to_string(i));
        }
        return v;
    };
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (stencil == FdStencil::central3) {
            grad[i] = (at(i, h) - at(i, -h)) / (2.0 * h);
        } else {
            grad[i] = (-at(i, 2.0 * h) + 8.0 * at(i, h) - 8.0 * at(i, -h) + at(i, -2.0 * h)) / (12.0 * h);
        }
    }
    return grad;
}

Tensor concat_channels(std::initializer_list<const Tensor*> parts) {
    if (parts.size() == 0) {
        throw ShapeError("concat_channels: no inputs");
    }
    const Tensor& first = **parts.begin();
    require_rank(first, 3, "concat_channels input");
    std::size_t channels = 0;
    for (const Tensor* p : parts) {
        require_rank(*p, 3, "concat_channels input");
        require_same_dims({p->dim(1), p->dim(2)}, {first.dim(1), first.dim(2)},
                          "concat_channels spatial extents");
        channels += p->dim(0);
    }
    std::vector<float> data;
    data.reserve(channels * first.dim(1) * first.dim(2));
    for (const Tensor* p : parts) {
        data.insert(data.end(), p->data().begin(), p->data().end());
    }
    return Tensor({channels, first.dim(1), first.dim(2)}, std::move(data));
}

}  // namespace gess
