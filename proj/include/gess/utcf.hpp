#pragma once

#include <cstdint>
#include <filesystem>

#include "gess/numerics.hpp"

namespace gess::utcf {

/// Channel layout of the fusion block.
struct UtcfDims {
    std::size_t channels = 128;          // descriptor channels C
    std::size_t semantic_in = 4;         // raw semantic cue channels
    std::size_t semantic_channels = 48;  // semantic feature width
    std::size_t gate_hidden = 128;
    std::size_t reduction = 4;

    [[nodiscard]] std::size_t hidden(std::size_t width) const {
        return std::max<std::size_t>(1, width / reduction);
    }
};

/// Two affine layers with a relu between them, applied to a pooled channel vector.
struct ChannelMlp {
    Tensor w1;  // [hidden, C]
    Tensor b1;  // [hidden]
    Tensor w2;  // [C, hidden]
    Tensor b2;  // [C]

    static ChannelMlp zeros(std::size_t width, std::size_t hidden);
    [[nodiscard]] std::size_t width() const { return w1.dim(1); }
};

/// Phi: 1x1 conv to gate_hidden channels, relu, 1x1 conv to one channel.
struct GateNet {
    ConvSpec reduce;
    ConvSpec collapse;
};

struct UtcfParams {
    ConvSpec normal_projection;  // 1x1, 3 -> C
    BatchNorm normal_norm;
    ConvSpec semantic_first;     // 3x3, semantic_in -> 48
    ConvSpec semantic_second;    // 3x3, 48 -> 48
    ChannelMlp texture_mlp;
    ChannelMlp normal_mlp;
    ChannelMlp semantic_mlp;
    GateNet gate;
    ConvSpec semantic_increment;  // 1x1, 48 -> C
    ConvSpec output_projection;   // 1x1, C -> C
    double mu = 0.1;

    /// All learned weights zero, batch norm pass-through.
    static UtcfParams zeros(const UtcfDims& dims);
    /// Uniform in [-b, b], b = 1/sqrt(fan_in); batch norm pass-through.
    static UtcfParams random(const UtcfDims& dims, std::uint64_t seed);

    [[nodiscard]] UtcfDims dims() const;
    /// Throws ShapeError naming the first inconsistent parameter.
    void validate() const;
};

struct CueBundle {
    Tensor texture;     // [C,H,W], also the residual D_initial
    Tensor normal_raw;  // [3,H,W]
    Tensor semantic_raw;  // [Cs,H,W]
    Tensor attention;   // [H,W], values in [0,1]

    void validate() const;
};

struct ProjectedCues {
    Tensor texture;
    Tensor normal;
    Tensor semantic;
};

struct Calibrated {
    Tensor features;
    Tensor weights;  // [C], each in (0,1)
};

ProjectedCues project_cues(const CueBundle& bundle, const UtcfParams& p);
Calibrated channel_calibrate(const Tensor& features, const ChannelMlp& mlp);
/// Per-pixel gate in (0,1), [H,W].
Tensor gating_weight(const Tensor& texture, const Tensor& normal, const Tensor& semantic,
                     const GateNet& phi);
Tensor gated_fuse(const Tensor& texture, const Tensor& normal, const Tensor& gate);
Tensor refine_and_output(const Tensor& fused, const Tensor& semantic, const Tensor& initial,
                         const Tensor& attention, const UtcfParams& p);
Tensor utcf_forward(const CueBundle& bundle, const UtcfParams& p);

/// Every intermediate of one forward pass, for inspection.
struct ForwardTrace {
    ProjectedCues projected;
    Calibrated texture;
    Calibrated normal;
    Calibrated semantic;
    Tensor gate;
    Tensor fused;
    Tensor output;
};
ForwardTrace utcf_trace(const CueBundle& bundle, const UtcfParams& p);

void save_params(const UtcfParams& p, const std::filesystem::path& dir);
UtcfParams load_params(const std::filesystem::path& dir);

}  // namespace gess::utcf
