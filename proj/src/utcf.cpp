#include "gess/utcf.hpp"

#include <cmath>
#include <random>
#include <string>

#include "gess/param_manifest.hpp"

namespace gess::utcf {

namespace {

void fill_uniform(Tensor& t, double bound, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (float& v : t.data()) v = static_cast<float>(dist(rng));
}

void randomize(ConvSpec& spec, std::mt19937_64& rng) {
    const double fan_in = static_cast<double>(spec.in_channels() * spec.kernel_h() * spec.kernel_w());
    const double bound = 1.0 / std::sqrt(fan_in);
    fill_uniform(spec.kernel, bound, rng);
    fill_uniform(spec.bias, bound, rng);
}

void randomize(ChannelMlp& mlp, std::mt19937_64& rng) {
    const double b1 = 1.0 / std::sqrt(static_cast<double>(mlp.w1.dim(1)));
    const double b2 = 1.0 / std::sqrt(static_cast<double>(mlp.w2.dim(1)));
    fill_uniform(mlp.w1, b1, rng);
    fill_uniform(mlp.b1, b1, rng);
    fill_uniform(mlp.w2, b2, rng);
    fill_uniform(mlp.b2, b2, rng);
}

void require_conv(const ConvSpec& spec, std::size_t out_ch, std::size_t in_ch, std::size_t k,
                  const std::string& name) {
    require_rank(spec.kernel, 4, name + " kernel");
    require_same_dims(spec.kernel.dims(), {out_ch, in_ch, k, k}, name + " kernel");
    require_same_dims(spec.bias.dims(), {out_ch}, name + " bias");
    if (spec.padding != k / 2 || spec.stride != 1) {
        throw ShapeError(name + ": expected stride 1 and same padding");
    }
}

void require_mlp(const ChannelMlp& mlp, std::size_t width, const std::string& name) {
    require_rank(mlp.w1, 2, name + " w1");
    const std::size_t hidden = mlp.w1.dim(0);
    require_same_dims(mlp.w1.dims(), {hidden, width}, name + " w1");
    require_same_dims(mlp.b1.dims(), {hidden}, name + " b1");
    require_same_dims(mlp.w2.dims(), {width, hidden}, name + " w2");
    require_same_dims(mlp.b2.dims(), {width}, name + " b2");
}

}  // namespace

ChannelMlp ChannelMlp::zeros(std::size_t width, std::size_t hidden) {
    return ChannelMlp{Tensor({hidden, width}), Tensor({hidden}), Tensor({width, hidden}), Tensor({width})};
}

UtcfParams UtcfParams::zeros(const UtcfDims& d) {
    UtcfParams p;
    p.normal_projection = ConvSpec::zeros(d.channels, 3, 1, 1);
    p.normal_norm = BatchNorm::identity(d.channels);
    p.semantic_first = ConvSpec::zeros(d.semantic_channels, d.semantic_in, 3, 3);
    p.semantic_second = ConvSpec::zeros(d.semantic_channels, d.semantic_channels, 3, 3);
    p.texture_mlp = ChannelMlp::zeros(d.channels, d.hidden(d.channels));
    p.normal_mlp = ChannelMlp::zeros(d.channels, d.hidden(d.channels));
    p.semantic_mlp = ChannelMlp::zeros(d.semantic_channels, d.hidden(d.semantic_channels));
    p.gate.reduce = ConvSpec::zeros(d.gate_hidden, 2 * d.channels + d.semantic_channels, 1, 1);
    p.gate.collapse = ConvSpec::zeros(1, d.gate_hidden, 1, 1);
    p.semantic_increment = ConvSpec::zeros(d.channels, d.semantic_channels, 1, 1);
    p.output_projection = ConvSpec::zeros(d.channels, d.channels, 1, 1);
    return p;
}

UtcfParams UtcfParams::random(const UtcfDims& d, std::uint64_t seed) {
    UtcfParams p = zeros(d);
    std::mt19937_64 rng(seed);
    randomize(p.normal_projection, rng);
    randomize(p.semantic_first, rng);
    randomize(p.semantic_second, rng);
    randomize(p.texture_mlp, rng);
    randomize(p.normal_mlp, rng);
    randomize(p.semantic_mlp, rng);
    randomize(p.gate.reduce, rng);
    randomize(p.gate.collapse, rng);
    randomize(p.semantic_increment, rng);
    randomize(p.output_projection, rng);
    return p;
}

UtcfDims UtcfParams::dims() const {
    UtcfDims d;
    d.channels = normal_projection.out_channels();
    d.semantic_in = semantic_first.in_channels();
    d.semantic_channels = semantic_first.out_channels();
    d.gate_hidden = gate.reduce.out_channels();
    const std::size_t hidden = texture_mlp.w1.dim(0);
    d.reduction = std::max<std::size_t>(1, d.channels / hidden);
    return d;
}

void UtcfParams::validate() const {
    const std::size_t c = normal_projection.kernel.rank() == 4 ? normal_projection.out_channels() : 0;
    const std::size_t s = semantic_first.kernel.rank() == 4 ? semantic_first.out_channels() : 0;
    const std::size_t s_in = s != 0 ? semantic_first.in_channels() : 0;
    require_conv(normal_projection, c, 3, 1, "normal_projection");
    for (const Tensor* t : {&normal_norm.mean, &normal_norm.var, &normal_norm.scale, &normal_norm.shift}) {
        require_same_dims(t->dims(), {c}, "normal_norm");
    }
    require_conv(semantic_first, s, s_in, 3, "semantic_first");
    require_conv(semantic_second, s, s, 3, "semantic_second");
    require_mlp(texture_mlp, c, "texture_mlp");
    require_mlp(normal_mlp, c, "normal_mlp");
    require_mlp(semantic_mlp, s, "semantic_mlp");
    const std::size_t hidden = gate.reduce.kernel.rank() == 4 ? gate.reduce.out_channels() : 0;
    require_conv(gate.reduce, hidden, 2 * c + s, 1, "gate.reduce");
    require_conv(gate.collapse, 1, hidden, 1, "gate.collapse");
    require_conv(semantic_increment, c, s, 1, "semantic_increment");
    require_conv(output_projection, c, c, 1, "output_projection");
    if (!(mu >= 0.0 && mu <= 1.0)) {
        throw std::invalid_argument("utcf: mu must lie in [0,1]");
    }
}

void CueBundle::validate() const {
    require_rank(texture, 3, "texture cue");
    require_rank(normal_raw, 3, "normal cue");
    require_rank(semantic_raw, 3, "semantic cue");
    require_rank(attention, 2, "attention map");
    if (normal_raw.dim(0) != 3) {
        throw ShapeError("normal cue: channel axis (0) must be 3, got " + std::to_string(normal_raw.dim(0)));
    }
    const std::vector<std::size_t> plane{texture.dim(1), texture.dim(2)};
    require_same_dims({normal_raw.dim(1), normal_raw.dim(2)}, plane, "normal cue spatial extents");
    require_same_dims({semantic_raw.dim(1), semantic_raw.dim(2)}, plane, "semantic cue spatial extents");
    require_same_dims(attention.dims(), plane, "attention map extents");
    for (float a : attention.data()) {
        if (!(a >= 0.0f && a <= 1.0f)) {
            throw std::invalid_argument("attention map: value outside [0,1]");
        }
    }
}

ProjectedCues project_cues(const CueBundle& bundle, const UtcfParams& p) {
    bundle.validate();
    if (bundle.semantic_raw.dim(0) != p.semantic_first.in_channels()) {
        throw ShapeError("project_cues: semantic channel axis (0) is " +
                         std::to_string(bundle.semantic_raw.dim(0)) + ", parameters expect " +
                         std::to_string(p.semantic_first.in_channels()));
    }
    ProjectedCues out;
    out.texture = bundle.texture;
    out.normal = activate(batch_norm(conv2d(bundle.normal_raw, p.normal_projection), p.normal_norm),
                          Activation::relu);
    const Tensor first = activate(conv2d(bundle.semantic_raw, p.semantic_first), Activation::relu);
    out.semantic = activate(conv2d(first, p.semantic_second), Activation::relu);
    return out;
}

Calibrated channel_calibrate(const Tensor& features, const ChannelMlp& mlp) {
    require_rank(features, 3, "channel_calibrate input");
    const std::size_t c = features.dim(0);
    require_mlp(mlp, c, "channel_calibrate mlp");
    const std::size_t hidden = mlp.w1.dim(0);
    const Tensor pooled = global_avg_pool(features);

    std::vector<double> h(hidden);
    for (std::size_t j = 0; j < hidden; ++j) {
        double acc = mlp.b1[j];
        for (std::size_t i = 0; i < c; ++i) acc += static_cast<double>(mlp.w1.at(j, i)) * pooled[i];
        h[j] = std::max(acc, 0.0);
    }
    Tensor weights({c});
    for (std::size_t i = 0; i < c; ++i) {
        double acc = mlp.b2[i];
        for (std::size_t j = 0; j < hidden; ++j) acc += static_cast<double>(mlp.w2.at(i, j)) * h[j];
        weights[i] = static_cast<float>(sigmoid(acc));
    }

    Tensor scaled(features.dims());
    const std::size_t plane = features.dim(1) * features.dim(2);
    for (std::size_t ch = 0; ch < c; ++ch) {
        for (std::size_t k = 0; k < plane; ++k) {
            scaled[ch * plane + k] = weights[ch] * features[ch * plane + k];
        }
    }
    return {std::move(scaled), std::move(weights)};
}

Tensor gating_weight(const Tensor& texture, const Tensor& normal, const Tensor& semantic,
                     const GateNet& phi) {
    const Tensor stacked = concat_channels({&texture, &normal, &semantic});
    if (stacked.dim(0) != phi.reduce.in_channels()) {
        throw ShapeError("gating_weight: concatenated channel axis (0) is " + std::to_string(stacked.dim(0)) +
                         ", gate expects " + std::to_string(phi.reduce.in_channels()));
    }
    const Tensor hidden = activate(conv2d(stacked, phi.reduce), Activation::relu);
    const Tensor logits = conv2d(hidden, phi.collapse);
    if (logits.dim(0) != 1) {
        throw ShapeError("gating_weight: gate must produce one channel");
    }
    return activate(logits, Activation::sigmoid).reshaped({logits.dim(1), logits.dim(2)});
}

Tensor gated_fuse(const Tensor& texture, const Tensor& normal, const Tensor& gate) {
    require_rank(texture, 3, "gated_fuse texture");
    require_same_dims(texture.dims(), normal.dims(), "gated_fuse");
    require_same_dims(gate.dims(), {texture.dim(1), texture.dim(2)}, "gated_fuse gate");
    Tensor out(texture.dims());
    const std::size_t plane = gate.size();
    for (std::size_t ch = 0; ch < texture.dim(0); ++ch) {
        for (std::size_t k = 0; k < plane; ++k) {
            const std::size_t i = ch * plane + k;
            const float g = gate[k];
            out[i] = (1.0f - g) * texture[i] + g * normal[i];
        }
    }
    return out;
}

Tensor refine_and_output(const Tensor& fused, const Tensor& semantic, const Tensor& initial,
                         const Tensor& attention, const UtcfParams& p) {
    require_rank(fused, 3, "refine_and_output fused");
    require_same_dims(fused.dims(), initial.dims(), "refine_and_output residual");
    require_same_dims(attention.dims(), {fused.dim(1), fused.dim(2)}, "refine_and_output attention");
    const Tensor increment = conv2d(semantic, p.semantic_increment);
    require_same_dims(increment.dims(), fused.dims(), "refine_and_output semantic increment");

    Tensor injected(fused.dims());
    for (std::size_t i = 0; i < fused.size(); ++i) {
        injected[i] = static_cast<float>(fused[i] + p.mu * increment[i]);
    }
    const Tensor refined = activate(conv2d(injected, p.output_projection), Activation::relu);
    require_same_dims(refined.dims(), fused.dims(), "refine_and_output projection");

    Tensor out(fused.dims());
    const std::size_t plane = attention.size();
    for (std::size_t ch = 0; ch < fused.dim(0); ++ch) {
        for (std::size_t k = 0; k < plane; ++k) {
            const std::size_t i = ch * plane + k;
            out[i] = attention[k] * (refined[i] + initial[i]);
        }
    }
    return out;
}

ForwardTrace utcf_trace(const CueBundle& bundle, const UtcfParams& p) {
    ForwardTrace t;
    t.projected = project_cues(bundle, p);
    t.texture = channel_calibrate(t.projected.texture, p.texture_mlp);
    t.normal = channel_calibrate(t.projected.normal, p.normal_mlp);
    t.semantic = channel_calibrate(t.projected.semantic, p.semantic_mlp);
    t.gate = gating_weight(t.texture.features, t.normal.features, t.semantic.features, p.gate);
    t.fused = gated_fuse(t.texture.features, t.normal.features, t.gate);
    t.output = refine_and_output(t.fused, t.semantic.features, bundle.texture, bundle.attention, p);
    return t;
}

Tensor utcf_forward(const CueBundle& bundle, const UtcfParams& p) {
    return utcf_trace(bundle, p).output;
}

namespace {

constexpr const char* kPrefix = "utcf.";

void put_conv(ParamDir& dir, const std::string& name, const ConvSpec& spec, const std::string& role) {
    dir.put(kPrefix + name + ".kernel", spec.kernel, role);
    dir.put(kPrefix + name + ".bias", spec.bias, role);
}

ConvSpec get_conv(const ParamDir& dir, const std::string& name) {
    ConvSpec spec;
    spec.kernel = dir.tensor(kPrefix + name + ".kernel");
    spec.bias = dir.tensor(kPrefix + name + ".bias");
    require_rank(spec.kernel, 4, name + " kernel");
    spec.stride = 1;
    spec.padding = spec.kernel_h() / 2;
    return spec;
}

void put_mlp(ParamDir& dir, const std::string& name, const ChannelMlp& mlp) {
    const std::string role = "channel attention mlp";
    dir.put(kPrefix + name + ".w1", mlp.w1, role);
    dir.put(kPrefix + name + ".b1", mlp.b1, role);
    dir.put(kPrefix + name + ".w2", mlp.w2, role);
    dir.put(kPrefix + name + ".b2", mlp.b2, role);
}

ChannelMlp get_mlp(const ParamDir& dir, const std::string& name) {
    return ChannelMlp{dir.tensor(kPrefix + name + ".w1"), dir.tensor(kPrefix + name + ".b1"),
                      dir.tensor(kPrefix + name + ".w2"), dir.tensor(kPrefix + name + ".b2")};
}

}  // namespace

void save_params(const UtcfParams& p, const std::filesystem::path& dir) {
    p.validate();
    ParamDir out;
    put_conv(out, "normal_projection", p.normal_projection, "normal projection 1x1");
    out.put("utcf.normal_norm.mean", p.normal_norm.mean, "batch norm running mean");
    out.put("utcf.normal_norm.var", p.normal_norm.var, "batch norm running variance");
    out.put("utcf.normal_norm.scale", p.normal_norm.scale, "batch norm scale");
    out.put("utcf.normal_norm.shift", p.normal_norm.shift, "batch norm shift");
    put_conv(out, "semantic_first", p.semantic_first, "semantic extractor 3x3, layer 1");
    put_conv(out, "semantic_second", p.semantic_second, "semantic extractor 3x3, layer 2");
    put_mlp(out, "texture_mlp", p.texture_mlp);
    put_mlp(out, "normal_mlp", p.normal_mlp);
    put_mlp(out, "semantic_mlp", p.semantic_mlp);
    put_conv(out, "gate.reduce", p.gate.reduce, "gate network 1x1, reduce");
    put_conv(out, "gate.collapse", p.gate.collapse, "gate network 1x1, collapse");
    put_conv(out, "semantic_increment", p.semantic_increment, "semantic increment 1x1");
    put_conv(out, "output_projection", p.output_projection, "output projection 1x1");
    out.scalars["utcf.mu"] = p.mu;
    write_param_dir(out, dir);
}

UtcfParams load_params(const std::filesystem::path& dir) {
    const ParamDir in = read_param_dir(dir);
    UtcfParams p;
    p.normal_projection = get_conv(in, "normal_projection");
    p.normal_norm = BatchNorm{in.tensor("utcf.normal_norm.mean"), in.tensor("utcf.normal_norm.var"),
                              in.tensor("utcf.normal_norm.scale"), in.tensor("utcf.normal_norm.shift")};
    p.semantic_first = get_conv(in, "semantic_first");
    p.semantic_second = get_conv(in, "semantic_second");
    p.texture_mlp = get_mlp(in, "texture_mlp");
    p.normal_mlp = get_mlp(in, "normal_mlp");
    p.semantic_mlp = get_mlp(in, "semantic_mlp");
    p.gate.reduce = get_conv(in, "gate.reduce");
    p.gate.collapse = get_conv(in, "gate.collapse");
    p.semantic_increment = get_conv(in, "semantic_increment");
    p.output_projection = get_conv(in, "output_projection");
    p.mu = in.scalar("utcf.mu");
    p.validate();
    return p;
}

}  // namespace gess::utcf
