#include <doctest.h>

#include <cstring>
#include <random>

#include "gess/utcf.hpp"
#include "support/fixtures.hpp"

using namespace gess;
using namespace gess::utcf;

namespace {

UtcfDims small_dims() {
    UtcfDims d;
    d.channels = 8;
    d.semantic_in = 4;
    d.semantic_channels = 6;
    d.gate_hidden = 5;
    d.reduction = 4;
    return d;
}

Tensor uniform(std::vector<std::size_t> dims, double lo, double hi, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(lo, hi);
    Tensor t(std::move(dims));
    for (auto& v : t.data()) v = static_cast<float>(u(rng));
    return t;
}

CueBundle bundle(std::uint64_t seed, std::size_t h = 6, std::size_t w = 7) {
    std::mt19937_64 rng(seed);
    const UtcfDims d = small_dims();
    return CueBundle{uniform({d.channels, h, w}, -1, 1, rng), uniform({3, h, w}, -1, 1, rng),
                     uniform({d.semantic_in, h, w}, 0, 1, rng), uniform({h, w}, 0, 1, rng)};
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    return a.dims() == b.dims() && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("zero parameters reduce the block to attention times texture") {
    const CueBundle b = bundle(1);
    const UtcfParams p = UtcfParams::zeros(small_dims());
    const ForwardTrace t = utcf_trace(b, p);
    for (float w : t.texture.weights.values()) CHECK(w == 0.5f);
    for (float g : t.gate.values()) CHECK(g == 0.5f);
    for (std::size_t i = 0; i < t.fused.size(); ++i) CHECK(t.fused[i] == doctest::Approx(0.25 * b.texture[i]));
    const std::size_t plane = b.attention.size();
    for (std::size_t i = 0; i < t.output.size(); ++i) {
        CHECK(t.output[i] == doctest::Approx(b.attention[i % plane] * b.texture[i]));
    }
}

TEST_CASE("channel_calibrate weights lie in (0,1) and saturate with the bias") {
    std::mt19937_64 rng(2);
    const Tensor f = uniform({8, 3, 3}, -1, 1, rng);
    ChannelMlp mlp = ChannelMlp::zeros(8, 2);
    CHECK(channel_calibrate(f, mlp).weights[3] == 0.5f);
    for (auto& v : mlp.b2.data()) v = 20.0f;
    const Calibrated c = channel_calibrate(f, mlp);
    for (float w : c.weights.values()) CHECK(w >= 0.999999f);
    for (std::size_t i = 0; i < f.size(); ++i) CHECK(std::fabs(c.features[i] - f[i]) <= 1e-6);

    mlp = ChannelMlp::zeros(8, 2);
    mlp.w1 = uniform({2, 8}, -3, 3, rng);
    mlp.w2 = uniform({8, 2}, -3, 3, rng);
    {
        const auto result = channel_calibrate(f, mlp);
        for (float w : result.weights.values()) {
            CHECK(w > 0.0f);
            CHECK(w < 1.0f);
        }
    }
    CHECK_THROWS_AS(channel_calibrate(Tensor({7, 3, 3}), ChannelMlp::zeros(8, 2)), ShapeError);
}

TEST_CASE("gated_fuse endpoints and convexity") {
    std::mt19937_64 rng(3);
    const Tensor t = uniform({4, 3, 3}, -1, 1, rng);
    const Tensor n = uniform({4, 3, 3}, -1, 1, rng);
    CHECK(bit_equal(gated_fuse(t, n, Tensor({3, 3}, 0.0f)), t));
    CHECK(bit_equal(gated_fuse(t, n, Tensor({3, 3}, 1.0f)), n));

    Tensor neg(n.dims());
    for (std::size_t i = 0; i < n.size(); ++i) neg[i] = -t[i];
    {
        const auto result = gated_fuse(t, neg, Tensor({3, 3}, 0.5f));
        for (float v : result.values()) CHECK(v == 0.0f);
    }

    const Tensor g = uniform({3, 3}, 0, 1, rng);
    const Tensor f = gated_fuse(t, n, g);
    for (std::size_t i = 0; i < f.size(); ++i) {
        CHECK(f[i] >= std::min(t[i], n[i]) - 1e-6f);
        CHECK(f[i] <= std::max(t[i], n[i]) + 1e-6f);
    }
}

TEST_CASE("gate is one sigmoid per pixel") {
    const CueBundle b = bundle(4);
    const UtcfParams p = UtcfParams::random(small_dims(), 4);
    const ForwardTrace t = utcf_trace(b, p);
    CHECK(t.gate.dims() == std::vector<std::size_t>{6, 7});
    for (float g : t.gate.values()) {
        CHECK(g > 0.0f);
        CHECK(g < 1.0f);
    }
}

TEST_CASE("zero attention silences the output") {
    CueBundle b = bundle(5);
    for (auto& a : b.attention.data()) a = 0.0f;
    {
        const auto result = utcf_forward(b, UtcfParams::random(small_dims(), 5));
        for (float v : result.values()) CHECK(v == 0.0f);
    }
}

TEST_CASE("zero output projection returns attention-weighted residual") {
    CueBundle b = bundle(6);
    for (auto& a : b.attention.data()) a = 1.0f;
    UtcfParams p = UtcfParams::random(small_dims(), 6);
    p.output_projection = ConvSpec::zeros(8, 8, 1, 1);
    CHECK(bit_equal(utcf_forward(b, p), b.texture));
}

TEST_CASE("the gate only sees its own inputs") {
    // Changing the semantic increment or output projection leaves the gate untouched.
    const CueBundle b = bundle(7);
    UtcfParams p = UtcfParams::random(small_dims(), 7);
    const Tensor before = utcf_trace(b, p).gate;
    p.semantic_increment = ConvSpec::zeros(8, 6, 1, 1);
    p.output_projection = ConvSpec::zeros(8, 8, 1, 1);
    p.mu = 0.9;
    CHECK(bit_equal(utcf_trace(b, p).gate, before));
}

TEST_CASE("forward is deterministic and parameter files round trip") {
    const CueBundle b = bundle(8);
    const UtcfParams p = UtcfParams::random(small_dims(), 8);
    const Tensor a = utcf_forward(b, p);
    CHECK(bit_equal(a, utcf_forward(b, p)));

    const auto dir = fixtures::scratch_dir("utcf_params");
    save_params(p, dir);
    const UtcfParams q = load_params(dir);
    CHECK(q.mu == p.mu);
    CHECK(q.dims().channels == 8);
    CHECK(q.dims().semantic_channels == 6);
    CHECK(bit_equal(utcf_forward(b, q), a));
}

TEST_CASE("shape problems are reported") {
    CueBundle b = bundle(9);
    const UtcfParams p = UtcfParams::zeros(small_dims());
    b.normal_raw = Tensor({2, 6, 7});
    CHECK_THROWS_AS(utcf_forward(b, p), ShapeError);

    b = bundle(9);
    b.attention = Tensor({6, 6});
    CHECK_THROWS_AS(utcf_forward(b, p), ShapeError);

    b = bundle(9);
    b.attention[0] = 1.5f;
    CHECK_THROWS_AS(utcf_forward(b, p), std::invalid_argument);

    b = bundle(9);
    b.semantic_raw = Tensor({5, 6, 7});
    CHECK_THROWS_AS(utcf_forward(b, p), ShapeError);

    UtcfParams bad = p;
    bad.gate.collapse = ConvSpec::zeros(1, 4, 1, 1);
    CHECK_THROWS_AS(bad.validate(), ShapeError);
    bad = p;
    bad.mu = 1.5;
    CHECK_THROWS(bad.validate());
}

TEST_CASE("hidden width never drops below one") {
    UtcfDims d;
    d.reduction = 4;
    CHECK(d.hidden(128) == 32);
    CHECK(d.hidden(3) == 1);
}
