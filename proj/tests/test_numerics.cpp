#include <doctest.h>

#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

#include "gess/gtf.hpp"
#include "gess/numerics.hpp"
#include "gess/oracles.hpp"
#include "support/fixtures.hpp"

using namespace gess;

namespace {

Tensor random_tensor(std::mt19937_64& rng, std::vector<std::size_t> dims) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Tensor t(std::move(dims));
    for (auto& v : t.data()) v = static_cast<float>(u(rng));
    return t;
}

bool bit_equal(const Tensor& a, const Tensor& b) {
    return a.dims() == b.dims() && std::memcmp(a.data().data(), b.data().data(), a.size() * sizeof(float)) == 0;
}

}  // namespace

TEST_CASE("tensor rejects zero extents and mismatched data") {
    CHECK_THROWS_AS(Tensor({2, 0}), std::invalid_argument);
    CHECK_THROWS_AS(Tensor({2, 2}, std::vector<float>{1, 2, 3}), std::invalid_argument);
    const Tensor t({2, 3}, std::vector<float>{0, 1, 2, 3, 4, 5});
    CHECK(t.at(1, 2) == 5.0f);
    CHECK(t.reshaped({3, 2}).at(2, 1) == 5.0f);
}

TEST_CASE("conv2d with a 1x1 unit kernel is the identity") {
    std::mt19937_64 rng(1);
    const Tensor input = random_tensor(rng, {1, 5, 4});
    ConvSpec spec = ConvSpec::zeros(1, 1, 1, 1);
    spec.kernel[0] = 1.0f;
    CHECK(bit_equal(conv2d(input, spec), input));
}

TEST_CASE("conv2d box filter counts padded neighbours") {
    ConvSpec spec = ConvSpec::zeros(1, 1, 3, 3);
    for (auto& v : spec.kernel.data()) v = 1.0f;
    const Tensor out = conv2d(Tensor({1, 3, 3}, 1.0f), spec);
    CHECK(out.at(0, 1, 1) == 9.0f);
    CHECK(out.at(0, 0, 0) == 4.0f);
    CHECK(out.at(0, 2, 2) == 4.0f);
    CHECK(out.at(0, 0, 1) == 6.0f);
}

TEST_CASE("conv2d matches the nested-loop oracle on a 2-channel 8x8 input") {
    std::mt19937_64 rng(2);
    const Tensor input = random_tensor(rng, {2, 8, 8});
    ConvSpec spec = ConvSpec::zeros(4, 2, 3, 3);
    spec.kernel = random_tensor(rng, {4, 2, 3, 3});
    spec.bias = random_tensor(rng, {4});
    const Tensor a = conv2d(input, spec);
    const Tensor b = oracle::conv2d(input, spec);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::fabs(a[i] - b[i]) <= 1e-5);
}

TEST_CASE("conv2d shape errors name the axis") {
    const Tensor input({3, 4, 4});
    const ConvSpec spec = ConvSpec::zeros(1, 2, 3, 3);
    try {
        (void)conv2d(input, spec);
        FAIL("expected a shape error");
    } catch (const ShapeError& e) {
        CHECK(std::string(e.what()).find("channel axis (0)") != std::string::npos);
    }
    ConvSpec strided = ConvSpec::zeros(1, 3, 3, 3);
    strided.stride = 2;
    strided.padding = 0;
    CHECK_THROWS_AS((void)conv2d(Tensor({3, 6, 5}), strided), ShapeError);
}

TEST_CASE("activate sigmoid and relu") {
    const Tensor x({4}, std::vector<float>{0.0f, -3.2f, 3.2f, 2.0f});
    const Tensor s = activate(x, Activation::sigmoid);
    const Tensor r = activate(x, Activation::relu);
    CHECK(s[0] == doctest::Approx(0.5));
    CHECK(s[3] == doctest::Approx(0.880797077978).epsilon(1e-6));
    CHECK(r[1] == 0.0f);
    CHECK(r[2] == 3.2f);
    for (double a = -8.0; a < 8.0; a += 0.25) CHECK(sigmoid(a) < sigmoid(a + 0.25));
}

TEST_CASE("global_avg_pool") {
    CHECK(global_avg_pool(Tensor({1, 3, 3}, 7.0f))[0] == 7.0f);
    CHECK(global_avg_pool(Tensor({1, 2, 2}, std::vector<float>{0, 1, 2, 3}))[0] == 1.5f);
    std::mt19937_64 rng(3);
    const Tensor t = random_tensor(rng, {3, 5, 5});
    const Tensor pooled = global_avg_pool(t);
    for (std::size_t c = 0; c < 3; ++c) {
        double sum = 0.0;
        for (std::size_t y = 0; y < 5; ++y) {
            for (std::size_t x = 0; x < 5; ++x) sum += t.at(c, y, x);
        }
        CHECK(std::fabs(pooled[c] - sum / 25.0) <= 1e-6);
    }
}

TEST_CASE("batch_norm identity passes values through") {
    std::mt19937_64 rng(4);
    const Tensor t = random_tensor(rng, {3, 4, 4});
    const Tensor out = batch_norm(t, BatchNorm::identity(3));
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(std::fabs(out[i] - t[i]) <= 1e-7);
}

TEST_CASE("bilinear_resample") {
    std::mt19937_64 rng(5);
    const Tensor t = random_tensor(rng, {2, 5, 6});
    CHECK(bit_equal(bilinear_resample(t, 5, 6), t));

    const Tensor row = bilinear_resample(Tensor({1, 1, 2}, std::vector<float>{0, 1}), 1, 3);
    CHECK(row[0] == 0.0f);
    CHECK(row[1] == 0.5f);
    CHECK(row[2] == 1.0f);

    const Tensor src = random_tensor(rng, {1, 4, 4});
    const Tensor up = bilinear_resample(src, 7, 7);
    const Tensor ref = oracle::bilinear_resample(src, 7, 7);
    for (std::size_t i = 0; i < up.size(); ++i) CHECK(std::fabs(up[i] - ref[i]) <= 1e-6);

    // A single output sample reads the centre.
    const Tensor centre = bilinear_resample(Tensor({1, 1, 3}, std::vector<float>{0, 4, 8}), 1, 1);
    CHECK(centre[0] == 4.0f);
}

TEST_CASE("finite_diff_gradient on polynomials") {
    const auto sq = [](const Tensor64& x) {
        double s = 0.0;
        for (double v : x.values()) s += v * v;
        return s;
    };
    const Tensor64 g = finite_diff_gradient(sq, Tensor64({2}, std::vector<double>{1.0, 2.0}), 1e-4);
    CHECK(std::fabs(g[0] - 2.0) <= 1e-9);
    CHECK(std::fabs(g[1] - 4.0) <= 1e-9);

    const Tensor64 z = finite_diff_gradient([](const Tensor64&) { return 3.0; }, Tensor64({3}, 1.0), 1e-3);
    for (double v : z.values()) CHECK(v == 0.0);

    // Degree-2 polynomial with cross terms, both stencils.
    const auto quad = [](const Tensor64& x) { return 3 * x[0] * x[0] - 2 * x[0] * x[1] + x[1] + 5; };
    for (auto stencil : {FdStencil::central3, FdStencil::central5}) {
        const Tensor64 q = finite_diff_gradient(quad, Tensor64({2}, std::vector<double>{0.3, -1.1}), 1e-3, stencil);
        CHECK(std::fabs(q[0] - (6 * 0.3 + 2 * 1.1)) <= 1e-9);
        CHECK(std::fabs(q[1] - (-2 * 0.3 + 1)) <= 1e-9);
    }

    CHECK_THROWS_AS(finite_diff_gradient([](const Tensor64& x) { return std::log(x[0]); },
                                         Tensor64({1}, 0.0), 1e-3),
                    std::domain_error);
}

TEST_CASE("gtf round trip is bit-exact") {
    std::mt19937_64 rng(6);
    const Tensor t = random_tensor(rng, {3, 17, 13});
    const auto dir = fixtures::scratch_dir("gtf");
    gtf_write(t, dir / "t.gtf");
    CHECK(bit_equal(gtf_read(dir / "t.gtf"), t));

    for (const auto& dims : std::vector<std::vector<std::size_t>>{{1}, {1, 1, 1, 1}, {7, 1}, {1, 9, 1}}) {
        const Tensor s = random_tensor(rng, dims);
        CHECK(bit_equal(gtf_decode(gtf_encode(s)), s));
    }
}

TEST_CASE("gtf encodes the documented byte layout") {
    const Tensor t({2}, std::vector<float>{1.0f, -2.0f});
    const auto bytes = gtf_encode(t);
    REQUIRE(bytes.size() == 4 + 1 + 1 + 4 + 8);
    CHECK(std::string(bytes.begin(), bytes.begin() + 4) == "GTF1");
    CHECK(bytes[4] == 0x01);
    CHECK(bytes[5] == 1);
    CHECK(bytes[6] == 2);
    CHECK(bytes[7] == 0);
    // 1.0f little-endian.
    CHECK(bytes[10] == 0x00);
    CHECK(bytes[13] == 0x3f);
    CHECK(bytes[17] == 0xc0);
}

TEST_CASE("gtf malformed inputs raise distinct kinds") {
    const auto good = gtf_encode(Tensor({2, 2}, 1.0f));
    auto kind_of = [](std::vector<std::uint8_t> bytes) {
        try {
            (void)gtf_decode(bytes);
        } catch (const GtfError& e) {
            return e.kind();
        }
        return GtfErrorKind::io;
    };
    auto magic = good;
    magic[0] = 'X';
    CHECK(kind_of(magic) == GtfErrorKind::bad_magic);
    auto dtype = good;
    dtype[4] = 0x02;
    CHECK(kind_of(dtype) == GtfErrorKind::bad_dtype);
    auto rank = good;
    rank[5] = 5;
    CHECK(kind_of(rank) == GtfErrorKind::bad_rank);
    auto truncated = std::vector<std::uint8_t>(good.begin(), good.begin() + 14);
    CHECK(kind_of(truncated) == GtfErrorKind::truncated_payload);
    auto trailing = good;
    trailing.push_back(0);
    CHECK(kind_of(trailing) == GtfErrorKind::trailing_bytes);
    auto zero = good;
    zero[6] = zero[7] = zero[8] = zero[9] = 0;
    CHECK(kind_of(zero) == GtfErrorKind::bad_extent);
    // Four extents of 2^32-1 overflow the element count.
    std::vector<std::uint8_t> huge{'G', 'T', 'F', '1', 0x01, 4};
    for (int i = 0; i < 16; ++i) huge.push_back(0xff);
    CHECK(kind_of(huge) == GtfErrorKind::dim_overflow);

    CHECK_THROWS_AS(gtf_read("/nonexistent/file.gtf"), GtfError);
}

TEST_CASE("concat_channels stacks along the channel axis") {
    const Tensor a({1, 2, 2}, 1.0f);
    const Tensor b({2, 2, 2}, 2.0f);
    const Tensor c = concat_channels({&a, &b});
    CHECK(c.dims() == std::vector<std::size_t>{3, 2, 2});
    CHECK(c.at(0, 1, 1) == 1.0f);
    CHECK(c.at(2, 0, 0) == 2.0f);
    const Tensor wrong({1, 3, 2});
    CHECK_THROWS_AS(concat_channels({&a, &wrong}), ShapeError);
}
