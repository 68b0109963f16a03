#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "gess/oracles.hpp"
#include "gess/sdak.hpp"
#include "support/fixtures.hpp"

using namespace gess;
using namespace gess::sdak;

namespace {

SdakParams with_mask(std::size_t channels) {
    SdakParams p;
    p.mask_conv = ConvSpec::zeros(1, channels, 3, 3);
    return p;
}

Tensor random_map(std::vector<std::size_t> dims, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Tensor t(std::move(dims));
    for (auto& v : t.data()) v = static_cast<float>(u(rng));
    return t;
}

std::set<std::pair<double, double>> locations(const std::vector<Keypoint>& kps) {
    std::set<std::pair<double, double>> out;
    for (const auto& k : kps) out.insert({k.x, k.y});
    return out;
}

}  // namespace

TEST_CASE("semantic mask") {
    SdakParams p = with_mask(4);
    const Tensor m = semantic_mask(random_map({4, 5, 6}, 1), p);
    CHECK(m.dims() == std::vector<std::size_t>{5, 6});
    for (float v : m.values()) CHECK(v == 0.5f);

    p.mask_conv.bias[0] = 30.0f;
    {
        const auto result = semantic_mask(random_map({4, 5, 6}, 1), p);
        for (float v : result.values()) CHECK(v >= 0.999999f);
    }
    p.mask_conv.bias[0] = -30.0f;
    {
        const auto result = semantic_mask(random_map({4, 5, 6}, 1), p);
        for (float v : result.values()) CHECK(v <= 1e-6f);
    }

    p.mask_conv = ConvSpec::zeros(2, 4, 3, 3);
    CHECK_THROWS_AS(semantic_mask(random_map({4, 5, 6}, 1), p), ShapeError);
}

TEST_CASE("reweight gain") {
    const Tensor k = random_map({4, 4}, 2);
    SdakParams p;
    const Tensor out = reweight(k, Tensor({4, 4}, 1.0f), Tensor({4, 4}, 1.0f), p);
    for (std::size_t i = 0; i < k.size(); ++i) CHECK(out[i] == doctest::Approx(3.0 * k[i]));

    p.alpha = 0.7;
    p.beta = 0.3;
    const Tensor mask = random_map({4, 4}, 3);
    const Tensor rel = random_map({4, 4}, 4);
    const Tensor r = reweight(k, mask, rel, p);
    for (std::size_t i = 0; i < k.size(); ++i) {
        CHECK(std::fabs(r[i] - k[i] * (1.0 + 0.7 * mask[i] + 0.3 * rel[i])) <= 1e-6);
    }

    // Reliability at another resolution is resampled first.
    const Tensor coarse({2, 2}, 0.5f);
    const Tensor rc = reweight(k, Tensor({4, 4}, 0.0f), coarse, p);
    for (std::size_t i = 0; i < k.size(); ++i) CHECK(rc[i] == doctest::Approx(k[i] * 1.15));

    CHECK_THROWS_AS(reweight(k, Tensor({3, 4}), rel, p), ShapeError);
}

TEST_CASE("alpha = beta = 0 returns the heatmap bit for bit") {
    SdakParams p;
    p.alpha = 0.0;
    p.beta = 0.0;
    const Tensor k = random_map({6, 6}, 5);
    const Tensor out = reweight(k, random_map({6, 6}, 6), random_map({6, 6}, 7), p);
    CHECK(out.values() == k.values());
}

TEST_CASE("nms keeps window maxima with a row-major tie rule") {
    Tensor single({7, 7}, 0.0f);
    single.at(3, 4) = 0.8f;
    const Tensor kept = nms(single, 2);
    CHECK(kept.at(3, 4) == 0.8f);
    double total = 0.0;
    for (float v : kept.values()) total += v;
    CHECK(total == doctest::Approx(0.8));

    Tensor tie({5, 5}, 0.0f);
    tie.at(2, 1) = 0.5f;
    tie.at(2, 3) = 0.5f;
    const Tensor t = nms(tie, 2);
    CHECK(t.at(2, 1) == 0.5f);
    CHECK(t.at(2, 3) == 0.0f);

    const Tensor map = random_map({20, 17}, 8);
    const Tensor a = nms(map, 3);
    const Tensor b = oracle::nms(map, 3);
    CHECK(a.values() == b.values());
    CHECK_THROWS(nms(map, 0));
}

TEST_CASE("extract_keypoints ordering, threshold, margin and top_k") {
    SdakParams p;
    p.border_margin = 0;
    p.nms_radius = 1;
    CHECK(extract_keypoints(Tensor({6, 6}, 0.0f), p).empty());

    Tensor h({9, 9}, 0.0f);
    h.at(1, 1) = 0.9f;
    h.at(4, 4) = 0.5f;
    h.at(7, 7) = 0.1f;
    p.top_k = 2;
    const auto top = extract_keypoints(h, p);
    REQUIRE(top.size() == 2);
    CHECK(top[0] == Keypoint{1, 1, static_cast<double>(0.9f)});
    CHECK(top[1] == Keypoint{4, 4, static_cast<double>(0.5f)});

    p.top_k = 10;
    p.score_threshold = 0.3;
    CHECK(extract_keypoints(h, p).size() == 2);
    p.score_threshold = 0.0;
    p.border_margin = 2;
    const auto inner = extract_keypoints(h, p);
    REQUIRE(inner.size() == 1);
    CHECK(inner[0].x == 4.0);

    // Equal scores: y then x ascending.
    Tensor flat({9, 9}, 0.0f);
    flat.at(6, 2) = 0.4f;
    flat.at(2, 6) = 0.4f;
    flat.at(2, 2) = 0.4f;
    p.border_margin = 0;
    const auto tied = extract_keypoints(flat, p);
    REQUIRE(tied.size() == 3);
    CHECK((tied[0].x == 2 && tied[0].y == 2));
    CHECK((tied[1].x == 6 && tied[1].y == 2));
    CHECK((tied[2].x == 2 && tied[2].y == 6));

    const Tensor random = random_map({24, 24}, 9);
    SdakParams q;
    q.score_threshold = 0.25;
    q.nms_radius = 2;
    q.border_margin = 3;
    q.top_k = 7;
    CHECK(extract_keypoints(random, q) == oracle::extract_keypoints(random, q));
}

TEST_CASE("a constant mask does not change the keypoint set") {
    const Tensor heat = random_map({16, 16}, 10);
    const Tensor rel = Tensor({16, 16}, 0.6f);
    SdakParams base;
    base.border_margin = 2;
    base.nms_radius = 2;
    SdakParams zero = base;
    zero.alpha = zero.beta = 0.0;
    const auto reference = locations(extract_keypoints(heat, zero));
    for (double alpha : {0.5, 1.0, 2.0}) {
        base.alpha = alpha;
        base.beta = 1.0;
        const auto kps = extract_keypoints(reweight(heat, Tensor({16, 16}, 0.5f), rel, base), base);
        CHECK(locations(kps) == reference);
    }
}

TEST_CASE("sample_descriptors") {
    Tensor map({3, 2, 3});
    for (std::size_t i = 0; i < map.size(); ++i) map[i] = static_cast<float>(i + 1);
    const DescriptorSet at_pixel = sample_descriptors(map, {{2, 1, 0.0}});
    double n = 0.0;
    for (std::size_t c = 0; c < 3; ++c) n += map.at(c, 1, 2) * map.at(c, 1, 2);
    for (std::size_t c = 0; c < 3; ++c) {
        CHECK(at_pixel.descriptors[0][c] == doctest::Approx(map.at(c, 1, 2) / std::sqrt(n)));
    }

    const DescriptorSet constant = sample_descriptors(Tensor({4, 3, 3}, 2.0f), {{1.3, 0.7, 0.0}});
    for (float v : constant.descriptors[0]) CHECK(v == doctest::Approx(0.5));

    Tensor two({2, 1, 2}, std::vector<float>{1, 0, 0, 1});
    const auto mid = sample_descriptors(two, {{0.5, 0, 0.0}});
    CHECK(mid.descriptors[0][0] == doctest::Approx(std::sqrt(0.5)));
    CHECK(mid.descriptors[0][1] == doctest::Approx(std::sqrt(0.5)));

    const auto zero = sample_descriptors(Tensor({3, 2, 2}, 0.0f), {{0, 0, 0.0}});
    CHECK(zero.descriptors[0] == std::vector<float>{1.0f, 0.0f, 0.0f});

    CHECK_THROWS_AS(sample_descriptors(map, {{2.5, 0, 0.0}}), std::out_of_range);
    CHECK_THROWS_AS(sample_descriptors(map, {{0, -0.1, 0.0}}), std::out_of_range);

    const Tensor random = random_map({16, 9, 9}, 11);
    std::vector<Keypoint> kps;
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(0.0, 8.0);
    for (int i = 0; i < 30; ++i) kps.push_back({u(rng), u(rng), 1.0});
    for (const auto& d : sample_descriptors(random, kps).descriptors) {
        double norm = 0.0;
        for (float v : d) norm += static_cast<double>(v) * v;
        CHECK(std::fabs(std::sqrt(norm) - 1.0) <= 1e-6);
    }
}

TEST_CASE("feature files round trip") {
    FeatureFile f;
    f.image_width = 40;
    f.image_height = 30;
    f.features = sample_descriptors(random_map({8, 30, 40}, 13), {{3, 4, 0.75}, {10.5, 20.25, 0.5}});
    const auto dir = fixtures::scratch_dir("features");
    write_features(f, dir / "a.feat");
    const FeatureFile g = read_features(dir / "a.feat");
    CHECK(g.image_width == 40);
    CHECK(g.image_height == 30);
    CHECK(g.features.dim == 8);
    CHECK(g.features.keypoints == f.features.keypoints);
    CHECK(g.features.descriptors == f.features.descriptors);

    FeatureFile empty;
    empty.features.dim = 8;
    empty.image_width = 5;
    empty.image_height = 6;
    const auto bytes = encode_features(empty);
    CHECK(bytes.back() == '\n');
    const FeatureFile e = decode_features(bytes);
    CHECK(e.features.size() == 0);
    CHECK(e.features.dim == 8);

    auto corrupt = encode_features(f);
    corrupt.pop_back();
    CHECK_THROWS(decode_features(corrupt));
    std::vector<std::uint8_t> headerless{'{', '}'};
    CHECK_THROWS(decode_features(headerless));
}
