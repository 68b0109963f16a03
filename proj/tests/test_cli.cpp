#include <doctest.h>

#include <fstream>

#include "gess/cli.hpp"
#include "gess/config.hpp"
#include "gess/gtf.hpp"
#include "gess/report.hpp"
#include "gess/sdak.hpp"
#include "support/fixtures.hpp"

namespace fs = std::filesystem;
using namespace gess;
using namespace gess::cli;

namespace {

std::string gess_cmd(const std::string& args) { return fixtures::quote(GESS_BINARY) + " " + args; }

fs::path small_config(const fs::path& dir, const std::string& extra = "") {
    const fs::path p = dir / "run.ini";
    std::ofstream(p) << "[utcf]\nchannels = 16\n[sdak]\nborder_margin = 2\nnms_radius = 2\n" << extra;
    return p;
}

}  // namespace

TEST_CASE("config text round trips and rejects unknown keys") {
    RunConfig c;
    c.alpha = 0.25;
    c.stability.gamma = 1.0 / 3.0;
    c.auc_thresholds = {1.0, 2.5, 7.0};
    c.mutual = false;
    c.seed = 123456789012345ULL;
    const RunConfig back = parse_config(dump_config(c));
    CHECK(dump_config(back) == dump_config(c));
    CHECK(back.stability.gamma == c.stability.gamma);
    CHECK(back.seed == c.seed);

    CHECK_THROWS_AS(parse_config("[sdak]\nalpah = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[nope]\nx = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[sdak]\nalpha = abc\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[stability]\nepsilon = 1.0\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[semantic]\nweights = 1, 0.5\n"), ConfigError);
    CHECK(parse_config("# comment only\n\n").top_k == RunConfig{}.top_k);
}

TEST_CASE("config hash ignores parallelism and output location") {
    RunConfig a;
    RunConfig b = a;
    b.jobs = 8;
    b.output_dir = "elsewhere";
    CHECK(config_hash(a) == config_hash(b));
    CHECK(config_hash(a).size() == 16);
    b.alpha = 0.5;
    CHECK(config_hash(a) != config_hash(b));
}

TEST_CASE("extract reports a missing cue by role") {
    const fs::path root = fixtures::scratch_dir("cli_missing");
    fixtures::write_cue_set(root / "in", "img", 16, 12, 12, 1, {"normal"});
    const auto r = fixtures::run_command(gess_cmd("--config " + fixtures::quote(small_config(root)) + " extract " +
                                                  fixtures::quote(root / "in") + " --out " +
                                                  fixtures::quote(root / "out")));
    CHECK(r.exit_code == 2);
    CHECK(r.output.find("normal") != std::string::npos);
}

TEST_CASE("extract on cue maps is deterministic across job counts") {
    const fs::path root = fixtures::scratch_dir("cli_extract");
    fixtures::write_cue_set(root / "in", "a", 16, 20, 24, 2);
    fixtures::write_cue_set(root / "in", "b", 16, 20, 24, 3, {}, true);
    const fs::path cfg = small_config(root);
    for (const char* jobs : {"1", "2"}) {
        const auto r = fixtures::run_command(gess_cmd("--config " + fixtures::quote(cfg) + " --jobs " + jobs +
                                                      " extract " + fixtures::quote(root / "in") + " --out " +
                                                      fixtures::quote(root / (std::string("out") + jobs))));
        INFO(r.output);
        REQUIRE(r.exit_code == 0);
    }
    for (const char* stem : {"a.feat", "b.feat"}) {
        REQUIRE(fs::exists(root / "out1" / stem));
        CHECK(fixtures::read_file(root / "out1" / stem) == fixtures::read_file(root / "out2" / stem));
        const auto f = sdak::read_features(root / "out1" / stem);
        CHECK(f.features.dim == 16);
        CHECK(f.image_width == 24);
        CHECK(f.image_height == 20);
    }
}

TEST_CASE("alpha = beta = 0 reproduces the raw heatmap detections") {
    const fs::path root = fixtures::scratch_dir("cli_identity");
    fixtures::write_cue_set(root / "in", "a", 16, 20, 20, 4);
    const fs::path cfg = small_config(root, "alpha = 0\nbeta = 0\n");
    const auto r = fixtures::run_command(gess_cmd("--config " + fixtures::quote(cfg) + " extract " +
                                                  fixtures::quote(root / "in") + " --out " +
                                                  fixtures::quote(root / "out")));
    REQUIRE(r.exit_code == 0);
    sdak::SdakParams p;
    p.border_margin = 2;
    p.nms_radius = 2;
    const Tensor heat = gtf_read(root / "in" / "a.heat.gtf");
    const auto expected = sdak::extract_keypoints(heat.rank() == 3 ? heat.reshaped({20, 20}) : heat, p);
    const auto got = sdak::read_features(root / "out" / "a.feat").features.keypoints;
    REQUIRE(got.size() == expected.size());
    for (std::size_t i = 0; i < got.size(); ++i) {
        CHECK(got[i].x == expected[i].x);
        CHECK(got[i].y == expected[i].y);
    }
}

TEST_CASE("eval on a self pair and with a missing feature file") {
    const fs::path root = fixtures::scratch_dir("cli_eval");
    const Tensor board = fixtures::jittered_checkerboard(40, 8, 0.0, 0.0, 5);
    fixtures::write_sequence(root / "data", "v_self", board, {board, board},
                             {eval::Homography::identity(), eval::Homography::identity()});
    REQUIRE(fixtures::run_command(gess_cmd("extract " + fixtures::quote(root / "data") + " --out " +
                                           fixtures::quote(root / "feat")))
                .exit_code == 0);
    auto r = fixtures::run_command(gess_cmd("eval " + fixtures::quote(root / "data") + " " +
                                            fixtures::quote(root / "feat") + " --out " +
                                            fixtures::quote(root / "rep")));
    INFO(r.output);
    REQUIRE(r.exit_code == 0);
    CHECK(r.output.find("MMA@3 1.000000") != std::string::npos);
    const auto report = eval::parse_report_json(fixtures::read_file(root / "rep" / "report.json"));
    CHECK(report.aggregate.pair_count == 2);
    CHECK(report.aggregate.mma3 == 1.0);
    CHECK(fs::exists(root / "rep" / "report.csv"));

    fs::remove(root / "feat" / "v_self" / "3.feat");
    r = fixtures::run_command(gess_cmd("eval " + fixtures::quote(root / "data") + " " +
                                       fixtures::quote(root / "feat") + " --format json --out " +
                                       fixtures::quote(root / "rep2")));
    CHECK(r.exit_code == 0);
    CHECK(r.output.find("warning") != std::string::npos);
    CHECK(fs::exists(root / "rep2" / "report.json"));
    CHECK_FALSE(fs::exists(root / "rep2" / "report.csv"));
    CHECK(eval::parse_report_json(fixtures::read_file(root / "rep2" / "report.json")).aggregate.pair_count == 1);

    std::ofstream(root / "feat" / "v_self" / "2.feat") << "garbage";
    CHECK(fixtures::run_command(gess_cmd("eval " + fixtures::quote(root / "data") + " " +
                                         fixtures::quote(root / "feat") + " --out " + fixtures::quote(root / "rep3")))
              .exit_code == 2);
    CHECK(fixtures::run_command(gess_cmd("eval " + fixtures::quote(root / "nowhere") + " " +
                                         fixtures::quote(root / "feat") + " --out " + fixtures::quote(root / "rep4")))
              .exit_code == 2);
}

TEST_CASE("gen-stability") {
    const fs::path root = fixtures::scratch_dir("cli_stability");
    gtf_write(Tensor({9, 11}, 2.0f), root / "flat.depth.gtf");
    auto r = fixtures::run_command(gess_cmd("gen-stability " + fixtures::quote(root / "flat.depth.gtf") + " --out " +
                                            fixtures::quote(root / "rel")));
    REQUIRE(r.exit_code == 0);
    const Tensor flat = gtf_read(root / "rel" / "flat.rel.gtf");
    for (float v : flat.values()) CHECK(v == 1.0f);

    gtf_write(fixtures::smooth_texture(16, 16, 6), root / "tex.gtf");
    r = fixtures::run_command(gess_cmd("gen-stability " + fixtures::quote(root / "tex.gtf") + " --out " +
                                       fixtures::quote(root / "tex_rel.gtf")));
    REQUIRE(r.exit_code == 0);
    const Tensor textured = gtf_read(root / "tex_rel.gtf");
    for (float v : textured.values()) {
        CHECK(v >= 0.2f);
        CHECK(v <= 1.0f);
    }

    std::ofstream(root / "bad.gtf") << "GTF1 nope";
    r = fixtures::run_command(gess_cmd("gen-stability " + fixtures::quote(root / "bad.gtf") + " --out " +
                                       fixtures::quote(root / "x")));
    CHECK(r.exit_code == 2);
}

TEST_CASE("verify and argument errors") {
    CHECK(fixtures::run_command(gess_cmd("verify")).exit_code == 0);
    const auto faulty = fixtures::run_command(gess_cmd("verify --inject-fault"));
    CHECK(faulty.exit_code == 1);
    CHECK(faulty.output.find("FAIL") != std::string::npos);

    CHECK(fixtures::run_command(gess_cmd("")).exit_code == 2);
    CHECK(fixtures::run_command(gess_cmd("frobnicate")).exit_code == 2);
    CHECK(fixtures::run_command(gess_cmd("--jobs 0 verify")).exit_code == 2);
    CHECK(fixtures::run_command(gess_cmd("--help")).exit_code == 0);
    CHECK(fixtures::run_command(gess_cmd("extract /definitely/not/here")).exit_code == 2);
}
