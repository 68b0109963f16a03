#include "fixtures.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>
#include <sys/wait.h>

#include "gess/gtf.hpp"
#include "gess/image_io.hpp"

namespace fs = std::filesystem;

namespace gess::fixtures {

namespace {

std::uint64_t cell_hash(long cx, long cy, std::uint64_t seed) {
    std::uint64_t h = seed * 0x9e3779b97f4a7c15ULL;
    h ^= static_cast<std::uint64_t>(cx + 1000) * 0xbf58476d1ce4e5b9ULL;
    h ^= static_cast<std::uint64_t>(cy + 1000) * 0x94d049bb133111ebULL;
    h ^= h >> 31;
    h *= 0xd6e8feb86659fd93ULL;
    return h ^ (h >> 29);
}

}  // namespace

Tensor jittered_checkerboard(std::size_t size, std::size_t cell, double shift_x, double shift_y,
                             std::uint64_t seed) {
    Tensor img({size, size});
    for (std::size_t y = 0; y < size; ++y) {
        for (std::size_t x = 0; x < size; ++x) {
            const double sx = static_cast<double>(x) - shift_x;
            const double sy = static_cast<double>(y) - shift_y;
            const auto cx = static_cast<long>(std::floor(sx / static_cast<double>(cell)));
            const auto cy = static_cast<long>(std::floor(sy / static_cast<double>(cell)));
            const bool dark = ((cx + cy) % 2 + 2) % 2 == 0;
            const double jitter = static_cast<double>(cell_hash(cx, cy, seed) % 1000) / 1000.0;
            img.at(y, x) = static_cast<float>(dark ? 0.05 + 0.3 * jitter : 0.65 + 0.3 * jitter);
        }
    }
    return img;
}

Tensor smooth_texture(std::size_t h, std::size_t w, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::array<std::array<double, 4>, 4> waves{};
    for (auto& wv : waves) wv = {u(rng) * 0.5, u(rng) * 0.5, u(rng) * 6.28, 0.5 + u(rng)};
    Tensor t({h, w});
    for (std::size_t y = 0; y < h; ++y) {
        for (std::size_t x = 0; x < w; ++x) {
            double v = 0.0;
            for (const auto& wv : waves) v += wv[3] * std::sin(wv[0] * x + wv[1] * y + wv[2]);
            t.at(y, x) = static_cast<float>(0.5 + v / 8.0);
        }
    }
    return t;
}

void write_sequence(const fs::path& root, const std::string& name, const Tensor& reference,
                    const std::vector<Tensor>& targets, const std::vector<eval::Homography>& homographies) {
    const fs::path dir = root / name;
    fs::create_directories(dir);
    image::write_pnm(reference, dir / "1.pgm");
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const std::string k = std::to_string(i + 2);
        image::write_pnm(targets[i], dir / (k + ".pgm"));
        std::ofstream os(dir / ("H_1_" + k));
        const auto& v = homographies[i].values();
        char buf[64];
        for (std::size_t r = 0; r < 3; ++r) {
            for (std::size_t c = 0; c < 3; ++c) {
                std::snprintf(buf, sizeof buf, "%.17g", v[3 * r + c]);
                os << buf << (c == 2 ? "\n" : " ");
            }
        }
    }
}

void write_cue_set(const fs::path& dir, const std::string& stem, std::size_t channels, std::size_t h,
                   std::size_t w, std::uint64_t seed, const std::vector<std::string>& omit,
                   bool with_reliability) {
    fs::create_directories(dir);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    auto fill = [&](std::vector<std::size_t> dims, double lo, double hi) {
        Tensor t(std::move(dims));
        for (auto& v : t.data()) v = static_cast<float>(lo + (hi - lo) * u(rng));
        return t;
    };
    auto put = [&](const std::string& role, const Tensor& t) {
        for (const auto& o : omit) {
            if (o == role) return;
        }
        gtf_write(t, dir / (stem + "." + role + ".gtf"));
    };
    put("desc", fill({channels, h, w}, -1.0, 1.0));
    put("normal", fill({3, h, w}, -1.0, 1.0));
    put("sem", fill({4, h, w}, 0.0, 1.0));
    put("attn", fill({h, w}, 0.5, 1.0));
    put("heat", fill({h, w}, 0.0, 1.0));
    if (with_reliability) {
        put("rel", fill({h, w}, 0.2, 1.0));
    } else {
        put("depth", smooth_texture(h, w, seed + 1));
    }
}

fs::path scratch_dir(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("gess_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string read_file(const fs::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot read " + path.string());
    std::ostringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

ProcessResult run_command(const std::string& command_line) {
    ProcessResult r;
    FILE* pipe = popen((command_line + " 2>&1").c_str(), "r");
    if (pipe == nullptr) throw std::runtime_error("popen failed for " + command_line);
    char buf[4096];
    std::size_t n = 0;
    while ((n = std::fread(buf, 1, sizeof buf, pipe)) > 0) r.output.append(buf, n);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::string quote(const fs::path& p) {
    std::string out = "'";
    for (char ch : p.string()) {
        if (ch == '\'') {
            out += "'\\''";
        } else {
            out += ch;
        }
    }
    return out + "'";
}

}  // namespace gess::fixtures
