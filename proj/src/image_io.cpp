#include "gess/image_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include <png.h>

namespace gess::image {

namespace {

float luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
    return static_cast<float>((0.299 * r + 0.587 * g + 0.114 * b) / 255.0);
}

std::uint8_t quantize(float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
}

std::string lower_ext(const std::filesystem::path& p) {
    std::string ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext;
}

// Reads the next header token of a PNM file, skipping whitespace and comments.
std::string pnm_token(std::istream& is) {
    std::string tok;
    char c = 0;
    while (is.get(c)) {
        if (c == '#') {
            std::string ignored;
            std::getline(is, ignored);
            continue;
        }
        if (std::isspace(static_cast<unsigned char>(c))) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(c);
    }
    return tok;
}

Tensor read_pnm(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ImageError("cannot open " + path.string());
    const std::string magic = pnm_token(is);
    if (magic != "P5" && magic != "P6") {
        throw ImageError(path.string() + ": unsupported PNM type '" + magic + "'");
    }
    std::size_t w = 0;
    std::size_t h = 0;
    int maxval = 0;
    try {
        w = std::stoul(pnm_token(is));
        h = std::stoul(pnm_token(is));
        maxval = std::stoi(pnm_token(is));
    } catch (const std::exception&) {
        throw ImageError(path.string() + ": malformed PNM header");
    }
    if (w == 0 || h == 0 || maxval != 255) {
        throw ImageError(path.string() + ": only 8-bit PNM with non-zero extents is supported");
    }
    const std::size_t channels = magic == "P6" ? 3 : 1;
    std::vector<std::uint8_t> raw(w * h * channels);
    is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (static_cast<std::size_t>(is.gcount()) != raw.size()) {
        throw ImageError(path.string() + ": truncated pixel data");
    }
    Tensor out({h, w});
    for (std::size_t i = 0; i < w * h; ++i) {
        out[i] = channels == 3 ? luma(raw[3 * i], raw[3 * i + 1], raw[3 * i + 2])
                               : static_cast<float>(raw[i] / 255.0);
    }
    return out;
}

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f != nullptr) std::fclose(f);
    }
};
using FilePtr = std::unique_ptr<std::FILE, FileCloser>;

Tensor read_png(const std::filesystem::path& path) {
    FilePtr file(std::fopen(path.c_str(), "rb"));
    if (!file) throw ImageError("cannot open " + path.string());
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError("libpng initialisation failed");
    }
    std::vector<std::uint8_t> pixels;
    std::vector<png_bytep> rows;
    png_uint_32 w = 0;
    png_uint_32 h = 0;
    int color = 0;
    int depth = 0;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError(path.string() + ": PNG decode failed");
    }
    png_init_io(png, file.get());
    png_read_info(png, info);
    png_get_IHDR(png, info, &w, &h, &depth, &color, nullptr, nullptr, nullptr);
    const bool supported = depth == 8 && (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_RGB);
    if (!supported) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw ImageError(path.string() + ": only 8-bit grayscale or RGB PNG is supported");
    }
    const std::size_t channels = color == PNG_COLOR_TYPE_RGB ? 3 : 1;
    pixels.resize(static_cast<std::size_t>(w) * h * channels);
    rows.resize(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = pixels.data() + static_cast<std::size_t>(y) * w * channels;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Tensor out({h, w});
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = channels == 3 ? luma(pixels[3 * i], pixels[3 * i + 1], pixels[3 * i + 2])
                               : static_cast<float>(pixels[i] / 255.0);
    }
    return out;
}

struct Interleaved {
    std::size_t width;
    std::size_t height;
    std::size_t channels;
    std::vector<std::uint8_t> bytes;
};

Interleaved interleave(const Tensor& image) {
    if (image.rank() == 2) {
        Interleaved out{image.dim(1), image.dim(0), 1, {}};
        for (float v : image.data()) out.bytes.push_back(quantize(v));
        return out;
    }
    if (image.rank() == 3 && image.dim(0) == 3) {
        Interleaved out{image.dim(2), image.dim(1), 3, {}};
        const std::size_t plane = out.width * out.height;
        for (std::size_t i = 0; i < plane; ++i) {
            for (std::size_t c = 0; c < 3; ++c) out.bytes.push_back(quantize(image[c * plane + i]));
        }
        return out;
    }
    throw ImageError("image tensors must be [H,W] or [3,H,W]");
}

}  // namespace

bool is_image_file(const std::filesystem::path& path) {
    const std::string ext = lower_ext(path);
    return ext == ".png" || ext == ".ppm" || ext == ".pgm" || ext == ".pnm";
}

Tensor read_luma(const std::filesystem::path& path) {
    const std::string ext = lower_ext(path);
    if (ext == ".png") return read_png(path);
    if (ext == ".ppm" || ext == ".pgm" || ext == ".pnm") return read_pnm(path);
    throw ImageError(path.string() + ": unsupported image extension");
}

void write_pnm(const Tensor& image, const std::filesystem::path& path) {
    const Interleaved px = interleave(image);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) throw ImageError("cannot write " + path.string());
    os << (px.channels == 3 ? "P6" : "P5") << '\n' << px.width << ' ' << px.height << "\n255\n";
    os.write(reinterpret_cast<const char*>(px.bytes.data()), static_cast<std::streamsize>(px.bytes.size()));
}

void write_png(const Tensor& image, const std::filesystem::path& path) {
    Interleaved px = interleave(image);
    FilePtr file(std::fopen(path.c_str(), "wb"));
    if (!file) throw ImageError("cannot write " + path.string());
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
    if (png == nullptr || info == nullptr) {
        png_destroy_write_struct(&png, &info);
        throw ImageError("libpng initialisation failed");
    }
    std::vector<png_bytep> rows(px.height);
    for (std::size_t y = 0; y < px.height; ++y) rows[y] = px.bytes.data() + y * px.width * px.channels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw ImageError(path.string() + ": PNG encode failed");
    }
    png_init_io(png, file.get());
    png_set_IHDR(png, info, static_cast<png_uint_32>(px.width), static_cast<png_uint_32>(px.height), 8,
                 px.channels == 3 ? PNG_COLOR_TYPE_RGB : PNG_COLOR_TYPE_GRAY, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, rows.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace gess::image
