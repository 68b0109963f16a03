#include "gess/gtf.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>
#include <limits>

namespace gess {

static_assert(std::endian::native == std::endian::little, "GTF I/O assumes a little-endian host");
static_assert(sizeof(float) == 4);

const char* to_string(GtfErrorKind kind) {
    switch (kind) {
        case GtfErrorKind::io: return "io error";
        case GtfErrorKind::bad_magic: return "bad magic";
        case GtfErrorKind::bad_dtype: return "bad dtype";
        case GtfErrorKind::bad_rank: return "bad rank";
        case GtfErrorKind::bad_extent: return "bad extent";
        case GtfErrorKind::dim_overflow: return "dim product overflow";
        case GtfErrorKind::truncated_payload: return "truncated payload";
        case GtfErrorKind::trailing_bytes: return "trailing bytes";
    }
    return "unknown";
}

GtfError::GtfError(GtfErrorKind kind, const std::string& detail)
    : std::runtime_error(std::string(to_string(kind)) + (detail.empty() ? "" : ": " + detail)),
      kind_(kind) {}

namespace {

constexpr char kMagic[4] = {'G', 'T', 'F', '1'};
constexpr std::size_t kFixedHeader = 6;

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(std::span<const std::uint8_t> b, std::size_t off) {
    return static_cast<std::uint32_t>(b[off]) | static_cast<std::uint32_t>(b[off + 1]) << 8 |
           static_cast<std::uint32_t>(b[off + 2]) << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

}  // namespace

std::vector<std::uint8_t> gtf_encode(const Tensor& t) {
    if (t.rank() < 1 || t.rank() > 4) {
        throw GtfError(GtfErrorKind::bad_rank, "rank " + std::to_string(t.rank()) + " not in 1..4");
    }
    std::vector<std::uint8_t> out;
    out.reserve(kFixedHeader + 4 * t.rank() + 4 * t.size());
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    out.push_back(kGtfDtypeF32);
    out.push_back(static_cast<std::uint8_t>(t.rank()));
    for (std::size_t d : t.dims()) {
        if (d > std::numeric_limits<std::uint32_t>::max()) {
            throw GtfError(GtfErrorKind::bad_extent, "extent does not fit in u32");
        }
        put_u32(out, static_cast<std::uint32_t>(d));
    }
    const std::size_t off = out.size();
    out.resize(off + 4 * t.size());
    std::memcpy(out.data() + off, t.data().data(), 4 * t.size());
    return out;
}

Tensor gtf_decode(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw GtfError(GtfErrorKind::bad_magic, "");
    }
    if (bytes.size() < kFixedHeader) {
        throw GtfError(GtfErrorKind::truncated_payload, "header incomplete");
    }
    if (bytes[4] != kGtfDtypeF32) {
        throw GtfError(GtfErrorKind::bad_dtype, "dtype code " + std::to_string(bytes[4]));
    }
    const std::size_t rank = bytes[5];
    if (rank < 1 || rank > 4) {
        throw GtfError(GtfErrorKind::bad_rank, "rank " + std::to_string(rank));
    }
    if (bytes.size() < kFixedHeader + 4 * rank) {
        throw GtfError(GtfErrorKind::truncated_payload, "extents incomplete");
    }
    std::vector<std::size_t> dims(rank);
    std::size_t count = 1;
    for (std::size_t i = 0; i < rank; ++i) {
        dims[i] = get_u32(bytes, kFixedHeader + 4 * i);
        if (dims[i] == 0) {
            throw GtfError(GtfErrorKind::bad_extent, "extent " + std::to_string(i) + " is zero");
        }
        // Overflow is judged against what the payload byte count can address.
        if (count > std::numeric_limits<std::size_t>::max() / 4 / dims[i]) {
            throw GtfError(GtfErrorKind::dim_overflow, "");
        }
        count *= dims[i];
    }
    const std::size_t off = kFixedHeader + 4 * rank;
    const std::size_t payload = bytes.size() - off;
    if (payload < 4 * count) {
        throw GtfError(GtfErrorKind::truncated_payload, "expected " + std::to_string(4 * count) +
                                                            " bytes, found " + std::to_string(payload));
    }
    if (payload > 4 * count) {
        throw GtfError(GtfErrorKind::trailing_bytes,
                       std::to_string(payload - 4 * count) + " extra bytes");
    }
    std::vector<float> data(count);
    std::memcpy(data.data(), bytes.data() + off, 4 * count);
    return Tensor(std::move(dims), std::move(data));
}

void gtf_write(const Tensor& t, const std::filesystem::path& path) {
    const auto bytes = gtf_encode(t);
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) {
        throw GtfError(GtfErrorKind::io, "cannot open " + path.string() + " for writing");
    }
    os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!os) {
        throw GtfError(GtfErrorKind::io, "write failed for " + path.string());
    }
}

Tensor gtf_read(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) {
        throw GtfError(GtfErrorKind::io, "cannot open " + path.string());
    }
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
    return gtf_decode(bytes);
}

}  // namespace gess
