#include "binio.hpp"

#include <zlib.h>

#include <fstream>

namespace edet::binio {

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    // zlib takes uInt lengths; feed in chunks to stay safe on huge buffers
    std::size_t off = 0;
    while (off < bytes.size()) {
        std::size_t chunk = std::min<std::size_t>(bytes.size() - off, 1u << 30);
        crc = ::crc32(crc, bytes.data() + off, static_cast<uInt>(chunk));
        off += chunk;
    }
    return static_cast<std::uint32_t>(crc);
}

void Writer::name(std::string_view s) {
    if (s.size() > 255)
        throw ShapeError("tensor name too long");
    u8(static_cast<std::uint8_t>(s.size()));
    raw(s.data(), s.size());
}

void Writer::tensor_f32(std::string_view nm, std::span<const std::uint32_t> dims,
                        std::span<const float> data) {
    name(nm);
    if (dims.size() > 255)
        throw ShapeError("too many tensor dims");
    u8(static_cast<std::uint8_t>(dims.size()));
    std::size_t n = 1;
    for (auto d : dims) {
        u32(d);
        n *= d;
    }
    if (n != data.size())
        throw ShapeError("tensor data does not match dims");
    raw(data.data(), data.size() * sizeof(float));
}

void Writer::tensor(std::string_view nm, const Mat& m) {
    std::vector<float> data(static_cast<std::size_t>(m.size()));
    for (Eigen::Index i = 0; i < m.size(); ++i)
        data[static_cast<std::size_t>(i)] = static_cast<float>(m.data()[i]);
    std::uint32_t dims[2] = {static_cast<std::uint32_t>(m.rows()),
                             static_cast<std::uint32_t>(m.cols())};
    tensor_f32(nm, dims, data);
}

void Writer::tensor(std::string_view nm, const Vec& v) {
    std::vector<float> data(static_cast<std::size_t>(v.size()));
    for (Eigen::Index i = 0; i < v.size(); ++i)
        data[static_cast<std::size_t>(i)] = static_cast<float>(v[i]);
    std::uint32_t dims[1] = {static_cast<std::uint32_t>(v.size())};
    tensor_f32(nm, dims, data);
}

void Writer::tensor_scalar(std::string_view nm, double v) {
    Vec one(1);
    one[0] = v;
    tensor(nm, one);
}

std::size_t TensorRecord::elem_count() const {
    std::size_t n = 1;
    for (auto d : dims)
        n *= d;
    return n;
}

std::uint8_t Reader::u8() {
    need(1);
    return buf_[pos_++];
}

std::uint16_t Reader::u16() {
    need(2);
    std::uint16_t v;
    std::memcpy(&v, buf_.data() + pos_, 2);
    pos_ += 2;
    return v;
}

std::uint32_t Reader::u32() {
    need(4);
    std::uint32_t v;
    std::memcpy(&v, buf_.data() + pos_, 4);
    pos_ += 4;
    return v;
}

std::uint64_t Reader::u64() {
    need(8);
    std::uint64_t v;
    std::memcpy(&v, buf_.data() + pos_, 8);
    pos_ += 8;
    return v;
}

float Reader::f32() {
    need(4);
    float v;
    std::memcpy(&v, buf_.data() + pos_, 4);
    pos_ += 4;
    return v;
}

void Reader::bytes(void* p, std::size_t n) {
    need(n);
    std::memcpy(p, buf_.data() + pos_, n);
    pos_ += n;
}

std::string Reader::name() {
    std::size_t n = u8();
    need(n);
    std::string s(reinterpret_cast<const char*>(buf_.data() + pos_), n);
    pos_ += n;
    return s;
}

TensorRecord Reader::tensor() {
    TensorRecord rec;
    rec.name = name();
    std::size_t ndims = u8();
    rec.dims.resize(ndims);
    std::size_t n = 1;
    for (auto& d : rec.dims) {
        d = u32();
        n *= d;
        if (n > (1u << 28))
            throw ModelIoError(ModelIoErrc::bad_shape,
                               "tensor '" + rec.name + "' implausibly large");
    }
    rec.data.resize(n);
    bytes(rec.data.data(), n * sizeof(float));
    return rec;
}

void Reader::verify_crc_trailer() {
    if (remaining() < 4)
        throw ModelIoError(ModelIoErrc::truncated, "missing CRC trailer");
    if (remaining() > 4)
        throw ModelIoError(ModelIoErrc::bad_checksum, "trailing bytes after CRC");
    std::uint32_t want = crc32_of(buf_.first(pos_));
    std::uint32_t got = u32();
    if (want != got)
        throw ModelIoError(ModelIoErrc::bad_checksum, "CRC32 mismatch");
}

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_file(const std::string& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw std::runtime_error("write failed for " + path);
}

} // namespace edet::binio
