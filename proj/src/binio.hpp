#pragma once

// Little-endian binary record helpers shared by the model and window-archive
// formats. Every reader access is bounds-checked and reports truncation; the
// trailing CRC32 covers all preceding bytes.

#include <cstdint>
#include <cstring>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "edet/errors.hpp"
#include "edet/tensor.hpp"

namespace edet::binio {

std::uint32_t crc32_of(std::span<const std::uint8_t> bytes);

class Writer {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) { raw(&v, 2); }
    void u32(std::uint32_t v) { raw(&v, 4); }
    void u64(std::uint64_t v) { raw(&v, 8); }
    void f32(float v) { raw(&v, 4); }
    void bytes(const void* p, std::size_t n) { raw(p, n); }

    void name(std::string_view s);
    void tensor_f32(std::string_view name, std::span<const std::uint32_t> dims,
                    std::span<const float> data);
    void tensor(std::string_view name, const Mat& m);
    void tensor(std::string_view name, const Vec& v);
    void tensor_scalar(std::string_view name, double v);

    /// Appends CRC32 of everything written so far.
    void crc_trailer() { u32(crc32_of(buf_)); }

    const std::vector<std::uint8_t>& bytes() const { return buf_; }
    std::vector<std::uint8_t> take() { return std::move(buf_); }

private:
    void raw(const void* p, std::size_t n) {
        auto* b = static_cast<const std::uint8_t*>(p);
        buf_.insert(buf_.end(), b, b + n);
    }
    std::vector<std::uint8_t> buf_;
};

struct TensorRecord {
    std::string name;
    std::vector<std::uint32_t> dims;
    std::vector<float> data;

    std::size_t elem_count() const;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> buf) : buf_(buf) {}

    std::uint8_t u8();
    std::uint16_t u16();
    std::uint32_t u32();
    std::uint64_t u64();
    float f32();
    void bytes(void* p, std::size_t n);
    std::string name();
    TensorRecord tensor();

    std::size_t remaining() const { return buf_.size() - pos_; }

    /// Call once structural parsing is done: exactly the 4 CRC bytes must
    /// remain and they must match the preceding content.
    void verify_crc_trailer();

private:
    void need(std::size_t n) {
        if (remaining() < n)
            throw ModelIoError(ModelIoErrc::truncated,
                               "file ends " + std::to_string(n - remaining()) + " byte(s) early");
    }
    std::span<const std::uint8_t> buf_;
    std::size_t pos_ = 0;
};

std::vector<std::uint8_t> read_file(const std::string& path);
void write_file(const std::string& path, std::span<const std::uint8_t> bytes);

} // namespace edet::binio
