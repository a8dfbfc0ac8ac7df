#pragma once

#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "singvoc/common.hpp"

namespace singvoc {
namespace binio {

// All on-disk integers and floats are little-endian.

inline uint64_t fnv1a64(const char* data, size_t n, uint64_t seed = 0xcbf29ce484222325ULL) {
    uint64_t h = seed;
    for (size_t i = 0; i < n; ++i) {
        h ^= static_cast<unsigned char>(data[i]);
        h *= 0x100000001b3ULL;
    }
    return h;
}

class Writer {
public:
    void u8(uint8_t v) { raw(&v, 1); }
    void u32(uint32_t v) { raw_le(v); }
    void u64(uint64_t v) { raw_le(v); }
    void i64(int64_t v) { raw_le(static_cast<uint64_t>(v)); }
    void f64(double v) {
        uint64_t bits;
        std::memcpy(&bits, &v, 8);
        raw_le(bits);
    }
    void f32(float v) {
        uint32_t bits;
        std::memcpy(&bits, &v, 4);
        raw_le(bits);
    }
    void str(const std::string& s) {
        u32(static_cast<uint32_t>(s.size()));
        raw(s.data(), s.size());
    }
    void f64_array(const std::vector<double>& v) {
        u64(v.size());
        for (double x : v) f64(x);
    }
    void raw(const void* p, size_t n) {
        const char* c = static_cast<const char*>(p);
        buf_.insert(buf_.end(), c, c + n);
    }

    const std::string& buffer() const { return buf_; }

    void finish_with_checksum() { u64(fnv1a64(buf_.data(), buf_.size())); }

    void write_file(const std::filesystem::path& path) const {
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        SINGVOC_CHECK(out.good(), "cannot open '", path.string(), "' for writing");
        out.write(buf_.data(), static_cast<std::streamsize>(buf_.size()));
        SINGVOC_CHECK(out.good(), "short write to '", path.string(), "'");
    }

private:
    template <typename T>
    void raw_le(T v) {
        char bytes[sizeof(T)];
        for (size_t i = 0; i < sizeof(T); ++i) {
            bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
        }
        raw(bytes, sizeof(T));
    }

    std::string buf_;
};

class Reader {
public:
    explicit Reader(std::string data) : buf_(std::move(data)) {}

    static Reader from_file(const std::filesystem::path& path) {
        std::ifstream in(path, std::ios::binary);
        if (!in.good()) fail<IoError>("cannot open '", path.string(), "'");
        std::string data((std::istreambuf_iterator<char>(in)),
                         std::istreambuf_iterator<char>());
        return Reader(std::move(data));
    }

    uint8_t u8() {
        need(1);
        return static_cast<uint8_t>(buf_[pos_++]);
    }
    uint32_t u32() { return static_cast<uint32_t>(read_le(4)); }
    uint64_t u64() { return read_le(8); }
    int64_t i64() { return static_cast<int64_t>(read_le(8)); }
    double f64() {
        const uint64_t bits = read_le(8);
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    float f32() {
        const uint32_t bits = static_cast<uint32_t>(read_le(4));
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
    std::string str() {
        const uint32_t n = u32();
        need(n);
        std::string s = buf_.substr(pos_, n);
        pos_ += n;
        return s;
    }
    std::vector<double> f64_array() {
        const uint64_t n = u64();
        need(n * 8);
        std::vector<double> v(n);
        for (uint64_t i = 0; i < n; ++i) v[i] = f64();
        return v;
    }

    size_t pos() const { return pos_; }
    size_t remaining() const { return buf_.size() - pos_; }

    // checksum over everything before the trailing u64
    void verify_checksum(const char* what) {
        if (buf_.size() < 8) fail<IoError>(what, ": truncated file");
        const size_t save = pos_;
        pos_ = buf_.size() - 8;
        const uint64_t trailer = u64();
        pos_ = save;
        const uint64_t computed = fnv1a64(buf_.data(), buf_.size() - 8);
        if (trailer != computed) {
            fail<IoError>(what, ": checksum mismatch (file corrupt)");
        }
        payload_end_ = buf_.size() - 8;
    }

    bool at_payload_end() const { return pos_ == payload_end_; }

private:
    void need(size_t n) {
        if (pos_ + n > buf_.size()) fail<IoError>("unexpected end of file");
    }

    uint64_t read_le(size_t n) {
        need(n);
        uint64_t v = 0;
        for (size_t i = 0; i < n; ++i) {
            v |= static_cast<uint64_t>(static_cast<unsigned char>(buf_[pos_ + i])) << (8 * i);
        }
        pos_ += n;
        return v;
    }

    std::string buf_;
    size_t pos_ = 0;
    size_t payload_end_ = 0;
};

} // namespace binio
} // namespace singvoc
