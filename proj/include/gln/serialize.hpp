#ifndef GLN_SERIALIZE_HPP
#define GLN_SERIALIZE_HPP

#include <cstdint>
#include <cstring>
#include <stdexcept>
#include <string>
#include <vector>

namespace gln {

/// Little-endian byte sink for checkpoint files. Doubles are stored as
/// their raw IEEE-754 bits so round-trips are bit-exact.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(static_cast<char>(v)); }

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) buf_.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
    }

    void f64(double v) {
        std::uint64_t bits;
        static_assert(sizeof(bits) == sizeof(v));
        std::memcpy(&bits, &v, sizeof(bits));
        u64(bits);
    }

    void i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }

    void str(const std::string& s) {
        u32(static_cast<std::uint32_t>(s.size()));
        buf_.append(s);
    }

    void raw(const void* data, std::size_t n) {
        buf_.append(static_cast<const char*>(data), n);
    }

    const std::string& bytes() const { return buf_; }
    std::string take() { return std::move(buf_); }

private:
    std::string buf_;
};

/// Reader matching ByteWriter; throws std::runtime_error on truncation.
class ByteReader {
public:
    explicit ByteReader(std::string_view bytes) : bytes_(bytes) {}

    std::uint8_t u8() { return static_cast<std::uint8_t>(need(1)[0]); }

    std::uint32_t u32() {
        const char* p = need(4);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        return v;
    }

    std::uint64_t u64() {
        const char* p = need(8);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
        return v;
    }

    double f64() {
        const std::uint64_t bits = u64();
        double v;
        std::memcpy(&v, &bits, sizeof(v));
        return v;
    }

    std::int32_t i32() { return static_cast<std::int32_t>(u32()); }

    std::string str() {
        const std::uint32_t n = u32();
        const char* p = need(n);
        return std::string(p, n);
    }

    bool at_end() const { return pos_ == bytes_.size(); }

    void expect_end() const {
        if (!at_end()) throw std::runtime_error("checkpoint: trailing bytes");
    }

private:
    const char* need(std::size_t n) {
        if (bytes_.size() - pos_ < n) throw std::runtime_error("checkpoint: truncated data");
        const char* p = bytes_.data() + pos_;
        pos_ += n;
        return p;
    }

    std::string_view bytes_;
    std::size_t pos_ = 0;
};

/// Whole-file helpers.
void write_file(const std::string& path, const std::string& bytes);
std::string read_file(const std::string& path);

}  // namespace gln

#endif  // GLN_SERIALIZE_HPP
