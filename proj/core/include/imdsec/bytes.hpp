#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace imdsec {

using Bytes = std::vector<std::uint8_t>;
using BytesView = std::span<const std::uint8_t>;

inline Bytes to_bytes(std::string_view s) {
    return Bytes(s.begin(), s.end());
}

inline std::string to_hex(BytesView data) {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(data.size() * 2);
    for (std::uint8_t b : data) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0x0f]);
    }
    return out;
}

inline Bytes from_hex(std::string_view hex) {
    auto nibble = [](char c) -> int {
        if (c >= '0' && c <= '9') return c - '0';
        if (c >= 'a' && c <= 'f') return c - 'a' + 10;
        if (c >= 'A' && c <= 'F') return c - 'A' + 10;
        return -1;
    };
    if (hex.size() % 2 != 0) throw std::invalid_argument("odd hex length");
    Bytes out;
    out.reserve(hex.size() / 2);
    for (std::size_t i = 0; i < hex.size(); i += 2) {
        int hi = nibble(hex[i]), lo = nibble(hex[i + 1]);
        if (hi < 0 || lo < 0) throw std::invalid_argument("bad hex digit");
        out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
    }
    return out;
}

/// Big-endian serializer used by the wire codec and record formats.
class ByteWriter {
public:
    void u8(std::uint8_t v) { buf_.push_back(v); }
    void u16(std::uint16_t v) {
        buf_.push_back(static_cast<std::uint8_t>(v >> 8));
        buf_.push_back(static_cast<std::uint8_t>(v));
    }
    void u32(std::uint32_t v) {
        for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void u64(std::uint64_t v) {
        for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<std::uint8_t>(v >> s));
    }
    void raw(BytesView data) { buf_.insert(buf_.end(), data.begin(), data.end()); }
    template <std::size_t N>
    void raw(const std::array<std::uint8_t, N>& a) { raw(BytesView(a.data(), N)); }

    /// Length-prefixed variable field (u16 length).
    void var(BytesView data) {
        if (data.size() > 0xffff) throw std::invalid_argument("var field too long");
        u16(static_cast<std::uint16_t>(data.size()));
        raw(data);
    }

    const Bytes& bytes() const { return buf_; }
    Bytes take() { return std::move(buf_); }
    std::size_t size() const { return buf_.size(); }

private:
    Bytes buf_;
};

/// Big-endian reader; all accessors throw ByteReader::Underflow on exhaustion
/// so frame decoding can map it to a single truncation cause.
class ByteReader {
public:
    struct Underflow : std::runtime_error {
        Underflow() : std::runtime_error("byte reader underflow") {}
    };

    explicit ByteReader(BytesView data) : data_(data) {}

    std::uint8_t u8() { return take(1)[0]; }
    std::uint16_t u16() {
        auto b = take(2);
        return static_cast<std::uint16_t>(b[0] << 8 | b[1]);
    }
    std::uint32_t u32() {
        auto b = take(4);
        return (std::uint32_t(b[0]) << 24) | (std::uint32_t(b[1]) << 16) |
               (std::uint32_t(b[2]) << 8) | std::uint32_t(b[3]);
    }
    std::uint64_t u64() {
        std::uint64_t hi = u32();
        return (hi << 32) | u32();
    }
    Bytes raw(std::size_t n) {
        auto b = take(n);
        return Bytes(b.begin(), b.end());
    }
    template <std::size_t N>
    std::array<std::uint8_t, N> arr() {
        auto b = take(N);
        std::array<std::uint8_t, N> out{};
        std::memcpy(out.data(), b.data(), N);
        return out;
    }
    Bytes var() { return raw(u16()); }

    std::size_t remaining() const { return data_.size() - pos_; }
    bool exhausted() const { return remaining() == 0; }

private:
    BytesView take(std::size_t n) {
        if (remaining() < n) throw Underflow{};
        BytesView out = data_.subspan(pos_, n);
        pos_ += n;
        return out;
    }

    BytesView data_;
    std::size_t pos_ = 0;
};

}  // namespace imdsec
