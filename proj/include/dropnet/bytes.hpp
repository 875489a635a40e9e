#pragma once

// Byte-buffer helpers shared by the wire formats. All multi-byte integers on
// the wire are big-endian.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dropnet {

using Bytes = std::vector<uint8_t>;
using BytesView = std::span<const uint8_t>;

inline void put_u16(Bytes& b, uint16_t v) {
    b.push_back(static_cast<uint8_t>(v >> 8));
    b.push_back(static_cast<uint8_t>(v));
}

inline void put_u32(Bytes& b, uint32_t v) {
    b.push_back(static_cast<uint8_t>(v >> 24));
    b.push_back(static_cast<uint8_t>(v >> 16));
    b.push_back(static_cast<uint8_t>(v >> 8));
    b.push_back(static_cast<uint8_t>(v));
}

inline void put_bytes(Bytes& b, BytesView v) { b.insert(b.end(), v.begin(), v.end()); }

/// Sequential reader over a byte view; all getters fail soft by returning
/// false once the view is exhausted.
class ByteReader {
public:
    explicit ByteReader(BytesView v) : view_(v) {}

    bool get_u8(uint8_t& out) {
        if (pos_ + 1 > view_.size()) return false;
        out = view_[pos_++];
        return true;
    }
    bool get_u16(uint16_t& out) {
        if (pos_ + 2 > view_.size()) return false;
        out = static_cast<uint16_t>(view_[pos_] << 8 | view_[pos_ + 1]);
        pos_ += 2;
        return true;
    }
    bool get_u32(uint32_t& out) {
        if (pos_ + 4 > view_.size()) return false;
        out = static_cast<uint32_t>(view_[pos_]) << 24 | static_cast<uint32_t>(view_[pos_ + 1]) << 16 |
              static_cast<uint32_t>(view_[pos_ + 2]) << 8 | static_cast<uint32_t>(view_[pos_ + 3]);
        pos_ += 4;
        return true;
    }
    bool get_bytes(uint8_t* out, size_t n) {
        if (pos_ + n > view_.size()) return false;
        std::copy(view_.begin() + pos_, view_.begin() + pos_ + n, out);
        pos_ += n;
        return true;
    }
    bool get_vector(Bytes& out, size_t n) {
        if (pos_ + n > view_.size()) return false;
        out.assign(view_.begin() + pos_, view_.begin() + pos_ + n);
        pos_ += n;
        return true;
    }
    size_t remaining() const { return view_.size() - pos_; }
    bool done() const { return pos_ == view_.size(); }

private:
    BytesView view_;
    size_t pos_ = 0;
};

inline std::string to_hex(BytesView v) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    s.reserve(v.size() * 2);
    for (uint8_t b : v) {
        s.push_back(digits[b >> 4]);
        s.push_back(digits[b & 0xf]);
    }
    return s;
}

}  // namespace dropnet
