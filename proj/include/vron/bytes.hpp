#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <string>
#include <string_view>
#include <vector>

namespace vron {

using Bytes = std::vector<std::uint8_t>;
using Hash32 = std::array<std::uint8_t, 32>;

inline Bytes to_bytes(std::string_view s) {
  return Bytes(s.begin(), s.end());
}

inline std::string to_string(const Bytes& b) {
  return std::string(b.begin(), b.end());
}

inline void append(Bytes& out, const Bytes& more) {
  out.insert(out.end(), more.begin(), more.end());
}

inline void append(Bytes& out, const std::uint8_t* p, std::size_t n) {
  out.insert(out.end(), p, p + n);
}

inline std::string hex(const std::uint8_t* p, std::size_t n) {
  static const char* digits = "0123456789abcdef";
  std::string s;
  s.reserve(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    s.push_back(digits[p[i] >> 4]);
    s.push_back(digits[p[i] & 0xf]);
  }
  return s;
}

inline std::string hex(const Bytes& b) { return hex(b.data(), b.size()); }
inline std::string hex(const Hash32& h) { return hex(h.data(), h.size()); }

inline int hex_nibble(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  return -1;
}

inline bool parse_hex(std::string_view s, Bytes& out) {
  if (s.size() % 2 != 0) return false;
  out.clear();
  out.reserve(s.size() / 2);
  for (std::size_t i = 0; i < s.size(); i += 2) {
    int hi = hex_nibble(s[i]), lo = hex_nibble(s[i + 1]);
    if (hi < 0 || lo < 0) return false;
    out.push_back(static_cast<std::uint8_t>(hi << 4 | lo));
  }
  return true;
}

/// Appends big-endian integers and length-prefixed fields to a byte buffer.
/// All multi-byte integers in the project's on-disk and on-wire formats are
/// big-endian.
class ByteWriter {
public:
  explicit ByteWriter(Bytes& out) : out_(out) {}

  void u8(std::uint8_t v) { out_.push_back(v); }
  void u16(std::uint16_t v) {
    out_.push_back(static_cast<std::uint8_t>(v >> 8));
    out_.push_back(static_cast<std::uint8_t>(v));
  }
  void u32(std::uint32_t v) {
    for (int s = 24; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void u64(std::uint64_t v) {
    for (int s = 56; s >= 0; s -= 8) out_.push_back(static_cast<std::uint8_t>(v >> s));
  }
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }

  void raw(const std::uint8_t* p, std::size_t n) { append(out_, p, n); }
  void raw(const Bytes& b) { append(out_, b); }
  void hash(const Hash32& h) { raw(h.data(), h.size()); }

  /// u16 length + bytes; used for short strings (filter names, host ids).
  void str16(std::string_view s);
  /// u32 length + bytes; used for nested blobs.
  void blob32(const Bytes& b);

  std::size_t size() const { return out_.size(); }

private:
  Bytes& out_;
};

/// Cursor over a byte buffer. Out-of-range reads set a fail flag instead of
/// throwing so callers can report the offset of the first violation.
class ByteReader {
public:
  ByteReader(const std::uint8_t* p, std::size_t n) : p_(p), n_(n) {}
  explicit ByteReader(const Bytes& b) : ByteReader(b.data(), b.size()) {}

  std::size_t offset() const { return off_; }
  std::size_t remaining() const { return failed_ ? 0 : n_ - off_; }
  bool failed() const { return failed_; }
  bool done() const { return !failed_ && off_ == n_; }

  std::uint8_t u8() {
    if (!need(1)) return 0;
    return p_[off_++];
  }
  std::uint16_t u16() {
    if (!need(2)) return 0;
    std::uint16_t v = static_cast<std::uint16_t>(p_[off_] << 8 | p_[off_ + 1]);
    off_ += 2;
    return v;
  }
  std::uint32_t u32() {
    if (!need(4)) return 0;
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v = v << 8 | p_[off_ + i];
    off_ += 4;
    return v;
  }
  std::uint64_t u64() {
    if (!need(8)) return 0;
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | p_[off_ + i];
    off_ += 8;
    return v;
  }
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }

  Bytes raw(std::size_t n) {
    if (!need(n)) return {};
    Bytes b(p_ + off_, p_ + off_ + n);
    off_ += n;
    return b;
  }
  Hash32 hash() {
    Hash32 h{};
    if (!need(32)) return h;
    std::memcpy(h.data(), p_ + off_, 32);
    off_ += 32;
    return h;
  }
  std::string str16() {
    std::uint16_t n = u16();
    Bytes b = raw(n);
    return failed_ ? std::string{} : to_string(b);
  }
  Bytes blob32() {
    std::uint32_t n = u32();
    return raw(n);
  }

private:
  bool need(std::size_t n) {
    if (failed_ || n_ - off_ < n) {
      failed_ = true;
      return false;
    }
    return true;
  }

  const std::uint8_t* p_;
  std::size_t n_;
  std::size_t off_ = 0;
  bool failed_ = false;
};

inline void ByteWriter::str16(std::string_view s) {
  u16(static_cast<std::uint16_t>(s.size()));
  raw(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

inline void ByteWriter::blob32(const Bytes& b) {
  u32(static_cast<std::uint32_t>(b.size()));
  raw(b);
}

}  // namespace vron
