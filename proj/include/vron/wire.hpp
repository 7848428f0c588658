#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <utility>
#include <vector>

#include "vron/bytes.hpp"
#include "vron/error.hpp"

namespace vron {

// Framed wire protocol between pipeline workers:
//
//   u32 big-endian payload length | msg type u8 | payload
//
// A single frame's payload is capped at 64 MiB. Objects that exceed the cap
// (a raw 720p segment is ~158 MiB) are carried as a sequence of frames whose
// payloads hold a chunk envelope:
//
//   chunk index u32 | chunk count u32 | object length u64 | data
//
// Every object uses the envelope, even when it fits one chunk, so relays
// treat all traffic uniformly.

enum class MsgType : std::uint8_t {
  Segment = 0x01,
  Frame = 0x02,
  Sidecar = 0x03,
  Bundle = 0x04,
  CertExchange = 0x05,
  Error = 0x06,
};

constexpr std::size_t kMaxWirePayload = 64ull * 1024 * 1024;
constexpr std::size_t kChunkDataBytes = 32ull * 1024 * 1024;
constexpr std::size_t kChunkHeaderBytes = 16;

struct WireMessage {
  MsgType msg_type;
  Bytes payload;

  bool operator==(const WireMessage&) const = default;
};

inline Bytes wire_encode(const WireMessage& m) {
  if (m.payload.size() > kMaxWirePayload)
    fail(ErrorCode::FrameTooLarge,
         "payload of " + std::to_string(m.payload.size()) + " bytes exceeds 64 MiB");
  Bytes out;
  out.reserve(5 + m.payload.size());
  ByteWriter w(out);
  w.u32(static_cast<std::uint32_t>(m.payload.size()));
  w.u8(static_cast<std::uint8_t>(m.msg_type));
  w.raw(m.payload);
  return out;
}

/// Pull-based byte stream; next_chunk returns nullopt at end of stream.
class StreamReader {
public:
  using ChunkFn = std::function<std::optional<Bytes>()>;

  explicit StreamReader(ChunkFn next_chunk) : next_(std::move(next_chunk)) {}

  /// Reads exactly n bytes; returns false if the stream ends first (with
  /// zero bytes consumed counting towards `started`).
  bool read_exact(std::uint8_t* out, std::size_t n, bool* started = nullptr) {
    std::size_t got = 0;
    while (got < n) {
      if (pos_ == buf_.size()) {
        auto chunk = next_();
        if (!chunk || chunk->empty()) {
          if (started) *started = got > 0;
          return false;
        }
        buf_ = std::move(*chunk);
        pos_ = 0;
      }
      std::size_t take = std::min(n - got, buf_.size() - pos_);
      std::memcpy(out + got, buf_.data() + pos_, take);
      pos_ += take;
      got += take;
    }
    if (started) *started = true;
    return true;
  }

private:
  ChunkFn next_;
  Bytes buf_;
  std::size_t pos_ = 0;
};

/// Reads one framed message. Returns nullopt on a clean end of stream
/// (stream ends exactly between messages); throws Truncated when the stream
/// dies mid-message and FrameTooLarge when the declared length exceeds the
/// cap.
inline std::optional<WireMessage> wire_decode(StreamReader& in) {
  std::uint8_t hdr[5];
  bool started = false;
  if (!in.read_exact(hdr, 4, &started)) {
    if (started) fail(ErrorCode::Truncated, "stream ended inside length prefix");
    return std::nullopt;
  }
  std::uint32_t len = 0;
  for (int i = 0; i < 4; ++i) len = len << 8 | hdr[i];
  if (len > kMaxWirePayload)
    fail(ErrorCode::FrameTooLarge, "declared payload of " + std::to_string(len) + " bytes");
  if (!in.read_exact(hdr + 4, 1)) fail(ErrorCode::Truncated, "stream ended before msg type");
  WireMessage m;
  m.msg_type = static_cast<MsgType>(hdr[4]);
  m.payload.resize(len);
  if (len > 0 && !in.read_exact(m.payload.data(), len))
    fail(ErrorCode::Truncated, "stream ended inside payload");
  return m;
}

inline std::optional<WireMessage> wire_decode(const Bytes& framed) {
  bool used = false;
  StreamReader r([&]() -> std::optional<Bytes> {
    if (used) return std::nullopt;
    used = true;
    return framed;
  });
  return wire_decode(r);
}

// ---------------------------------------------------------------------------
// Object layer: chunk envelope encode/assemble

/// Splits an object into framed chunk messages ready to send.
inline std::vector<Bytes> frame_object(MsgType type, const Bytes& object) {
  std::size_t count = object.empty() ? 1 : (object.size() + kChunkDataBytes - 1) / kChunkDataBytes;
  std::vector<Bytes> frames;
  frames.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    std::size_t beg = i * kChunkDataBytes;
    std::size_t end = std::min(object.size(), beg + kChunkDataBytes);
    WireMessage m;
    m.msg_type = type;
    ByteWriter w(m.payload);
    w.u32(static_cast<std::uint32_t>(i));
    w.u32(static_cast<std::uint32_t>(count));
    w.u64(object.size());
    w.raw(object.data() + beg, end - beg);
    frames.push_back(wire_encode(m));
  }
  return frames;
}

/// Reassembles objects from a sequence of chunk messages. Chunks of one
/// object must be contiguous and self-consistent; anything else is
/// MalformedMessage.
class ObjectAssembler {
public:
  /// Returns the completed (type, object) once the final chunk arrives.
  std::optional<std::pair<MsgType, Bytes>> feed(const WireMessage& m) {
    ByteReader r(m.payload);
    std::uint32_t index = r.u32();
    std::uint32_t count = r.u32();
    std::uint64_t total = r.u64();
    if (r.failed()) fail(ErrorCode::MalformedMessage, "chunk envelope too short");
    Bytes data = r.raw(r.remaining());
    if (count == 0 || index >= count)
      fail(ErrorCode::MalformedMessage, "inconsistent chunk envelope");
    if (pending_) {
      if (m.msg_type != type_ || count != count_ || total != total_ || index != next_index_)
        fail(ErrorCode::MalformedMessage, "chunk sequence violated");
    } else {
      if (index != 0) fail(ErrorCode::MalformedMessage, "object does not start at chunk 0");
      pending_ = true;
      type_ = m.msg_type;
      count_ = count;
      total_ = total;
      next_index_ = 0;
      buf_.clear();
      buf_.reserve(total > kMaxObjectBytes ? 0 : static_cast<std::size_t>(total));
    }
    if (total > kMaxObjectBytes) fail(ErrorCode::MalformedMessage, "object too large");
    if (buf_.size() + data.size() > total)
      fail(ErrorCode::MalformedMessage, "chunk data exceeds declared object size");
    append(buf_, data);
    ++next_index_;
    if (next_index_ == count_) {
      if (buf_.size() != total_)
        fail(ErrorCode::MalformedMessage, "object size does not match declared total");
      pending_ = false;
      return std::make_pair(type_, std::move(buf_));
    }
    return std::nullopt;
  }

  bool mid_object() const { return pending_; }

  static constexpr std::uint64_t kMaxObjectBytes = 4ull * 1024 * 1024 * 1024;

private:
  bool pending_ = false;
  MsgType type_ = MsgType::Error;
  std::uint32_t count_ = 0;
  std::uint64_t total_ = 0;
  std::uint32_t next_index_ = 0;
  Bytes buf_;
};

// Error objects carry a code and a human-readable detail string.
inline Bytes encode_error_payload(ErrorCode code, const std::string& detail) {
  Bytes b;
  ByteWriter w(b);
  w.u32(static_cast<std::uint32_t>(code));
  w.str16(detail.size() > 0xffff ? detail.substr(0, 0xffff) : detail);
  return b;
}

inline std::pair<ErrorCode, std::string> decode_error_payload(const Bytes& b) {
  ByteReader r(b);
  std::uint32_t code = r.u32();
  std::string detail = r.str16();
  if (r.failed() || !r.done()) fail(ErrorCode::MalformedMessage, "bad error payload");
  return {static_cast<ErrorCode>(code), detail};
}

}  // namespace vron
