#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "vron/bytes.hpp"
#include "vron/error.hpp"
#include "vron/provenance.hpp"

namespace vron {

struct RawFrame {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  Bytes pixels;  // RGB8 row-major, exactly width*height*3 bytes

  bool well_formed() const {
    return width > 0 && height > 0 &&
           pixels.size() == static_cast<std::size_t>(width) * height * 3;
  }

  std::uint8_t* at(std::uint32_t x, std::uint32_t y) {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* at(std::uint32_t x, std::uint32_t y) const {
    return pixels.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }

  bool operator==(const RawFrame&) const = default;
};

// ---------------------------------------------------------------------------
// VRONC: the lossless raw container that stands in for MP4/H.264 so that
// signatures cover exact pixel content. Audio rides along as an opaque blob;
// it is signed with the video but never filtered.
//
//   magic "VRNC" | version u8=1 | width u32 | height u32 | frame_count u32 |
//   fps_num u32 | fps_den u32 | frames (RGB8, concatenated) |
//   audio_len u32 | audio bytes

constexpr char kVroncMagic[4] = {'V', 'R', 'N', 'C'};
constexpr std::uint8_t kVroncVersion = 1;

struct VideoSegmentData {
  std::vector<RawFrame> frames;
  FrameRate fps{30, 1};
  Bytes audio;

  std::uint32_t width() const { return frames.empty() ? 0 : frames.front().width; }
  std::uint32_t height() const { return frames.empty() ? 0 : frames.front().height; }
};

inline Bytes vronc_encode(const VideoSegmentData& v) {
  if (v.frames.empty()) fail(ErrorCode::EmptySegment, "cannot encode zero frames");
  const std::uint32_t w0 = v.frames.front().width;
  const std::uint32_t h0 = v.frames.front().height;
  Bytes out;
  ByteWriter w(out);
  w.raw(reinterpret_cast<const std::uint8_t*>(kVroncMagic), 4);
  w.u8(kVroncVersion);
  w.u32(w0);
  w.u32(h0);
  w.u32(static_cast<std::uint32_t>(v.frames.size()));
  w.u32(v.fps.num);
  w.u32(v.fps.den);
  for (const auto& f : v.frames) {
    if (f.width != w0 || f.height != h0)
      fail(ErrorCode::MixedDimensions, "all frames must share dimensions");
    if (!f.well_formed()) fail(ErrorCode::MalformedContainer, "frame pixel buffer size mismatch");
    w.raw(f.pixels);
  }
  w.blob32(v.audio);
  return out;
}

inline VideoSegmentData vronc_decode(const Bytes& b) {
  ByteReader r(b);
  Bytes magic = r.raw(4);
  if (r.failed() || std::memcmp(magic.data(), kVroncMagic, 4) != 0)
    fail(ErrorCode::MalformedContainer, "bad VRNC magic");
  if (r.u8() != kVroncVersion) fail(ErrorCode::MalformedContainer, "unsupported VRNC version");
  VideoSegmentData v;
  std::uint32_t width = r.u32();
  std::uint32_t height = r.u32();
  std::uint32_t count = r.u32();
  v.fps.num = r.u32();
  v.fps.den = r.u32();
  if (r.failed()) fail(ErrorCode::MalformedContainer, "truncated VRNC header");
  if (width == 0 || height == 0 || count == 0)
    fail(ErrorCode::MalformedContainer, "VRNC dimensions and frame count must be positive");
  if (v.fps.num == 0 || v.fps.den == 0)
    fail(ErrorCode::MalformedContainer, "VRNC frame rate must be positive");
  const std::size_t frame_bytes = static_cast<std::size_t>(width) * height * 3;
  if (r.remaining() < frame_bytes * count)
    fail(ErrorCode::MalformedContainer, "VRNC truncated frame data");
  v.frames.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    RawFrame f;
    f.width = width;
    f.height = height;
    f.pixels = r.raw(frame_bytes);
    v.frames.push_back(std::move(f));
  }
  v.audio = r.blob32();
  if (r.failed() || !r.done()) fail(ErrorCode::MalformedContainer, "VRNC trailing or missing bytes");
  return v;
}

// ---------------------------------------------------------------------------
// Synthetic footage. A moving gradient plus a watermark at pixel (0,0) whose
// RGB bytes encode the frame index, so ordering tests can check pixel-level
// frame order in a final container without real footage.

inline void stamp_watermark(RawFrame& f, std::uint32_t frame_index) {
  std::uint8_t* p = f.at(0, 0);
  p[0] = static_cast<std::uint8_t>(frame_index);
  p[1] = static_cast<std::uint8_t>(frame_index >> 8);
  p[2] = static_cast<std::uint8_t>(frame_index >> 16);
}

inline std::uint32_t read_watermark(const RawFrame& f) {
  const std::uint8_t* p = f.at(0, 0);
  return static_cast<std::uint32_t>(p[0]) | static_cast<std::uint32_t>(p[1]) << 8 |
         static_cast<std::uint32_t>(p[2]) << 16;
}

inline RawFrame synthetic_frame(std::uint32_t frame_index, std::uint32_t width,
                                std::uint32_t height) {
  RawFrame f;
  f.width = width;
  f.height = height;
  f.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  std::size_t i = 0;
  for (std::uint32_t y = 0; y < height; ++y) {
    for (std::uint32_t x = 0; x < width; ++x) {
      f.pixels[i++] = static_cast<std::uint8_t>(x + frame_index);
      f.pixels[i++] = static_cast<std::uint8_t>(y + 2 * frame_index);
      f.pixels[i++] = static_cast<std::uint8_t>(x + y + 3 * frame_index);
    }
  }
  stamp_watermark(f, frame_index);
  return f;
}

inline std::vector<RawFrame> synthetic_frames(std::uint32_t count, std::uint32_t width,
                                              std::uint32_t height) {
  std::vector<RawFrame> frames;
  frames.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) frames.push_back(synthetic_frame(i, width, height));
  return frames;
}

}  // namespace vron
