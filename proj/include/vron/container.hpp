#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "vron/bytes.hpp"
#include "vron/error.hpp"

namespace vron {

// Canonical section framing shared by provenance encodings and the on-disk
// key/certificate/report/segment/bundle files:
//
//   magic "VPRV" | version u8 = 1 | section count u8 |
//   per section: tag u8 | length u32 BE | payload
//
// The framing is strict: sections appear in a fixed order per document kind,
// lengths must match exactly, and trailing bytes are rejected.

constexpr char kContainerMagic[4] = {'V', 'P', 'R', 'V'};
constexpr std::uint8_t kContainerVersion = 1;

// Section tags.
enum class SectionTag : std::uint8_t {
  VideoInfo = 0x01,
  SegmentInfo = 0x02,
  FilterInfo = 0x03,
  CodecInfo = 0x04,
  CameraDeviceInfo = 0x05,
  FrameTag = 0x06,
  PerFrameCore = 0x07,  // video_id + segment_id + total_frames carried per frame

  Key = 0x10,
  Certificate = 0x11,
  Report = 0x12,
  SignedSegment = 0x13,
  FinalBundle = 0x14,

  VerificationReport = 0x20,
};

struct Section {
  SectionTag tag;
  Bytes payload;
  std::size_t payload_offset = 0;  // absolute offset of payload start, set by the parser
};

class SectionWriter {
public:
  void add(SectionTag tag, Bytes payload) {
    sections_.push_back({tag, std::move(payload)});
  }

  Bytes finish(ErrorCode overflow_error = ErrorCode::EncodingOverflow) const {
    Bytes out;
    ByteWriter w(out);
    w.raw(reinterpret_cast<const std::uint8_t*>(kContainerMagic), 4);
    w.u8(kContainerVersion);
    if (sections_.size() > 0xff) fail(overflow_error, "too many sections");
    w.u8(static_cast<std::uint8_t>(sections_.size()));
    for (const auto& s : sections_) {
      if (s.payload.size() > 0xffffffffull)
        fail(overflow_error, "section payload exceeds 2^32-1 bytes");
      w.u8(static_cast<std::uint8_t>(s.tag));
      w.u32(static_cast<std::uint32_t>(s.payload.size()));
      w.raw(s.payload);
    }
    return out;
  }

private:
  std::vector<Section> sections_;
};

/// Parses the framing; every violation reports the byte offset where it was
/// detected.
inline std::vector<Section> parse_sections(const Bytes& b,
                                           ErrorCode err = ErrorCode::MalformedProvenance) {
  ByteReader r(b);
  Bytes magic = r.raw(4);
  if (r.failed() || std::memcmp(magic.data(), kContainerMagic, 4) != 0)
    fail(err, "bad magic at offset 0");
  std::uint8_t version = r.u8();
  if (r.failed() || version != kContainerVersion)
    fail(err, "unsupported version at offset 4");
  std::uint8_t count = r.u8();
  if (r.failed()) fail(err, "truncated header at offset 5");
  std::vector<Section> out;
  out.reserve(count);
  for (std::uint8_t i = 0; i < count; ++i) {
    std::size_t at = r.offset();
    std::uint8_t tag = r.u8();
    std::uint32_t len = r.u32();
    if (r.failed()) fail(err, "truncated section header at offset " + std::to_string(at));
    std::size_t payload_at = r.offset();
    Bytes payload = r.raw(len);
    if (r.failed()) fail(err, "truncated section payload at offset " + std::to_string(at));
    out.push_back({static_cast<SectionTag>(tag), std::move(payload), payload_at});
  }
  if (!r.done()) fail(err, "trailing bytes at offset " + std::to_string(r.offset()));
  return out;
}

/// Convenience for single-section file formats (keys, certificates, ...).
inline Bytes wrap_section(SectionTag tag, Bytes payload) {
  SectionWriter w;
  w.add(tag, std::move(payload));
  return w.finish();
}

inline Bytes unwrap_section(const Bytes& file, SectionTag expected,
                            ErrorCode err = ErrorCode::MalformedProvenance) {
  auto sections = parse_sections(file, err);
  if (sections.size() != 1 || sections[0].tag != expected)
    fail(err, "expected a single section with tag " +
                  std::to_string(static_cast<int>(expected)));
  return std::move(sections[0].payload);
}

}  // namespace vron
