#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "vron/attest.hpp"
#include "vron/bytes.hpp"
#include "vron/container.hpp"
#include "vron/crypto.hpp"
#include "vron/error.hpp"

namespace vron {

// Provenance data model. One record describes a video segment: where it came
// from (video id, camera attestation), what it is (dimensions, frame rate,
// segment position), and what was done to it (ordered filter list, codec
// identities). Records are immutable values with a canonical byte encoding;
// every signature in the system is computed over these canonical bytes.
//
// Canonical layout (normative):
//   magic "VPRV" | version u8=1 | section count u8 |
//   per section: tag u8 | length u32 BE | payload, integers big-endian,
//   strings u16-length-prefixed.
//
// A full record carries sections 0x01 VideoInfo, 0x02 SegmentInfo,
// 0x03 FilterInfo, 0x04 CodecInfo (present only after post-processing),
// 0x05 CameraDeviceInfo, in that order. The per-frame slice carries
// 0x07 PerFrameCore, 0x06 FrameTag, 0x03 FilterInfo.

constexpr std::size_t kMaxFilterNameBytes = 15;

struct VideoInfo {
  Hash32 video_id{};        // hash of the camera's segment public key
  std::uint64_t timestamp = 0;  // seconds since epoch
  std::uint32_t width = 0;
  std::uint32_t height = 0;

  bool operator==(const VideoInfo&) const = default;
};

struct FrameRate {
  std::uint32_t num = 0;
  std::uint32_t den = 1;

  bool operator==(const FrameRate&) const = default;
};

struct SegmentInfo {
  std::uint32_t segment_id = 0;     // zero-based
  std::uint32_t total_segments = 1;
  FrameRate frame_rate{30, 1};
  std::uint32_t total_frames = 1;

  bool operator==(const SegmentInfo&) const = default;
};

struct FilterEntry {
  std::string name;                      // nonempty, at most 15 bytes
  Measurement measurement{};             // measurement of the applying stage
  std::vector<std::int64_t> parameters;  // fixed point, scale 2^16

  bool operator==(const FilterEntry&) const = default;
};

struct CodecInfo {
  Measurement decoder_measurement{};
  Measurement encoder_measurement{};

  bool operator==(const CodecInfo&) const = default;
};

struct FrameTag {
  std::uint32_t frame_id = 0;  // zero-based index within the segment

  bool operator==(const FrameTag&) const = default;
};

struct CameraDeviceInfo {
  AttestationReport report_before;
  AttestationReport report_after;
  Bytes camera_certificate;  // the camera session public key

  bool operator==(const CameraDeviceInfo&) const = default;
};

struct ProvenanceRecord {
  VideoInfo video;
  SegmentInfo segment;
  std::vector<FilterEntry> filters;  // application order; empty before post-processing
  std::optional<CodecInfo> codec;    // absent before post-processing
  CameraDeviceInfo camera;

  bool operator==(const ProvenanceRecord&) const = default;
};

/// The slice of provenance that travels with each decoded frame. The decoder
/// adds the frame tag; the encoder checks that all slices agree on everything
/// except the tag, then removes it.
struct PerFrameProvenance {
  Hash32 video_id{};
  std::uint32_t segment_id = 0;
  std::uint32_t total_frames = 0;
  FrameTag frame_tag{};
  std::vector<FilterEntry> filters_so_far;

  bool operator==(const PerFrameProvenance&) const = default;
};

// ---------------------------------------------------------------------------
// Validation

inline void validate(const VideoInfo& v) {
  if (v.width == 0 || v.height == 0)
    fail(ErrorCode::MalformedProvenance, "video dimensions must be positive");
}

inline void validate(const SegmentInfo& s) {
  if (s.segment_id >= s.total_segments)
    fail(ErrorCode::MalformedProvenance, "segment_id must be < total_segments");
  if (s.total_frames < 1) fail(ErrorCode::MalformedProvenance, "total_frames must be >= 1");
  if (s.frame_rate.num == 0 || s.frame_rate.den == 0)
    fail(ErrorCode::MalformedProvenance, "frame rate must be positive");
}

inline void validate(const FilterEntry& f) {
  if (f.name.empty() || f.name.size() > kMaxFilterNameBytes)
    fail(ErrorCode::MalformedProvenance, "filter name must be 1..15 bytes");
}

inline void validate(const ProvenanceRecord& r) {
  validate(r.video);
  validate(r.segment);
  for (const auto& f : r.filters) validate(f);
}

inline void validate(const PerFrameProvenance& p) {
  if (p.total_frames < 1) fail(ErrorCode::MalformedProvenance, "total_frames must be >= 1");
  if (p.frame_tag.frame_id >= p.total_frames)
    fail(ErrorCode::MalformedProvenance, "frame_id must be < total_frames");
  for (const auto& f : p.filters_so_far) validate(f);
}

// ---------------------------------------------------------------------------
// Section payload encoders

namespace detail {

inline Bytes encode_video_info(const VideoInfo& v) {
  Bytes b;
  ByteWriter w(b);
  w.hash(v.video_id);
  w.u64(v.timestamp);
  w.u32(v.width);
  w.u32(v.height);
  return b;
}

inline Bytes encode_segment_info(const SegmentInfo& s) {
  Bytes b;
  ByteWriter w(b);
  w.u32(s.segment_id);
  w.u32(s.total_segments);
  w.u32(s.frame_rate.num);
  w.u32(s.frame_rate.den);
  w.u32(s.total_frames);
  return b;
}

inline Bytes encode_filter_info(const std::vector<FilterEntry>& filters) {
  if (filters.size() > 0xffffffffull)
    fail(ErrorCode::EncodingOverflow, "filter count exceeds 2^32-1");
  Bytes b;
  ByteWriter w(b);
  w.u32(static_cast<std::uint32_t>(filters.size()));
  for (const auto& f : filters) {
    if (f.parameters.size() > 0xffffffffull)
      fail(ErrorCode::EncodingOverflow, "parameter count exceeds 2^32-1");
    w.str16(f.name);
    w.hash(f.measurement);
    w.u32(static_cast<std::uint32_t>(f.parameters.size()));
    for (auto p : f.parameters) w.i64(p);
  }
  return b;
}

inline Bytes encode_codec_info(const CodecInfo& c) {
  Bytes b;
  ByteWriter w(b);
  w.hash(c.decoder_measurement);
  w.hash(c.encoder_measurement);
  return b;
}

inline Bytes encode_camera_device_info(const CameraDeviceInfo& c) {
  Bytes b;
  ByteWriter w(b);
  w.blob32(c.report_before.encode());
  w.blob32(c.report_after.encode());
  w.blob32(c.camera_certificate);
  return b;
}

[[noreturn]] inline void malformed_at(std::size_t offset, const std::string& what) {
  fail(ErrorCode::MalformedProvenance, what + " at offset " + std::to_string(offset));
}

inline VideoInfo decode_video_info(const Section& s) {
  ByteReader r(s.payload);
  VideoInfo v;
  v.video_id = r.hash();
  v.timestamp = r.u64();
  v.width = r.u32();
  v.height = r.u32();
  if (r.failed() || !r.done()) malformed_at(s.payload_offset, "bad VideoInfo section");
  if (v.width == 0 || v.height == 0)
    malformed_at(s.payload_offset + 40, "video dimensions must be positive");
  return v;
}

inline SegmentInfo decode_segment_info(const Section& s) {
  ByteReader r(s.payload);
  SegmentInfo seg;
  seg.segment_id = r.u32();
  seg.total_segments = r.u32();
  seg.frame_rate.num = r.u32();
  seg.frame_rate.den = r.u32();
  seg.total_frames = r.u32();
  if (r.failed() || !r.done()) malformed_at(s.payload_offset, "bad SegmentInfo section");
  if (seg.segment_id >= seg.total_segments)
    malformed_at(s.payload_offset, "segment_id must be < total_segments");
  if (seg.frame_rate.num == 0 || seg.frame_rate.den == 0)
    malformed_at(s.payload_offset + 8, "frame rate must be positive");
  if (seg.total_frames < 1)
    malformed_at(s.payload_offset + 16, "total_frames must be >= 1");
  return seg;
}

inline std::vector<FilterEntry> decode_filter_info(const Section& s) {
  ByteReader r(s.payload);
  std::uint32_t count = r.u32();
  std::vector<FilterEntry> filters;
  for (std::uint32_t i = 0; i < count; ++i) {
    std::size_t at = s.payload_offset + r.offset();
    FilterEntry f;
    f.name = r.str16();
    f.measurement = r.hash();
    std::uint32_t params = r.u32();
    for (std::uint32_t j = 0; j < params && !r.failed(); ++j) f.parameters.push_back(r.i64());
    if (r.failed()) malformed_at(at, "truncated filter entry");
    if (f.name.empty() || f.name.size() > kMaxFilterNameBytes)
      malformed_at(at, "filter name must be 1..15 bytes");
    filters.push_back(std::move(f));
  }
  if (r.failed() || !r.done()) malformed_at(s.payload_offset, "bad FilterInfo section");
  return filters;
}

inline CodecInfo decode_codec_info(const Section& s) {
  ByteReader r(s.payload);
  CodecInfo c;
  c.decoder_measurement = r.hash();
  c.encoder_measurement = r.hash();
  if (r.failed() || !r.done()) malformed_at(s.payload_offset, "bad CodecInfo section");
  return c;
}

inline CameraDeviceInfo decode_camera_device_info(const Section& s) {
  ByteReader r(s.payload);
  Bytes before = r.blob32();
  Bytes after = r.blob32();
  Bytes cert = r.blob32();
  if (r.failed() || !r.done()) malformed_at(s.payload_offset, "bad CameraDeviceInfo section");
  CameraDeviceInfo c;
  try {
    c.report_before = AttestationReport::decode(before);
    c.report_after = AttestationReport::decode(after);
  } catch (const Error&) {
    malformed_at(s.payload_offset, "bad embedded attestation report");
  }
  c.camera_certificate = std::move(cert);
  return c;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Canonical encode / decode

inline Bytes canonical_encode(const ProvenanceRecord& r) {
  validate(r);
  SectionWriter w;
  w.add(SectionTag::VideoInfo, detail::encode_video_info(r.video));
  w.add(SectionTag::SegmentInfo, detail::encode_segment_info(r.segment));
  w.add(SectionTag::FilterInfo, detail::encode_filter_info(r.filters));
  if (r.codec) w.add(SectionTag::CodecInfo, detail::encode_codec_info(*r.codec));
  w.add(SectionTag::CameraDeviceInfo, detail::encode_camera_device_info(r.camera));
  return w.finish();
}

inline Bytes canonical_encode(const PerFrameProvenance& p) {
  validate(p);
  Bytes core;
  {
    ByteWriter w(core);
    w.hash(p.video_id);
    w.u32(p.segment_id);
    w.u32(p.total_frames);
  }
  Bytes tag;
  {
    ByteWriter w(tag);
    w.u32(p.frame_tag.frame_id);
  }
  SectionWriter w;
  w.add(SectionTag::PerFrameCore, std::move(core));
  w.add(SectionTag::FrameTag, std::move(tag));
  w.add(SectionTag::FilterInfo, detail::encode_filter_info(p.filters_so_far));
  return w.finish();
}

using DecodedProvenance = std::variant<ProvenanceRecord, PerFrameProvenance>;

/// Rejection is total: either the full record decodes and satisfies every
/// invariant, or MalformedProvenance names the first offending offset.
inline DecodedProvenance canonical_decode(const Bytes& b) {
  auto sections = parse_sections(b, ErrorCode::MalformedProvenance);
  if (sections.empty()) detail::malformed_at(5, "no sections");

  auto expect = [&](std::size_t i, SectionTag tag) -> const Section& {
    if (i >= sections.size())
      detail::malformed_at(b.size(), "missing section " + std::to_string(static_cast<int>(tag)));
    if (sections[i].tag != tag)
      detail::malformed_at(sections[i].payload_offset - 5, "unexpected section tag");
    return sections[i];
  };

  if (sections[0].tag == SectionTag::PerFrameCore) {
    if (sections.size() != 3) detail::malformed_at(5, "per-frame provenance needs 3 sections");
    PerFrameProvenance p;
    {
      const Section& s = expect(0, SectionTag::PerFrameCore);
      ByteReader r(s.payload);
      p.video_id = r.hash();
      p.segment_id = r.u32();
      p.total_frames = r.u32();
      if (r.failed() || !r.done()) detail::malformed_at(s.payload_offset, "bad PerFrameCore");
      if (p.total_frames < 1)
        detail::malformed_at(s.payload_offset + 36, "total_frames must be >= 1");
    }
    {
      const Section& s = expect(1, SectionTag::FrameTag);
      ByteReader r(s.payload);
      p.frame_tag.frame_id = r.u32();
      if (r.failed() || !r.done()) detail::malformed_at(s.payload_offset, "bad FrameTag");
      if (p.frame_tag.frame_id >= p.total_frames)
        detail::malformed_at(s.payload_offset, "frame_id must be < total_frames");
    }
    p.filters_so_far = detail::decode_filter_info(expect(2, SectionTag::FilterInfo));
    return p;
  }

  if (sections.size() != 4 && sections.size() != 5)
    detail::malformed_at(5, "record needs 4 or 5 sections");
  ProvenanceRecord rec;
  rec.video = detail::decode_video_info(expect(0, SectionTag::VideoInfo));
  rec.segment = detail::decode_segment_info(expect(1, SectionTag::SegmentInfo));
  rec.filters = detail::decode_filter_info(expect(2, SectionTag::FilterInfo));
  std::size_t next = 3;
  if (sections.size() == 5)
    rec.codec = detail::decode_codec_info(expect(next++, SectionTag::CodecInfo));
  rec.camera = detail::decode_camera_device_info(expect(next, SectionTag::CameraDeviceInfo));
  return rec;
}

inline ProvenanceRecord decode_record(const Bytes& b) {
  auto v = canonical_decode(b);
  if (!std::holds_alternative<ProvenanceRecord>(v))
    fail(ErrorCode::MalformedProvenance, "expected a full provenance record");
  return std::get<ProvenanceRecord>(std::move(v));
}

inline PerFrameProvenance decode_per_frame(const Bytes& b) {
  auto v = canonical_decode(b);
  if (!std::holds_alternative<PerFrameProvenance>(v))
    fail(ErrorCode::MalformedProvenance, "expected per-frame provenance");
  return std::get<PerFrameProvenance>(std::move(v));
}

// ---------------------------------------------------------------------------

/// Video ID is the SHA-256 of the camera session public key: the same value
/// doubles as the attestation nonce, binding key, reports, and video.
inline Hash32 compute_video_id(const Bytes& camera_public_key) {
  if (camera_public_key.empty()) fail(ErrorCode::EmptyKey, "camera public key is empty");
  return sha256(camera_public_key);
}

/// Size of the encoded record with the camera section stripped; bandwidth
/// accounting treats attestation reports separately because they dwarf the
/// rest of the record.
inline std::size_t encoded_size_without_camera(const ProvenanceRecord& r) {
  return canonical_encode(r).size() - detail::encode_camera_device_info(r.camera).size() - 5;
}

}  // namespace vron
