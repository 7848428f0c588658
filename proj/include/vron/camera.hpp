#pragma once

#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "vron/attest.hpp"
#include "vron/bytes.hpp"
#include "vron/crypto.hpp"
#include "vron/provenance.hpp"
#include "vron/video.hpp"

namespace vron {

// Camera simulator. Mirrors the two-report attestation protocol of an
// attestation-backed camera app: a fresh keypair per recording session, the
// hash of the public key as attestation nonce (which doubles as the video
// id), an attestation round before recording and another after, and the key
// erased once recording finishes.
//
// Each captured segment carries its own post-capture report so segments stay
// independently verifiable; the report issued at finish_recording() is the
// session-final one.

/// Fixed identity of the (simulated) camera application, checked by the
/// verifier against its approved set.
inline Hash32 camera_app_identity() { return sha256("vron-camera-app/1"); }

struct SignedSegment {
  Bytes container_bytes;      // VRONC bytes (F)
  ProvenanceRecord provenance;  // PI; camera device info included
  Signature sig_f{};          // over container_bytes
  Signature sig_pi{};         // over canonical_encode(provenance)

  /// Cert_cam analog: the camera device info is part of the provenance and
  /// is exposed here for callers that want it separately.
  const CameraDeviceInfo& camera_certificate_bundle() const { return provenance.camera; }

  bool operator==(const SignedSegment&) const = default;
};

class RecordingSession {
public:
  /// Generates the session keypair and runs the first attestation round with
  /// the hash of the public key as nonce. A seed source may be injected for
  /// reproducible sessions.
  static RecordingSession begin(const Authority& authority, DeviceState device_state,
                                const Hash32& app_identity = camera_app_identity(),
                                const KeySeedSource& seeds = nullptr) {
    RecordingSession s;
    s.authority_ = &authority;
    s.keypair_ = seeds ? keypair_from_seed(seeds()) : generate_keypair();
    s.device_state_ = device_state;
    s.app_identity_ = app_identity;
    s.video_id_ = compute_video_id(s.keypair_.public_key);
    s.report_before_ = issue_camera_report(authority, s.video_id_, device_state, app_identity);
    return s;
  }

  SignedSegment capture_segment(const std::vector<RawFrame>& frames, std::uint32_t segment_id,
                                std::uint32_t total_segments, FrameRate frame_rate,
                                std::uint64_t timestamp, const Bytes& audio = {}) {
    if (finished_) fail(ErrorCode::SessionFinished, "capture after finish_recording");
    if (frames.empty()) fail(ErrorCode::EmptySegment, "a segment needs at least one frame");
    const std::uint32_t w = frames.front().width, h = frames.front().height;
    for (const auto& f : frames)
      if (f.width != w || f.height != h)
        fail(ErrorCode::MixedDimensions, "all frames in a segment must share dimensions");

    VideoSegmentData data;
    data.frames = frames;
    data.fps = frame_rate;
    data.audio = audio;

    SignedSegment seg;
    seg.container_bytes = vronc_encode(data);
    seg.provenance.video = {video_id_, timestamp, w, h};
    seg.provenance.segment = {segment_id, total_segments, frame_rate,
                              static_cast<std::uint32_t>(frames.size())};
    seg.provenance.camera.report_before = report_before_;
    // Post-capture attestation round for this segment.
    seg.provenance.camera.report_after =
        issue_camera_report(*authority_, video_id_, device_state_, app_identity_);
    seg.provenance.camera.camera_certificate = keypair_.public_key;
    seg.sig_f = sign(keypair_.private_key, seg.container_bytes);
    seg.sig_pi = sign(keypair_.private_key, canonical_encode(seg.provenance));
    captured_segments_.push_back(seg);
    return seg;
  }

  /// Final attestation round; afterwards the private key is erased and the
  /// session refuses further captures.
  AttestationReport finish_recording() {
    if (finished_) fail(ErrorCode::SessionFinished, "finish_recording called twice");
    AttestationReport report_after =
        issue_camera_report(*authority_, video_id_, device_state_, app_identity_);
    keypair_.zeroize();
    finished_ = true;
    return report_after;
  }

  const KeyPair& keypair() const { return keypair_; }
  const Hash32& video_id() const { return video_id_; }
  const AttestationReport& report_before() const { return report_before_; }
  const std::vector<SignedSegment>& captured_segments() const { return captured_segments_; }
  bool finished() const { return finished_; }

private:
  RecordingSession() = default;

  const Authority* authority_ = nullptr;
  KeyPair keypair_;
  DeviceState device_state_ = DeviceState::Genuine;
  Hash32 app_identity_{};
  Hash32 video_id_{};
  AttestationReport report_before_;
  std::vector<SignedSegment> captured_segments_;
  bool finished_ = false;
};

inline RecordingSession begin_recording(const Authority& authority, DeviceState device_state,
                                        const Hash32& app_identity = camera_app_identity(),
                                        const KeySeedSource& seeds = nullptr) {
  return RecordingSession::begin(authority, device_state, app_identity, seeds);
}

// ---------------------------------------------------------------------------
// Serialization of signed segments (wire payload and 0x13 file section)

inline Bytes encode_signed_segment(const SignedSegment& s) {
  Bytes b;
  ByteWriter w(b);
  w.blob32(s.container_bytes);
  w.blob32(canonical_encode(s.provenance));
  w.raw(s.sig_f.data(), s.sig_f.size());
  w.raw(s.sig_pi.data(), s.sig_pi.size());
  return b;
}

inline SignedSegment decode_signed_segment(const Bytes& b) {
  ByteReader r(b);
  SignedSegment s;
  s.container_bytes = r.blob32();
  Bytes prov = r.blob32();
  Bytes sig_f = r.raw(kSignatureBytes);
  Bytes sig_pi = r.raw(kSignatureBytes);
  if (r.failed() || !r.done()) fail(ErrorCode::MalformedMessage, "bad signed segment framing");
  s.provenance = decode_record(prov);
  std::memcpy(s.sig_f.data(), sig_f.data(), kSignatureBytes);
  std::memcpy(s.sig_pi.data(), sig_pi.data(), kSignatureBytes);
  return s;
}

inline Bytes encode_segment_file(const SignedSegment& s) {
  return wrap_section(SectionTag::SignedSegment, encode_signed_segment(s));
}

inline SignedSegment decode_segment_file(const Bytes& file) {
  return decode_signed_segment(
      unwrap_section(file, SectionTag::SignedSegment, ErrorCode::MalformedMessage));
}

// ---------------------------------------------------------------------------
// File helpers

inline Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::IoError, "cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()),
            static_cast<std::streamsize>(data.size()));
  if (!out) fail(ErrorCode::IoError, "short write to " + path);
}

/// Reads raw frames from a VRONC file (the stand-in for pre-recorded
/// footage).
inline std::vector<RawFrame> load_frames_from_file(const std::string& path) {
  Bytes data = read_file(path);
  if (data.empty()) fail(ErrorCode::MalformedContainer, "empty container file: " + path);
  return vronc_decode(data).frames;
}

}  // namespace vron
