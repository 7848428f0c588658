#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "vron/attest.hpp"
#include "vron/camera.hpp"
#include "vron/crypto.hpp"
#include "vron/filters.hpp"
#include "vron/provenance.hpp"
#include "vron/video.hpp"

namespace vron {

// Fixed-function pipeline stages. Each stage verifies the signature on its
// input, transforms it, extends the provenance, and signs its output with
// its own key (chain verification): the consumer only ever checks the final
// stage's signature plus every stage's certificate.
//
// The decoder splits provenance: a small per-frame slice travels with each
// frame through the filter chain, while the heavyweight remainder (camera
// attestation reports, timestamps, totals) goes straight to the encoder as a
// sidecar. The encoder checks that all slices agree, that the frame tags are
// exactly {0..total_frames-1}, merges the provenance back together, and
// signs the final container and record.

inline Measurement decoder_measurement() {
  return measure_stage(StageRole::Decoder, "vronc-decoder", "v1");
}

inline Measurement encoder_measurement() {
  return measure_stage(StageRole::Encoder, "vronc-encoder", "v1");
}

// ---------------------------------------------------------------------------
// Inter-stage message types

struct FrameMessage {
  RawFrame frame;
  PerFrameProvenance per_frame_provenance;
  Signature producer_signature{};  // over signing_bytes()
  StageCertificate producer_certificate;

  /// Canonical bytes covered by producer_signature: frame dimensions and
  /// pixels, then the per-frame provenance encoding.
  Bytes signing_bytes() const {
    Bytes b;
    ByteWriter w(b);
    w.u32(frame.width);
    w.u32(frame.height);
    w.raw(frame.pixels);
    w.blob32(canonical_encode(per_frame_provenance));
    return b;
  }
};

struct SegmentSidecar {
  ProvenanceRecord provenance_remainder;  // full record; codec holds the decoder measurement
  std::optional<Bytes> audio;
  Signature decoder_signature{};  // over signing_bytes()
  StageCertificate decoder_certificate;

  Bytes signing_bytes() const {
    Bytes b;
    ByteWriter w(b);
    w.blob32(canonical_encode(provenance_remainder));
    w.u8(audio ? 1 : 0);
    w.blob32(audio ? *audio : Bytes{});
    return b;
  }
};

struct FinalBundle {
  Bytes container_bytes;        // F': VRONC
  ProvenanceRecord provenance;  // PI': filters + codec + camera, no frame tags
  Signature sig_f_prime{};
  Signature sig_pi_prime{};
  StageCertificate encoder_certificate;
  std::vector<StageCertificate> stage_certificates;  // decoder and each filter
};

// ---------------------------------------------------------------------------
// Wire/file serialization for stage messages

inline Bytes encode_frame_message(const FrameMessage& m) {
  Bytes b = m.signing_bytes();
  ByteWriter w(b);
  w.raw(m.producer_signature.data(), m.producer_signature.size());
  w.blob32(m.producer_certificate.encode());
  return b;
}

inline FrameMessage decode_frame_message(const Bytes& b) {
  ByteReader r(b);
  FrameMessage m;
  m.frame.width = r.u32();
  m.frame.height = r.u32();
  if (r.failed()) fail(ErrorCode::MalformedMessage, "truncated frame message header");
  std::size_t px = static_cast<std::size_t>(m.frame.width) * m.frame.height * 3;
  if (m.frame.width == 0 || m.frame.height == 0 || r.remaining() < px)
    fail(ErrorCode::MalformedMessage, "malformed frame in message");
  m.frame.pixels = r.raw(px);
  Bytes pfp = r.blob32();
  Bytes sig = r.raw(kSignatureBytes);
  Bytes cert = r.blob32();
  if (r.failed() || !r.done()) fail(ErrorCode::MalformedMessage, "bad frame message framing");
  m.per_frame_provenance = decode_per_frame(pfp);
  std::memcpy(m.producer_signature.data(), sig.data(), kSignatureBytes);
  m.producer_certificate = StageCertificate::decode(cert);
  return m;
}

inline Bytes encode_sidecar(const SegmentSidecar& s) {
  Bytes b = s.signing_bytes();
  ByteWriter w(b);
  w.raw(s.decoder_signature.data(), s.decoder_signature.size());
  w.blob32(s.decoder_certificate.encode());
  return b;
}

inline SegmentSidecar decode_sidecar(const Bytes& b) {
  ByteReader r(b);
  SegmentSidecar s;
  Bytes remainder = r.blob32();
  std::uint8_t has_audio = r.u8();
  Bytes audio = r.blob32();
  Bytes sig = r.raw(kSignatureBytes);
  Bytes cert = r.blob32();
  if (r.failed() || !r.done() || has_audio > 1)
    fail(ErrorCode::MalformedMessage, "bad sidecar framing");
  s.provenance_remainder = decode_record(remainder);
  if (has_audio) s.audio = std::move(audio);
  std::memcpy(s.decoder_signature.data(), sig.data(), kSignatureBytes);
  s.decoder_certificate = StageCertificate::decode(cert);
  return s;
}

inline Bytes encode_final_bundle(const FinalBundle& f) {
  Bytes b;
  ByteWriter w(b);
  w.blob32(f.container_bytes);
  w.blob32(canonical_encode(f.provenance));
  w.raw(f.sig_f_prime.data(), f.sig_f_prime.size());
  w.raw(f.sig_pi_prime.data(), f.sig_pi_prime.size());
  w.blob32(f.encoder_certificate.encode());
  w.u32(static_cast<std::uint32_t>(f.stage_certificates.size()));
  for (const auto& c : f.stage_certificates) w.blob32(c.encode());
  return b;
}

inline FinalBundle decode_final_bundle(const Bytes& b) {
  ByteReader r(b);
  FinalBundle f;
  f.container_bytes = r.blob32();
  Bytes prov = r.blob32();
  Bytes sig_f = r.raw(kSignatureBytes);
  Bytes sig_pi = r.raw(kSignatureBytes);
  Bytes enc_cert = r.blob32();
  std::uint32_t n = r.u32();
  std::vector<Bytes> certs;
  for (std::uint32_t i = 0; i < n && !r.failed(); ++i) certs.push_back(r.blob32());
  if (r.failed() || !r.done()) fail(ErrorCode::MalformedMessage, "bad bundle framing");
  f.provenance = decode_record(prov);
  std::memcpy(f.sig_f_prime.data(), sig_f.data(), kSignatureBytes);
  std::memcpy(f.sig_pi_prime.data(), sig_pi.data(), kSignatureBytes);
  f.encoder_certificate = StageCertificate::decode(enc_cert);
  for (const auto& c : certs) f.stage_certificates.push_back(StageCertificate::decode(c));
  return f;
}

inline Bytes encode_bundle_file(const FinalBundle& f) {
  return wrap_section(SectionTag::FinalBundle, encode_final_bundle(f));
}

inline FinalBundle decode_bundle_file(const Bytes& file) {
  return decode_final_bundle(
      unwrap_section(file, SectionTag::FinalBundle, ErrorCode::MalformedMessage));
}

// ---------------------------------------------------------------------------
// Decoder

struct DecoderOutput {
  std::vector<FrameMessage> frames;
  SegmentSidecar sidecar;
};

class DecoderStage {
public:
  DecoderStage(TrustRoots trust, KeyPair key, StageCertificate cert)
      : trust_(std::move(trust)), key_(std::move(key)), cert_(std::move(cert)) {
    if (cert_.role != StageRole::Decoder)
      fail(ErrorCode::UpstreamCertUntrusted, "decoder stage needs a decoder certificate");
  }

  /// Verifies the camera's signatures and attestation nonces, decodes the
  /// container, splits provenance into per-frame slices plus the sidecar,
  /// and signs every output.
  DecoderOutput run(const SignedSegment& input) const {
    // Work only on a private copy of the input, taken before any check, so
    // nothing outside the stage can swap bytes between verification and use.
    const SignedSegment segment = input;

    const Bytes& camera_pk = segment.provenance.camera.camera_certificate;
    if (camera_pk.empty()) fail(ErrorCode::CameraSigInvalid, "missing camera public key");
    if (compute_video_id(camera_pk) != segment.provenance.video.video_id)
      fail(ErrorCode::CameraSigInvalid, "video_id does not match camera public key hash");
    if (!verify_report(trust_.attestation_authority_public_key,
                       segment.provenance.camera.report_before) ||
        !verify_report(trust_.attestation_authority_public_key,
                       segment.provenance.camera.report_after))
      fail(ErrorCode::CameraSigInvalid, "camera attestation report signature invalid");
    if (segment.provenance.camera.report_before.nonce != segment.provenance.video.video_id ||
        segment.provenance.camera.report_after.nonce != segment.provenance.video.video_id)
      fail(ErrorCode::NonceMismatch, "attestation nonce does not equal video_id");
    if (!verify(camera_pk, canonical_encode(segment.provenance), segment.sig_pi))
      fail(ErrorCode::CameraSigInvalid, "Sig_PI invalid");
    if (!verify(camera_pk, segment.container_bytes, segment.sig_f))
      fail(ErrorCode::CameraSigInvalid, "Sig_F invalid");

    VideoSegmentData data = vronc_decode(segment.container_bytes);
    if (data.frames.size() != segment.provenance.segment.total_frames)
      fail(ErrorCode::FrameCountMismatch,
           "container has " + std::to_string(data.frames.size()) + " frames, provenance says " +
               std::to_string(segment.provenance.segment.total_frames));

    DecoderOutput out;
    out.frames.reserve(data.frames.size());
    for (std::uint32_t i = 0; i < data.frames.size(); ++i) {
      FrameMessage m;
      m.frame = std::move(data.frames[i]);
      m.per_frame_provenance.video_id = segment.provenance.video.video_id;
      m.per_frame_provenance.segment_id = segment.provenance.segment.segment_id;
      m.per_frame_provenance.total_frames = segment.provenance.segment.total_frames;
      m.per_frame_provenance.frame_tag = {i};
      m.producer_signature = sign(key_.private_key, m.signing_bytes());
      m.producer_certificate = cert_;
      out.frames.push_back(std::move(m));
    }

    out.sidecar.provenance_remainder = segment.provenance;
    out.sidecar.provenance_remainder.codec = CodecInfo{cert_.measurement, Measurement{}};
    if (!data.audio.empty()) out.sidecar.audio = data.audio;
    out.sidecar.decoder_signature = sign(key_.private_key, out.sidecar.signing_bytes());
    out.sidecar.decoder_certificate = cert_;
    return out;
  }

  const StageCertificate& certificate() const { return cert_; }

private:
  TrustRoots trust_;
  KeyPair key_;
  StageCertificate cert_;
};

inline DecoderOutput decoder_run(const SignedSegment& segment, const TrustRoots& trust,
                                 KeyPair stage_key, StageCertificate cert) {
  return DecoderStage(trust, std::move(stage_key), std::move(cert)).run(segment);
}

// ---------------------------------------------------------------------------
// Filter stage

class FilterStage {
public:
  FilterStage(TrustRoots trust, FilterSpec spec, KeyPair key, StageCertificate cert)
      : trust_(std::move(trust)), spec_(std::move(spec)), key_(std::move(key)),
        cert_(std::move(cert)) {
    validate_filter_spec(spec_);
    if (cert_.role != StageRole::Filter)
      fail(ErrorCode::UpstreamCertUntrusted, "filter stage needs a filter certificate");
  }

  /// Verifies the upstream certificate once and keeps the key for the rest
  /// of the pipeline; every frame is checked against this pinned key.
  void pin_upstream(const StageCertificate& upstream) {
    if (!verify_certificate(trust_.attestation_authority_public_key, upstream))
      fail(ErrorCode::UpstreamCertUntrusted, "upstream certificate not signed by authority");
    upstream_ = upstream;
  }

  FrameMessage process(const FrameMessage& input) const {
    if (!upstream_) fail(ErrorCode::UpstreamCertUntrusted, "no upstream certificate pinned");
    if (!input.frame.well_formed())
      fail(ErrorCode::UpstreamSigInvalid, "malformed frame rejected");
    if (input.producer_certificate != *upstream_)
      fail(ErrorCode::UpstreamSigInvalid, "producer certificate differs from pinned upstream");
    if (!verify(upstream_->stage_public_key, input.signing_bytes(), input.producer_signature))
      fail(ErrorCode::UpstreamSigInvalid, "frame signature does not verify under upstream key");

    FrameMessage out;
    out.frame = apply_pixel_filter(spec_, input.frame);
    out.per_frame_provenance = input.per_frame_provenance;
    out.per_frame_provenance.filters_so_far.push_back(
        FilterEntry{spec_.name, cert_.measurement, spec_.parameters});
    out.producer_signature = sign(key_.private_key, out.signing_bytes());
    out.producer_certificate = cert_;
    return out;
  }

  const StageCertificate& certificate() const { return cert_; }

private:
  TrustRoots trust_;
  FilterSpec spec_;
  KeyPair key_;
  StageCertificate cert_;
  std::optional<StageCertificate> upstream_;
};

inline FrameMessage filter_stage_run(const FrameMessage& input,
                                     const StageCertificate& upstream_cert,
                                     const TrustRoots& trust, const FilterSpec& spec,
                                     KeyPair stage_key, StageCertificate cert) {
  FilterStage stage(trust, spec, std::move(stage_key), std::move(cert));
  stage.pin_upstream(upstream_cert);
  return stage.process(input);
}

// ---------------------------------------------------------------------------
// Encoder

class EncoderStage {
public:
  EncoderStage(TrustRoots trust, KeyPair key, StageCertificate cert)
      : trust_(std::move(trust)), key_(std::move(key)), cert_(std::move(cert)) {
    if (cert_.role != StageRole::Encoder)
      fail(ErrorCode::UpstreamCertUntrusted, "encoder stage needs an encoder certificate");
  }

  void pin_upstream(const StageCertificate& upstream) {
    if (!verify_certificate(trust_.attestation_authority_public_key, upstream))
      fail(ErrorCode::UpstreamCertUntrusted, "upstream certificate not signed by authority");
    upstream_ = upstream;
  }

  /// Frames may arrive in any order; each is verified on arrival.
  void add_frame(const FrameMessage& m) {
    if (!upstream_) fail(ErrorCode::UpstreamCertUntrusted, "no upstream certificate pinned");
    if (!m.frame.well_formed()) fail(ErrorCode::UpstreamSigInvalid, "malformed frame rejected");
    if (m.producer_certificate != *upstream_)
      fail(ErrorCode::UpstreamSigInvalid, "producer certificate differs from pinned upstream");
    if (!verify(upstream_->stage_public_key, m.signing_bytes(), m.producer_signature))
      fail(ErrorCode::UpstreamSigInvalid, "frame signature does not verify under upstream key");
    frames_.push_back(m);
  }

  /// The sidecar's signature is checked against the decoder certificate it
  /// carries, which must itself verify under the authority.
  void set_sidecar(const SegmentSidecar& s) {
    if (!verify_certificate(trust_.attestation_authority_public_key, s.decoder_certificate) ||
        s.decoder_certificate.role != StageRole::Decoder)
      fail(ErrorCode::UpstreamCertUntrusted, "sidecar decoder certificate untrusted");
    if (!verify(s.decoder_certificate.stage_public_key, s.signing_bytes(), s.decoder_signature))
      fail(ErrorCode::AudioSigInvalid, "sidecar signature invalid");
    sidecar_ = s;
  }

  /// Relayed by the untrusted scheduler; the consumer re-verifies each one,
  /// so the encoder just carries them into the bundle.
  void add_stage_certificates(const std::vector<StageCertificate>& certs) {
    relayed_certs_ = certs;
  }

  FinalBundle finalize() const {
    if (!sidecar_) fail(ErrorCode::MissingSidecar, "no sidecar received");
    const ProvenanceRecord& remainder = sidecar_->provenance_remainder;
    const std::uint32_t total = remainder.segment.total_frames;

    // All per-frame provenance slices must agree on everything except the
    // frame tag, and must match the sidecar's record.
    std::vector<const FrameMessage*> ordered(total, nullptr);
    const std::vector<FilterEntry>* filters = nullptr;
    for (const auto& m : frames_) {
      const PerFrameProvenance& p = m.per_frame_provenance;
      if (p.video_id != remainder.video.video_id)
        fail(ErrorCode::ProvenanceMismatch, "frame video_id differs");
      if (p.segment_id != remainder.segment.segment_id)
        fail(ErrorCode::ProvenanceMismatch, "frame segment_id differs");
      if (p.total_frames != total)
        fail(ErrorCode::ProvenanceMismatch, "frame total_frames differs");
      if (m.frame.width != remainder.video.width || m.frame.height != remainder.video.height)
        fail(ErrorCode::ProvenanceMismatch, "frame dimensions differ from provenance");
      if (filters == nullptr)
        filters = &p.filters_so_far;
      else if (*filters != p.filters_so_far)
        fail(ErrorCode::ProvenanceMismatch, "frames disagree on applied filters");
      std::uint32_t tag = p.frame_tag.frame_id;
      if (tag >= total) fail(ErrorCode::ProvenanceMismatch, "frame tag out of range");
      if (ordered[tag] != nullptr)
        fail(ErrorCode::DuplicateFrame, "two frames carry tag " + std::to_string(tag));
      ordered[tag] = &m;
    }
    for (std::uint32_t t = 0; t < total; ++t)
      if (ordered[t] == nullptr)
        fail(ErrorCode::MissingFrames, "frame tag " + std::to_string(t) + " never arrived");

    VideoSegmentData data;
    data.fps = remainder.segment.frame_rate;
    data.frames.reserve(total);
    for (std::uint32_t t = 0; t < total; ++t) data.frames.push_back(ordered[t]->frame);
    if (sidecar_->audio) data.audio = *sidecar_->audio;

    FinalBundle bundle;
    bundle.container_bytes = vronc_encode(data);
    bundle.provenance = remainder;
    bundle.provenance.filters = filters ? *filters : std::vector<FilterEntry>{};
    CodecInfo codec = remainder.codec.value_or(CodecInfo{});
    codec.encoder_measurement = cert_.measurement;
    bundle.provenance.codec = codec;
    bundle.sig_f_prime = sign(key_.private_key, bundle.container_bytes);
    bundle.sig_pi_prime = sign(key_.private_key, canonical_encode(bundle.provenance));
    bundle.encoder_certificate = cert_;
    bundle.stage_certificates = relayed_certs_;
    return bundle;
  }

  const StageCertificate& certificate() const { return cert_; }

private:
  TrustRoots trust_;
  KeyPair key_;
  StageCertificate cert_;
  std::optional<StageCertificate> upstream_;
  std::optional<SegmentSidecar> sidecar_;
  std::vector<FrameMessage> frames_;
  std::vector<StageCertificate> relayed_certs_;
};

inline FinalBundle encoder_run(const std::vector<FrameMessage>& frames,
                               const SegmentSidecar& sidecar, const TrustRoots& trust,
                               KeyPair stage_key, StageCertificate cert,
                               const StageCertificate& upstream_cert,
                               const std::vector<StageCertificate>& relayed_certs = {}) {
  EncoderStage stage(trust, std::move(stage_key), std::move(cert));
  stage.pin_upstream(upstream_cert);
  stage.set_sidecar(sidecar);
  stage.add_stage_certificates(relayed_certs);
  for (const auto& m : frames) stage.add_frame(m);
  return stage.finalize();
}

}  // namespace vron
