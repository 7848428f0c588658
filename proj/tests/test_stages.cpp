#include "test_support.hpp"

#include <algorithm>

using namespace vron;
using vtest::expect_error;
using vtest::HonestSetup;

namespace {

struct StageRig {
  HonestSetup env;
  StageWorker dec, f1, enc;

  static StageRig make(std::uint32_t frames = 6) {
    HonestSetup env = HonestSetup::make(frames, 32, 24);
    StageWorker dec = env.worker(StageRole::Decoder, decoder_measurement(), "rig-dec");
    StageWorker f1 = env.worker(StageRole::Filter, filter_measurement("blur"), "rig-f1");
    StageWorker enc = env.worker(StageRole::Encoder, encoder_measurement(), "rig-enc");
    return {std::move(env), std::move(dec), std::move(f1), std::move(enc)};
  }
};

}  // namespace

TEST_CASE("decoder splits an honest segment into tagged frames and a sidecar") {
  StageRig rig = StageRig::make(60);
  DecoderOutput out = decoder_run(rig.env.segment, rig.env.trust, rig.dec.key, rig.dec.cert);

  REQUIRE(out.frames.size() == 60);
  for (std::uint32_t i = 0; i < 60; ++i) {
    const FrameMessage& m = out.frames[i];
    CHECK(m.per_frame_provenance.frame_tag.frame_id == i);
    CHECK(m.per_frame_provenance.video_id == rig.env.segment.provenance.video.video_id);
    CHECK(m.per_frame_provenance.total_frames == 60);
    CHECK(m.per_frame_provenance.filters_so_far.empty());
    CHECK(verify(rig.dec.cert.stage_public_key, m.signing_bytes(), m.producer_signature));
  }
  CHECK(out.sidecar.provenance_remainder.codec.has_value());
  CHECK(out.sidecar.provenance_remainder.codec->decoder_measurement == rig.dec.cert.measurement);
  CHECK(out.sidecar.audio.has_value());
  CHECK(verify(rig.dec.cert.stage_public_key, out.sidecar.signing_bytes(),
               out.sidecar.decoder_signature));
}

TEST_CASE("decoder rejects bad camera input") {
  StageRig rig = StageRig::make(4);

  SECTION("altered provenance breaks Sig_PI") {
    SignedSegment bad = rig.env.segment;
    bad.provenance.video.timestamp += 1;
    expect_error(ErrorCode::CameraSigInvalid,
                 [&] { decoder_run(bad, rig.env.trust, rig.dec.key, rig.dec.cert); });
  }
  SECTION("altered container breaks Sig_F") {
    SignedSegment bad = rig.env.segment;
    bad.container_bytes[100] ^= 0x01;
    expect_error(ErrorCode::CameraSigInvalid,
                 [&] { decoder_run(bad, rig.env.trust, rig.dec.key, rig.dec.cert); });
  }
  SECTION("frame count disagreement between container and provenance") {
    // A compromised camera signs an inconsistent record (container says 4,
    // provenance says 3): only the structural cross-check can catch this.
    Authority authority = vtest::make_authority(123, 0);
    auto seeds = counter_seed_source("fc-mismatch");
    RecordingSession session =
        begin_recording(authority, DeviceState::Genuine, camera_app_identity(), seeds);
    SignedSegment lying =
        session.capture_segment(synthetic_frames(4, 16, 12), 0, 1, {30, 1}, 99);
    lying.provenance.segment.total_frames = 3;
    lying.sig_pi = sign(session.keypair().private_key, canonical_encode(lying.provenance));
    TrustRoots trust = standard_trust_roots(authority.public_key());
    StageWorker dec = make_worker(authority, StageRole::Decoder, decoder_measurement(),
                                  counter_seed_source("fc-dec"), 1);
    expect_error(ErrorCode::FrameCountMismatch,
                 [&] { decoder_run(lying, trust, dec.key, dec.cert); });
  }
  SECTION("nonce mismatch in authority-signed reports") {
    // A compromised camera embeds genuine authority reports issued for a
    // different nonce and re-signs its provenance.
    Authority authority = vtest::make_authority(123, 0);
    auto seeds = counter_seed_source("nonce-mismatch");
    RecordingSession session =
        begin_recording(authority, DeviceState::Genuine, camera_app_identity(), seeds);
    SignedSegment bad = session.capture_segment(synthetic_frames(4, 16, 12), 0, 1, {30, 1}, 99);
    Hash32 other = sha256("some-other-video");
    bad.provenance.camera.report_before =
        issue_camera_report(authority, other, DeviceState::Genuine, camera_app_identity());
    bad.provenance.camera.report_after = bad.provenance.camera.report_before;
    bad.sig_pi = sign(session.keypair().private_key, canonical_encode(bad.provenance));
    TrustRoots trust = standard_trust_roots(authority.public_key());
    StageWorker dec = make_worker(authority, StageRole::Decoder, decoder_measurement(),
                                  counter_seed_source("nm-dec"), 1);
    expect_error(ErrorCode::NonceMismatch,
                 [&] { decoder_run(bad, trust, dec.key, dec.cert); });
  }
  SECTION("wrong role certificate rejected") {
    expect_error(ErrorCode::UpstreamCertUntrusted,
                 [&] { decoder_run(rig.env.segment, rig.env.trust, rig.f1.key, rig.f1.cert); });
  }
}

TEST_CASE("filter stage verifies, transforms, appends, re-signs") {
  StageRig rig = StageRig::make(4);
  DecoderOutput dec_out = decoder_run(rig.env.segment, rig.env.trust, rig.dec.key, rig.dec.cert);

  FilterSpec blur = parse_filter_spec("blur:7");
  FilterStage stage(rig.env.trust, blur, rig.f1.key, rig.f1.cert);
  stage.pin_upstream(rig.dec.cert);

  FrameMessage out = stage.process(dec_out.frames[2]);
  REQUIRE(out.per_frame_provenance.filters_so_far.size() == 1);
  const FilterEntry& entry = out.per_frame_provenance.filters_so_far[0];
  CHECK(entry.name == "blur");
  CHECK(entry.measurement == rig.f1.cert.measurement);
  CHECK(entry.measurement == filter_measurement("blur"));
  CHECK(entry.parameters == std::vector<std::int64_t>{fixed_from_int(7)});
  CHECK(out.frame == apply_pixel_filter(blur, dec_out.frames[2].frame));
  CHECK(verify(rig.f1.cert.stage_public_key, out.signing_bytes(), out.producer_signature));

  SECTION("flipped pixel after signing is rejected") {
    FrameMessage bad = dec_out.frames[1];
    bad.frame.pixels[5] ^= 0x01;
    expect_error(ErrorCode::UpstreamSigInvalid, [&] { stage.process(bad); });
  }
  SECTION("upstream certificate from a different authority is rejected") {
    Authority rogue = vtest::make_authority(1, 0);
    StageCertificate forged = issue_stage_certificate(
        rogue, rig.dec.cert.stage_public_key, decoder_measurement(), StageRole::Decoder);
    FilterStage other(rig.env.trust, blur, rig.f1.key, rig.f1.cert);
    expect_error(ErrorCode::UpstreamCertUntrusted, [&] { other.pin_upstream(forged); });
  }
  SECTION("frames are rejected until an upstream is pinned") {
    FilterStage unpinned(rig.env.trust, blur, rig.f1.key, rig.f1.cert);
    expect_error(ErrorCode::UpstreamCertUntrusted,
                 [&] { unpinned.process(dec_out.frames[0]); });
  }
}

TEST_CASE("encoder merges verified frames into a final bundle") {
  StageRig rig = StageRig::make(6);
  DecoderOutput dec_out = decoder_run(rig.env.segment, rig.env.trust, rig.dec.key, rig.dec.cert);

  FinalBundle bundle = encoder_run(dec_out.frames, dec_out.sidecar, rig.env.trust, rig.enc.key,
                                   rig.enc.cert, rig.dec.cert, {rig.dec.cert});

  CHECK(verify(rig.enc.cert.stage_public_key, bundle.container_bytes, bundle.sig_f_prime));
  CHECK(verify(rig.enc.cert.stage_public_key, canonical_encode(bundle.provenance),
               bundle.sig_pi_prime));
  REQUIRE(bundle.provenance.codec.has_value());
  CHECK(bundle.provenance.codec->decoder_measurement == rig.dec.cert.measurement);
  CHECK(bundle.provenance.codec->encoder_measurement == rig.enc.cert.measurement);
  VideoSegmentData data = vronc_decode(bundle.container_bytes);
  CHECK(data.frames.size() == 6);
  CHECK(data.audio == to_bytes("audio-blob"));
  for (std::uint32_t i = 0; i < data.frames.size(); ++i) CHECK(read_watermark(data.frames[i]) == i);

  SECTION("missing frame") {
    auto partial = dec_out.frames;
    partial.erase(partial.begin() + 3);
    expect_error(ErrorCode::MissingFrames, [&] {
      encoder_run(partial, dec_out.sidecar, rig.env.trust, rig.enc.key, rig.enc.cert,
                  rig.dec.cert);
    });
  }
  SECTION("duplicate frame tag") {
    auto dup = dec_out.frames;
    dup[4] = dup[3];
    expect_error(ErrorCode::DuplicateFrame, [&] {
      encoder_run(dup, dec_out.sidecar, rig.env.trust, rig.enc.key, rig.enc.cert, rig.dec.cert);
    });
  }
  SECTION("frame from another video with the same tag") {
    // Same decoder worker processes a different camera's segment, so the
    // signature verifies but the video id differs.
    HonestSetup other = HonestSetup::make(6, 32, 24, /*seed=*/777);
    // share the authority's trust anchor by re-issuing the decoder cert
    StageWorker dec2{2, rig.dec.key, rig.dec.cert};
    DecoderOutput other_out =
        decoder_run(other.segment,
                    standard_trust_roots(other.authority.public_key()), dec2.key, dec2.cert);
    auto mixed = dec_out.frames;
    mixed[2] = other_out.frames[2];
    expect_error(ErrorCode::ProvenanceMismatch, [&] {
      encoder_run(mixed, dec_out.sidecar, rig.env.trust, rig.enc.key, rig.enc.cert,
                  rig.dec.cert);
    });
  }
  SECTION("out-of-order arrival is fine; output is ordered by tag") {
    auto shuffled = dec_out.frames;
    std::mt19937_64 rng(5);
    std::shuffle(shuffled.begin(), shuffled.end(), rng);
    FinalBundle b = encoder_run(shuffled, dec_out.sidecar, rig.env.trust, rig.enc.key,
                                rig.enc.cert, rig.dec.cert);
    VideoSegmentData d = vronc_decode(b.container_bytes);
    for (std::uint32_t i = 0; i < d.frames.size(); ++i) CHECK(read_watermark(d.frames[i]) == i);
  }
  SECTION("tampered sidecar audio") {
    SegmentSidecar bad = dec_out.sidecar;
    (*bad.audio)[0] ^= 0x01;
    expect_error(ErrorCode::AudioSigInvalid, [&] {
      encoder_run(dec_out.frames, bad, rig.env.trust, rig.enc.key, rig.enc.cert, rig.dec.cert);
    });
  }
  SECTION("missing sidecar") {
    EncoderStage stage(rig.env.trust, rig.enc.key, rig.enc.cert);
    stage.pin_upstream(rig.dec.cert);
    for (const auto& m : dec_out.frames) stage.add_frame(m);
    expect_error(ErrorCode::MissingSidecar, [&] { stage.finalize(); });
  }
}

TEST_CASE("chain rule: tampering at each hand-off is caught at the next stage") {
  StageRig rig = StageRig::make(5);
  FilterSpec blur = parse_filter_spec("blur:3");

  // hand-off 1: camera -> decoder
  {
    SignedSegment tampered = rig.env.segment;
    tampered.container_bytes[200] ^= 0xff;
    expect_error(ErrorCode::CameraSigInvalid,
                 [&] { decoder_run(tampered, rig.env.trust, rig.dec.key, rig.dec.cert); });
  }

  DecoderOutput dec_out = decoder_run(rig.env.segment, rig.env.trust, rig.dec.key, rig.dec.cert);

  // hand-off 2: decoder -> filter
  {
    FilterStage stage(rig.env.trust, blur, rig.f1.key, rig.f1.cert);
    stage.pin_upstream(rig.dec.cert);
    FrameMessage tampered = dec_out.frames[0];
    tampered.per_frame_provenance.segment_id ^= 1;
    expect_error(ErrorCode::UpstreamSigInvalid, [&] { stage.process(tampered); });
  }

  // hand-off 3: filter -> encoder
  {
    FilterStage stage(rig.env.trust, blur, rig.f1.key, rig.f1.cert);
    stage.pin_upstream(rig.dec.cert);
    std::vector<FrameMessage> filtered;
    for (const auto& m : dec_out.frames) filtered.push_back(stage.process(m));
    filtered[2].frame.pixels[0] ^= 0x01;
    EncoderStage enc(rig.env.trust, rig.enc.key, rig.enc.cert);
    enc.pin_upstream(rig.f1.cert);
    expect_error(ErrorCode::UpstreamSigInvalid, [&] {
      for (const auto& m : filtered) enc.add_frame(m);
    });
  }
}

TEST_CASE("staged pipeline pixels equal the monolithic six-filter baseline") {
  StageRig rig = StageRig::make(4);
  std::vector<FilterSpec> chain;
  for (const auto& arg : {"blur:7", "sharpen:7", "brightness:-0.2", "grayscale", "denoise",
                          "white_balance"})
    chain.push_back(parse_filter_spec(arg));

  // staged: decoder -> 6 filter stages -> encoder
  DecoderOutput dec_out = decoder_run(rig.env.segment, rig.env.trust, rig.dec.key, rig.dec.cert);
  std::vector<FrameMessage> frames = dec_out.frames;
  StageCertificate upstream = rig.dec.cert;
  std::vector<StageCertificate> certs = {rig.dec.cert};
  int n = 0;
  for (const auto& spec : chain) {
    StageWorker w = rig.env.worker(StageRole::Filter, filter_measurement(spec.name),
                                   "mono-eq-" + std::to_string(n++));
    FilterStage stage(rig.env.trust, spec, w.key, w.cert);
    stage.pin_upstream(upstream);
    for (auto& m : frames) m = stage.process(m);
    upstream = w.cert;
    certs.push_back(w.cert);
  }
  FinalBundle bundle = encoder_run(frames, dec_out.sidecar, rig.env.trust, rig.enc.key,
                                   rig.enc.cert, upstream, certs);

  // monolithic: plain loop over the same chain
  VideoSegmentData plain = vronc_decode(rig.env.segment.container_bytes);
  plain.frames = apply_filter_chain(chain, std::move(plain.frames));
  Bytes monolithic = vronc_encode(plain);

  CHECK(bundle.container_bytes == monolithic);

  // filter order is recorded in application order
  REQUIRE(bundle.provenance.filters.size() == chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i)
    CHECK(bundle.provenance.filters[i].name == chain[i].name);
}

TEST_CASE("frame and sidecar messages survive wire serialization") {
  StageRig rig = StageRig::make(3);
  DecoderOutput dec_out = decoder_run(rig.env.segment, rig.env.trust, rig.dec.key, rig.dec.cert);

  Bytes fm = encode_frame_message(dec_out.frames[1]);
  FrameMessage fback = decode_frame_message(fm);
  CHECK(fback.frame == dec_out.frames[1].frame);
  CHECK(fback.per_frame_provenance == dec_out.frames[1].per_frame_provenance);
  CHECK(fback.producer_signature == dec_out.frames[1].producer_signature);
  CHECK(fback.producer_certificate == dec_out.frames[1].producer_certificate);

  Bytes sc = encode_sidecar(dec_out.sidecar);
  SegmentSidecar sback = decode_sidecar(sc);
  CHECK(sback.provenance_remainder == dec_out.sidecar.provenance_remainder);
  CHECK(sback.audio == dec_out.sidecar.audio);

  FinalBundle bundle = encoder_run(dec_out.frames, dec_out.sidecar, rig.env.trust, rig.enc.key,
                                   rig.enc.cert, rig.dec.cert, {rig.dec.cert});
  FinalBundle bback = decode_bundle_file(encode_bundle_file(bundle));
  CHECK(bback.container_bytes == bundle.container_bytes);
  CHECK(bback.provenance == bundle.provenance);
  CHECK(bback.sig_f_prime == bundle.sig_f_prime);
  CHECK(bback.stage_certificates.size() == 1);
}
