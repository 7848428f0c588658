#include "test_support.hpp"

#include <cstdio>
#include <filesystem>

using namespace vron;
using vtest::expect_error;
using vtest::make_authority;

TEST_CASE("begin_recording binds the attestation nonce to the session key") {
  Authority authority = make_authority();
  RecordingSession s1 = begin_recording(authority, DeviceState::Genuine);
  RecordingSession s2 = begin_recording(authority, DeviceState::Genuine);

  CHECK(s1.keypair().public_key != s2.keypair().public_key);
  CHECK(s1.video_id() != s2.video_id());
  CHECK(s1.report_before().nonce == compute_video_id(s1.keypair().public_key));
  CHECK(verify_report(authority.public_key(), s1.report_before()));
}

TEST_CASE("capture_segment produces a fully signed segment") {
  Authority authority = make_authority();
  RecordingSession session = begin_recording(authority, DeviceState::Genuine);

  SECTION("720p x 60 frames carries the right dimensions and counts") {
    auto frames = synthetic_frames(60, 1280, 720);
    SignedSegment seg = session.capture_segment(frames, 0, 1, {30, 1}, 1700000000);
    CHECK(seg.provenance.video.width == 1280);
    CHECK(seg.provenance.video.height == 720);
    CHECK(seg.provenance.segment.total_frames == 60);
    CHECK(seg.provenance.filters.empty());
    CHECK_FALSE(seg.provenance.codec.has_value());
    CHECK(seg.provenance.video.video_id == session.video_id());
    CHECK(verify(session.keypair().public_key, seg.container_bytes, seg.sig_f));
    CHECK(verify(session.keypair().public_key, canonical_encode(seg.provenance), seg.sig_pi));
    CHECK(seg.camera_certificate_bundle().camera_certificate == session.keypair().public_key);
  }

  SECTION("minimal one-frame 2x2 segment verifies") {
    RawFrame tiny;
    tiny.width = 2;
    tiny.height = 2;
    tiny.pixels = Bytes(12, 0x7f);
    SignedSegment seg = session.capture_segment({tiny}, 0, 1, {30, 1}, 1);
    CHECK(verify(session.keypair().public_key, seg.container_bytes, seg.sig_f));
    CHECK(verify(session.keypair().public_key, canonical_encode(seg.provenance), seg.sig_pi));
  }

  SECTION("mismatched frame dimensions are rejected") {
    std::vector<RawFrame> mixed = {synthetic_frame(0, 8, 8), synthetic_frame(1, 8, 6)};
    expect_error(ErrorCode::MixedDimensions,
                 [&] { session.capture_segment(mixed, 0, 1, {30, 1}, 1); });
  }

  SECTION("empty segment rejected") {
    expect_error(ErrorCode::EmptySegment, [&] { session.capture_segment({}, 0, 1, {30, 1}, 1); });
  }
}

TEST_CASE("single-byte tampers break the corresponding camera signature") {
  Authority authority = make_authority();
  RecordingSession session = begin_recording(authority, DeviceState::Genuine);
  SignedSegment seg = session.capture_segment(synthetic_frames(3, 16, 12), 0, 1, {30, 1}, 5);
  std::mt19937_64 rng(17);

  Bytes container = seg.container_bytes;
  container[rng() % container.size()] ^= 0x01;
  CHECK_FALSE(verify(session.keypair().public_key, container, seg.sig_f));

  ProvenanceRecord prov = seg.provenance;
  prov.segment.total_frames += 1;
  CHECK_FALSE(verify(session.keypair().public_key, canonical_encode(prov), seg.sig_pi));
}

TEST_CASE("finish_recording zeroizes the key and closes the session") {
  Authority authority = make_authority(1700000000, 1);  // advancing clock
  RecordingSession session = begin_recording(authority, DeviceState::Genuine);
  session.capture_segment(synthetic_frames(2, 8, 8), 0, 2, {30, 1}, 10);
  SignedSegment seg1 = session.captured_segments().front();

  AttestationReport after = session.finish_recording();
  CHECK(after.nonce == session.video_id());
  CHECK(after.issued_at >= session.report_before().issued_at);
  CHECK(session.finished());
  CHECK(session.keypair().is_zeroized());
  CHECK(session.keypair().private_key.size() == kSecretKeyBytes);  // still allocated, all zero

  // the segment already carries both reports with the same nonce
  CHECK(seg1.provenance.camera.report_before.nonce == seg1.provenance.camera.report_after.nonce);
  CHECK(seg1.provenance.camera.report_before.issued_at <=
        seg1.provenance.camera.report_after.issued_at);

  expect_error(ErrorCode::SessionFinished,
               [&] { session.capture_segment(synthetic_frames(2, 8, 8), 1, 2, {30, 1}, 11); });
  expect_error(ErrorCode::SessionFinished, [&] { session.finish_recording(); });
}

TEST_CASE("video_id is stable across segments of one session") {
  Authority authority = make_authority();
  RecordingSession session = begin_recording(authority, DeviceState::Genuine);
  SignedSegment a = session.capture_segment(synthetic_frames(2, 8, 8), 0, 2, {30, 1}, 10);
  SignedSegment b = session.capture_segment(synthetic_frames(2, 8, 8), 1, 2, {30, 1}, 11);
  CHECK(a.provenance.video.video_id == b.provenance.video.video_id);
}

TEST_CASE("VRONC container round-trips with audio") {
  VideoSegmentData data;
  data.frames = synthetic_frames(4, 20, 10);
  data.fps = {2997, 100};
  data.audio = to_bytes("opaque-audio");
  Bytes enc = vronc_encode(data);
  VideoSegmentData back = vronc_decode(enc);
  CHECK(back.frames.size() == 4);
  CHECK(back.frames == data.frames);
  CHECK(back.fps == data.fps);
  CHECK(back.audio == data.audio);

  SECTION("truncation and garbage are rejected") {
    Bytes cut(enc.begin(), enc.end() - 3);
    expect_error(ErrorCode::MalformedContainer, [&] { vronc_decode(cut); });
    expect_error(ErrorCode::MalformedContainer, [&] { vronc_decode(to_bytes("VRNCgarbage")); });
  }
}

TEST_CASE("load_frames_from_file parses VRONC footage") {
  namespace fs = std::filesystem;
  fs::path dir = fs::temp_directory_path() / "vron-camera-test";
  fs::create_directories(dir);

  SECTION("synthetic gradient clip with the default frame count") {
    VideoSegmentData data;
    data.frames = synthetic_frames(334, 176, 144);  // 10 seconds of 144p footage
    Bytes enc = vronc_encode(data);
    fs::path p = dir / "clip334.vrnc";
    write_file(p.string(), enc);
    auto frames = load_frames_from_file(p.string());
    CHECK(frames.size() == 334);
    CHECK(frames.front().width == 176);
    // watermark identifies each frame
    CHECK(read_watermark(frames[333]) == 333u);
  }

  SECTION("a single 720p frame of zeros is 2,764,800 pixel bytes") {
    RawFrame f;
    f.width = 1280;
    f.height = 720;
    f.pixels = Bytes(static_cast<std::size_t>(1280) * 720 * 3, 0x00);
    VideoSegmentData data;
    data.frames = {f};
    fs::path p = dir / "one720p.vrnc";
    write_file(p.string(), vronc_encode(data));
    auto frames = load_frames_from_file(p.string());
    REQUIRE(frames.size() == 1);
    CHECK(frames[0].pixels.size() == 2764800u);
  }

  SECTION("empty file rejected") {
    fs::path p = dir / "empty.vrnc";
    write_file(p.string(), {});
    expect_error(ErrorCode::MalformedContainer, [&] { load_frames_from_file(p.string()); });
  }
}

TEST_CASE("signed segment files round-trip") {
  Authority authority = make_authority();
  RecordingSession session = begin_recording(authority, DeviceState::Genuine);
  SignedSegment seg =
      session.capture_segment(synthetic_frames(3, 12, 10), 0, 1, {30, 1}, 77, to_bytes("au"));
  Bytes file = encode_segment_file(seg);
  SignedSegment back = decode_segment_file(file);
  CHECK(back == seg);
}
