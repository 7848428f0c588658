#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "vron/defaults.hpp"
#include "vron/scheduler.hpp"

namespace vron {

// Performance harness. Measures the four post-processor designs on
// synthetic footage and reduces the scaling claims to shape: execution time
// against pixel count and against frame count must fit a line, and all four
// designs must emit byte-identical pixels. Absolute seconds are
// machine-bound and are reported, not asserted.
//
//   staged_signed       fixed-function workers, chain verification (the real pipeline)
//   staged_unsigned     same worker/message topology, no signatures
//   monolithic_signed   one worker does everything, input verified, output signed
//   monolithic_unsigned plain decode → filters → encode

enum class Design : std::uint8_t {
  StagedSigned = 0,
  StagedUnsigned = 1,
  MonolithicSigned = 2,
  MonolithicUnsigned = 3,
};

inline const char* design_name(Design d) {
  switch (d) {
    case Design::StagedSigned: return "staged_signed";
    case Design::StagedUnsigned: return "staged_unsigned";
    case Design::MonolithicSigned: return "monolithic_signed";
    case Design::MonolithicUnsigned: return "monolithic_unsigned";
  }
  return "unknown";
}

struct BenchResult {
  Design design;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t frames = 0;
  std::string chain;
  std::uint32_t rep = 0;
  double ingest_s = 0;
  double process_s = 0;
  double emit_s = 0;

  double total_s() const { return ingest_s + process_s + emit_s; }
};

inline std::string chain_label(const std::vector<FilterSpec>& chain) {
  std::string s;
  for (const auto& f : chain) {
    if (!s.empty()) s += "+";
    s += f.name;
    for (auto p : f.parameters) s += ":" + fixed_to_string(p);
  }
  return s.empty() ? "none" : s;
}

inline std::string bench_csv_header() {
  return "design,width,height,frames,chain,rep,ingest_s,process_s,emit_s,total_s";
}

inline std::string to_csv_row(const BenchResult& r) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%u,%u,%u,%s,%u,%.6f,%.6f,%.6f,%.6f",
                design_name(r.design), r.width, r.height, r.frames, r.chain.c_str(), r.rep,
                r.ingest_s, r.process_s, r.emit_s, r.total_s());
  return buf;
}

inline void write_csv(const std::string& path, const std::vector<BenchResult>& rows) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << bench_csv_header() << "\n";
  for (const auto& r : rows) out << to_csv_row(r) << "\n";
}

// ---------------------------------------------------------------------------
// Least squares

struct LinearFit {
  double slope = 0;
  double intercept = 0;
  double r2 = 1;
};

inline LinearFit fit_line(const std::vector<std::pair<double, double>>& pts) {
  LinearFit fit;
  const double n = static_cast<double>(pts.size());
  if (pts.size() < 2) return fit;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto [x, y] : pts) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double denom = n * sxx - sx * sx;
  if (denom == 0) return fit;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double mean_y = sy / n, ss_tot = 0, ss_res = 0;
  for (auto [x, y] : pts) {
    double e = y - (fit.slope * x + fit.intercept);
    ss_res += e * e;
    ss_tot += (y - mean_y) * (y - mean_y);
  }
  fit.r2 = ss_tot == 0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::size_t n = v.size();
  return n == 0 ? 0 : (n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]));
}

// ---------------------------------------------------------------------------
// Design implementations

namespace detail {

using BenchClock = std::chrono::steady_clock;

inline double seconds_since(BenchClock::time_point t0) {
  return std::chrono::duration<double>(BenchClock::now() - t0).count();
}

struct DesignOutput {
  Bytes container;  // pixel-carrying container, compared across designs
  Bytes artifact;   // what the consumer would download
};

inline DesignOutput run_monolithic(const SignedSegment& seg,
                                   const std::vector<FilterSpec>& chain,
                                   const TrustRoots& trust, const Authority& authority,
                                   const KeySeedSource& seeds, bool with_signatures) {
  if (with_signatures) {
    // Input checks equivalent to the decoder's, done once.
    const Bytes& camera_pk = seg.provenance.camera.camera_certificate;
    if (camera_pk.empty() || compute_video_id(camera_pk) != seg.provenance.video.video_id ||
        !verify(camera_pk, canonical_encode(seg.provenance), seg.sig_pi) ||
        !verify(camera_pk, seg.container_bytes, seg.sig_f))
      fail(ErrorCode::CameraSigInvalid, "monolithic worker rejected camera input");
    (void)trust;
  }
  VideoSegmentData data = vronc_decode(seg.container_bytes);
  data.frames = apply_filter_chain(chain, std::move(data.frames));
  DesignOutput out;
  out.container = vronc_encode(data);
  if (!with_signatures) {
    out.artifact = out.container;
    return out;
  }
  // One worker, one key, one measurement covering the whole configuration.
  Measurement mono = measure_stage(StageRole::Encoder, "monolithic-postprocessor",
                                   chain_label(chain));
  KeyPair key = keypair_from_seed(seeds());
  StageCertificate cert =
      issue_stage_certificate(authority, key.public_key, mono, StageRole::Encoder);
  FinalBundle bundle;
  bundle.container_bytes = out.container;
  bundle.provenance = seg.provenance;
  for (const auto& f : chain)
    bundle.provenance.filters.push_back(FilterEntry{f.name, mono, f.parameters});
  bundle.provenance.codec = CodecInfo{mono, mono};
  bundle.sig_f_prime = sign(key.private_key, bundle.container_bytes);
  bundle.sig_pi_prime = sign(key.private_key, canonical_encode(bundle.provenance));
  bundle.encoder_certificate = cert;
  out.artifact = encode_bundle_file(bundle);
  return out;
}

/// Same worker topology as the real pipeline (thread per stage, bounded
/// byte channels, serialized frames) with all signing and verification
/// removed.
inline DesignOutput run_staged_unsigned(const SignedSegment& seg,
                                        const std::vector<FilterSpec>& chain,
                                        std::size_t window) {
  const std::size_t k = chain.size();
  std::vector<std::shared_ptr<BytePipe>> pipes;
  for (std::size_t i = 0; i <= k; ++i) pipes.push_back(std::make_shared<BytePipe>(window));

  auto encode_frame = [](const RawFrame& f) {
    Bytes b;
    ByteWriter w(b);
    w.u32(f.width);
    w.u32(f.height);
    w.raw(f.pixels);
    return b;
  };
  auto decode_frame = [](const Bytes& b) {
    ByteReader r(b);
    RawFrame f;
    f.width = r.u32();
    f.height = r.u32();
    f.pixels = r.raw(static_cast<std::size_t>(f.width) * f.height * 3);
    return f;
  };

  VideoSegmentData data = vronc_decode(seg.container_bytes);
  const FrameRate fps = data.fps;
  const Bytes audio = data.audio;
  const std::size_t total = data.frames.size();

  std::vector<std::thread> threads;
  threads.emplace_back([&] {
    for (const auto& f : data.frames) pipes[0]->push(encode_frame(f));
    pipes[0]->close();
  });
  for (std::size_t i = 0; i < k; ++i)
    threads.emplace_back([&, i] {
      while (auto b = pipes[i]->pop())
        pipes[i + 1]->push(encode_frame(apply_pixel_filter(chain[i], decode_frame(*b))));
      pipes[i + 1]->close();
    });

  VideoSegmentData out_data;
  out_data.fps = fps;
  out_data.audio = audio;
  out_data.frames.reserve(total);
  while (auto b = pipes[k]->pop()) out_data.frames.push_back(decode_frame(*b));
  for (auto& t : threads) t.join();

  DesignOutput out;
  out.container = vronc_encode(out_data);
  out.artifact = out.container;
  return out;
}

}  // namespace detail

/// One timed repetition of one design over a pre-serialized segment file.
inline BenchResult run_design_once(Design design, const Bytes& segment_file,
                                   const std::vector<FilterSpec>& chain,
                                   const TrustRoots& trust, const Authority& authority,
                                   std::uint32_t rep, Bytes* container_out = nullptr) {
  BenchResult r;
  r.design = design;
  r.chain = chain_label(chain);
  r.rep = rep;

  auto t0 = detail::BenchClock::now();
  SignedSegment seg = decode_segment_file(segment_file);
  r.ingest_s = detail::seconds_since(t0);
  r.width = seg.provenance.video.width;
  r.height = seg.provenance.video.height;
  r.frames = seg.provenance.segment.total_frames;

  KeySeedSource seeds = counter_seed_source("bench-" + std::string(design_name(design)));
  detail::DesignOutput out;
  auto t1 = detail::BenchClock::now();
  switch (design) {
    case Design::StagedSigned: {
      RunOptions opts;
      opts.seeds = seeds;
      FinalBundle bundle =
          run_segment(seg, chain, trust, authority, Transport::InProcess, opts);
      r.process_s = detail::seconds_since(t1);
      auto t2 = detail::BenchClock::now();
      out.artifact = encode_bundle_file(bundle);
      out.container = std::move(bundle.container_bytes);
      r.emit_s = detail::seconds_since(t2);
      break;
    }
    case Design::StagedUnsigned: {
      out = detail::run_staged_unsigned(seg, chain, 8);
      r.process_s = detail::seconds_since(t1);
      break;
    }
    case Design::MonolithicSigned:
    case Design::MonolithicUnsigned: {
      out = detail::run_monolithic(seg, chain, trust, authority, seeds,
                                   design == Design::MonolithicSigned);
      r.process_s = detail::seconds_since(t1);
      break;
    }
  }
  if (container_out) *container_out = std::move(out.container);
  return r;
}

// ---------------------------------------------------------------------------
// Suites

struct ScalingSuiteResult {
  std::vector<BenchResult> rows;
  LinearFit pixels_fit;  // median total_s vs pixels per frame (resolution sweep)
  LinearFit frames_fit;  // median total_s vs frame count (frame-count sweep)
};

struct Resolution {
  std::uint32_t width, height;
};

/// The five evaluated resolutions, 144p through 1080p.
inline std::vector<Resolution> standard_resolutions() {
  return {{176, 144}, {320, 240}, {640, 480}, {1280, 720}, {1920, 1080}};
}

namespace detail {

inline Bytes make_bench_segment(const Authority& authority, std::uint32_t width,
                                std::uint32_t height, std::uint32_t frames) {
  auto seeds = counter_seed_source("bench-camera");
  RecordingSession session =
      begin_recording(authority, DeviceState::Genuine, camera_app_identity(), seeds);
  SignedSegment seg = session.capture_segment(synthetic_frames(frames, width, height), 0, 1,
                                              {30, 1}, 1700000000);
  session.finish_recording();
  return encode_segment_file(seg);
}

}  // namespace detail

/// Resolution sweep at a fixed frame count plus frame-count sweep at a fixed
/// resolution, each repeated `reps` times, through the full signed pipeline.
inline ScalingSuiteResult run_scaling_suite(const Authority& authority, const TrustRoots& trust,
                                            const std::vector<Resolution>& resolutions,
                                            const std::vector<std::uint32_t>& frame_counts,
                                            std::uint32_t reps = 3,
                                            std::uint32_t sweep_frames = 30,
                                            Resolution sweep_resolution = {320, 240}) {
  if (reps < 3) reps = 3;
  std::vector<FilterSpec> chain = {parse_filter_spec("blur:7")};
  ScalingSuiteResult result;

  std::vector<std::pair<double, double>> pixel_pts;
  for (const auto& res : resolutions) {
    Bytes file = detail::make_bench_segment(authority, res.width, res.height, sweep_frames);
    std::vector<double> totals;
    for (std::uint32_t rep = 0; rep < reps; ++rep) {
      BenchResult row =
          run_design_once(Design::StagedSigned, file, chain, trust, authority, rep);
      totals.push_back(row.total_s());
      result.rows.push_back(std::move(row));
    }
    pixel_pts.push_back({static_cast<double>(res.width) * res.height, median(totals)});
  }
  result.pixels_fit = fit_line(pixel_pts);

  std::vector<std::pair<double, double>> frame_pts;
  for (std::uint32_t count : frame_counts) {
    Bytes file = detail::make_bench_segment(authority, sweep_resolution.width,
                                            sweep_resolution.height, count);
    std::vector<double> totals;
    for (std::uint32_t rep = 0; rep < reps; ++rep) {
      BenchResult row =
          run_design_once(Design::StagedSigned, file, chain, trust, authority, rep);
      totals.push_back(row.total_s());
      result.rows.push_back(std::move(row));
    }
    frame_pts.push_back({static_cast<double>(count), median(totals)});
  }
  result.frames_fit = fit_line(frame_pts);
  return result;
}

struct DesignComparisonResult {
  std::vector<BenchResult> rows;
  /// chain label -> staged_signed / monolithic_unsigned median ratio
  std::vector<std::pair<std::string, double>> overhead_vs_plain;
  /// chain label -> staged_signed / monolithic_signed median ratio
  std::vector<std::pair<std::string, double>> overhead_vs_monolithic_signed;
};

/// All four designs over each chain; every design must produce byte-identical
/// pixels or the comparison aborts with OutputDivergence.
inline DesignComparisonResult run_design_comparison(
    const Authority& authority, const TrustRoots& trust,
    const std::vector<std::vector<FilterSpec>>& chains, std::uint32_t reps = 3,
    std::uint32_t width = 320, std::uint32_t height = 240, std::uint32_t frames = 30) {
  if (reps < 3) reps = 3;
  DesignComparisonResult result;
  for (const auto& chain : chains) {
    Bytes file = detail::make_bench_segment(authority, width, height, frames);
    Bytes reference;
    std::map<Design, std::vector<double>> totals;
    for (Design d : {Design::StagedSigned, Design::StagedUnsigned, Design::MonolithicSigned,
                     Design::MonolithicUnsigned}) {
      for (std::uint32_t rep = 0; rep < reps; ++rep) {
        Bytes container;
        BenchResult row = run_design_once(d, file, chain, trust, authority, rep, &container);
        if (reference.empty())
          reference = container;
        else if (container != reference)
          fail(ErrorCode::OutputDivergence,
               std::string(design_name(d)) + " pixels differ on chain " + chain_label(chain));
        totals[d].push_back(row.total_s());
        result.rows.push_back(std::move(row));
      }
    }
    result.overhead_vs_plain.push_back(
        {chain_label(chain),
         median(totals[Design::StagedSigned]) / median(totals[Design::MonolithicUnsigned])});
    result.overhead_vs_monolithic_signed.push_back(
        {chain_label(chain),
         median(totals[Design::StagedSigned]) / median(totals[Design::MonolithicSigned])});
  }
  return result;
}

/// The two evaluated chain configurations: 2 filters (blur, sharpen) and all
/// 6 filters.
inline std::vector<std::vector<FilterSpec>> standard_comparison_chains() {
  std::vector<FilterSpec> two = {parse_filter_spec("blur:7"), parse_filter_spec("sharpen:7")};
  std::vector<FilterSpec> six = {parse_filter_spec("blur:7"),
                                 parse_filter_spec("sharpen:7"),
                                 parse_filter_spec("brightness:-0.2"),
                                 parse_filter_spec("grayscale"),
                                 parse_filter_spec("denoise"),
                                 parse_filter_spec("white_balance")};
  return {two, six};
}

}  // namespace vron
