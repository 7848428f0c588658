#include "test_support.hpp"

#include <chrono>
#include <cstdio>

#include "filter_oracle.hpp"
#include "vron/bench.hpp"
#include "vron/tamper.hpp"

// Acceptance suite. One test case per criterion; each prints a single
// PASS/FAIL line. Tolerances and thresholds are pinned here, in code.

using namespace vron;
using vtest::HonestSetup;

namespace {

using AcceptClock = std::chrono::steady_clock;

double seconds_since(AcceptClock::time_point t0) {
  return std::chrono::duration<double>(AcceptClock::now() - t0).count();
}

struct Line {
  int n;
  std::string what;
  bool ok = false;
  std::string detail;

  ~Line() {
    std::printf("[criterion %d] %s: %s%s%s\n", n, ok ? "PASS" : "FAIL", what.c_str(),
                detail.empty() ? "" : " — ", detail.c_str());
    std::fflush(stdout);
  }
};

/// 60-frame 720p honest run through [blur(7)], shared by criteria 1, 3, 8.
struct HonestRun {
  HonestSetup env;
  FinalBundle bundle;
  double elapsed_s;

  static HonestRun make() {
    auto t0 = AcceptClock::now();
    HonestSetup env = HonestSetup::make(60, 1280, 720, /*seed=*/1);
    RunOptions opts;
    opts.seeds = counter_seed_source("accept-1");
    FinalBundle bundle = run_segment(env.segment, {parse_filter_spec("blur:7")}, env.trust,
                                     env.authority, Transport::InProcess, opts);
    double elapsed = seconds_since(t0);
    return {std::move(env), std::move(bundle), elapsed};
  }
};

HonestRun& honest_run() {
  static HonestRun run = HonestRun::make();
  return run;
}

}  // namespace

TEST_CASE("criterion 1: end-to-end honest run, 60-frame 720p, blur(7), < 60 s") {
  Line line{1, "honest 720p x 60 pipeline verifies end to end"};
  HonestRun& run = honest_run();
  VerificationReport report = verify_bundle(run.bundle, run.env.policy);
  INFO(report.to_text());
  bool all_groups = report.checks.size() == 7 && report.verdict();
  CHECK(all_groups);
  CHECK(run.elapsed_s < 60.0);
  char buf[128];
  std::snprintf(buf, sizeof buf, "7/7 check groups, %.2f s (< 60 s)", run.elapsed_s);
  line.detail = buf;
  line.ok = all_groups && run.elapsed_s < 60.0;
}

TEST_CASE("criterion 2: full attack matrix detected, zero false accepts or rejects") {
  Line line{2, "attack matrix 100% detected, controls pass, deterministic"};
  std::size_t cells = 0, detected = 0;
  bool deterministic = true;

  for (const AttackCell& cell : attack_matrix()) {
    AttackScenarioConfig cfg;
    cfg.seed = 2024;
    AttackScenarioResult a = run_attack_scenario(cell.kind, cell.boundary, cfg);
    AttackScenarioResult b = run_attack_scenario(cell.kind, cell.boundary, cfg);
    ++cells;
    if (a.detected) ++detected;
    if (a.detected != b.detected || a.detail != b.detail) deterministic = false;
    INFO(attack_name(cell.kind)
         << " @ " << (cell.boundary ? boundary_name(*cell.boundary) : "bundle/video") << ": "
         << a.detail);
    CHECK(a.detected);
  }

  // kind=none controls: no false rejects.
  std::size_t controls = 0, controls_ok = 0;
  {
    AttackScenarioResult r = run_attack_scenario(AttackKind::None, std::nullopt, {});
    ++controls;
    if (r.honest_verified) ++controls_ok;
    CHECK(r.honest_verified);
  }
  for (Boundary b : {Boundary::CameraToDecoder, Boundary::DecoderToFilter,
                     Boundary::FilterToFilter, Boundary::FilterToEncoder,
                     Boundary::DecoderToEncoderSidecar}) {
    AttackScenarioResult r = run_attack_scenario(AttackKind::None, b, {});
    ++controls;
    if (r.honest_verified) ++controls_ok;
    INFO(boundary_name(b));
    CHECK(r.honest_verified);
  }
  CHECK(deterministic);

  char buf[160];
  std::snprintf(buf, sizeof buf, "%zu/%zu cells detected, %zu/%zu controls verified, %s",
                detected, cells, controls_ok, controls,
                deterministic ? "deterministic under fixed seeds" : "NONDETERMINISTIC");
  line.detail = buf;
  line.ok = detected == cells && controls_ok == controls && deterministic;
}

TEST_CASE("criterion 3: chain-verification economy of the final bundle") {
  Line line{3, "bundle carries no original frames or intermediate signatures"};
  HonestRun& run = honest_run();
  const FinalBundle& b = run.bundle;

  // Structural accounting: serialized bundle is exactly container +
  // canonical provenance + the two final signatures + certificates + fixed
  // length prefixes. No per-frame signatures, no camera-original container.
  std::size_t expected = 4 + b.container_bytes.size() + 4 +
                         canonical_encode(b.provenance).size() + kSignatureBytes +
                         kSignatureBytes + 4 + b.encoder_certificate.encode().size() + 4;
  for (const auto& c : b.stage_certificates) expected += 4 + c.encode().size();
  bool size_exact = encode_final_bundle(b).size() == expected;
  CHECK(size_exact);

  bool certs_minimal = b.stage_certificates.size() == 2;  // decoder + one filter
  CHECK(certs_minimal);

  // Provenance without attestation reports stays under 1 KB even with all
  // six filters applied.
  HonestSetup env6 = HonestSetup::make(4, 32, 24, /*seed=*/3);
  RunOptions opts;
  opts.seeds = counter_seed_source("accept-3");
  std::vector<FilterSpec> six;
  for (const auto& a : {"blur:7", "sharpen:7", "brightness:-0.2", "grayscale", "denoise",
                        "white_balance"})
    six.push_back(parse_filter_spec(a));
  FinalBundle six_bundle =
      run_segment(env6.segment, six, env6.trust, env6.authority, Transport::InProcess, opts);
  std::size_t prov_size = encoded_size_without_camera(six_bundle.provenance);
  bool prov_small = prov_size <= 1024;
  CHECK(prov_small);

  char buf[160];
  std::snprintf(buf, sizeof buf,
                "size accounted byte-exactly, 2 stage certs, 6-filter provenance %zu B <= 1024 B",
                prov_size);
  line.detail = buf;
  line.ok = size_exact && certs_minimal && prov_small;
}

TEST_CASE("criterion 4: six filters match the brute-force oracle byte-exactly") {
  Line line{4, "filter outputs equal the independent scalar implementation"};
  std::mt19937_64 rng(0xacce97);
  bool all_equal = true;
  for (int trial = 0; trial < 10; ++trial) {
    RawFrame f = vtest::random_frame(rng, 16, 16);
    all_equal &= apply_pixel_filter(parse_filter_spec("blur:7"), f) == oracle::blur(f, 7);
    all_equal &= apply_pixel_filter(parse_filter_spec("sharpen:7"), f) == oracle::sharpen(f, 7);
    all_equal &= apply_pixel_filter(parse_filter_spec("brightness:-0.2"), f) ==
                 oracle::brightness(f, fixed_from_double(-0.2));
    all_equal &= apply_pixel_filter(parse_filter_spec("grayscale"), f) == oracle::grayscale(f);
    all_equal &= apply_pixel_filter(parse_filter_spec("denoise"), f) == oracle::denoise(f);
    all_equal &=
        apply_pixel_filter(parse_filter_spec("white_balance"), f) == oracle::white_balance(f);
    CHECK(all_equal);
  }

  // fixed points
  RawFrame c;
  c.width = c.height = 16;
  c.pixels = Bytes(16 * 16 * 3, 137);
  bool fixed_points = apply_pixel_filter(parse_filter_spec("blur:7"), c) == c &&
                      apply_pixel_filter(parse_filter_spec("sharpen:7"), c) == c &&
                      apply_pixel_filter(parse_filter_spec("white_balance"), c) == c;
  CHECK(fixed_points);

  RawFrame hundred;
  hundred.width = hundred.height = 2;
  hundred.pixels = Bytes(12, 100);
  bool brightness_value =
      apply_pixel_filter(parse_filter_spec("brightness:-0.2"), hundred).pixels[0] == 49;
  CHECK(brightness_value);

  line.detail = "10 random 16x16 frames x 6 filters, identity fixed points, 100 -> 49";
  line.ok = all_equal && fixed_points && brightness_value;
}

TEST_CASE("criterion 5: encoder output order invariant under 100 random deliveries") {
  Line line{5, "frame order enforced by tags for all delivery permutations"};
  HonestSetup env = HonestSetup::make(8, 32, 24, /*seed=*/5);
  std::mt19937_64 rng(0x07de7);
  int ok_trials = 0;
  const int trials = 100;
  for (int t = 0; t < trials; ++t) {
    std::vector<std::size_t> perm(8);
    for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = i;
    std::shuffle(perm.begin(), perm.end(), rng);

    InterceptorSet set;
    set[{Boundary::DecoderToFilter, 0}] = make_permute_interceptor(perm);
    RunOptions opts;
    opts.seeds = counter_seed_source("accept-5-" + std::to_string(t));
    opts.interceptors = std::move(set);
    FinalBundle b =
        run_segment(env.segment, {}, env.trust, env.authority, Transport::InProcess, opts);
    if (!verify_bundle(b, env.policy).verdict()) continue;
    VideoSegmentData data = vronc_decode(b.container_bytes);
    bool in_order = true;
    for (std::uint32_t i = 0; i < data.frames.size(); ++i)
      if (read_watermark(data.frames[i]) != i) in_order = false;
    if (in_order) ++ok_trials;
  }
  CHECK(ok_trials == trials);
  line.detail = std::to_string(ok_trials) + "/" + std::to_string(trials) + " permutations";
  line.ok = ok_trials == trials;
}

TEST_CASE("criterion 6: execution time scales linearly in pixels and frames") {
  Line line{6, "scaling fits reach R^2 >= 0.95 on both axes"};
  Authority authority = vtest::make_authority(1700000000, 0);
  TrustRoots trust = standard_trust_roots(authority.public_key());
  ScalingSuiteResult r = run_scaling_suite(authority, trust, standard_resolutions(),
                                           {30, 60, 120, 240}, /*reps=*/3,
                                           /*sweep_frames=*/30, /*sweep_resolution=*/{320, 240});
  write_csv("acceptance_scaling.csv", r.rows);
  CHECK(r.pixels_fit.r2 >= 0.95);
  CHECK(r.frames_fit.r2 >= 0.95);
  char buf[128];
  std::snprintf(buf, sizeof buf, "R^2 pixels %.4f, R^2 frames %.4f (csv: acceptance_scaling.csv)",
                r.pixels_fit.r2, r.frames_fit.r2);
  line.detail = buf;
  line.ok = r.pixels_fit.r2 >= 0.95 && r.frames_fit.r2 >= 0.95;
}

TEST_CASE("criterion 7: design equivalence and reported overhead") {
  Line line{7, "all four designs emit identical pixels; overhead reported"};
  Authority authority = vtest::make_authority(1700000000, 0);
  TrustRoots trust = standard_trust_roots(authority.public_key());
  bool equal_pixels = true;
  DesignComparisonResult r;
  try {
    r = run_design_comparison(authority, trust, standard_comparison_chains(), /*reps=*/3,
                              /*width=*/320, /*height=*/240, /*frames=*/30);
  } catch (const Error& e) {
    equal_pixels = false;
    line.detail = e.what();
  }
  CHECK(equal_pixels);
  if (equal_pixels) {
    write_csv("acceptance_designs.csv", r.rows);
    bool finite = true;
    std::string ratios;
    for (std::size_t i = 0; i < r.overhead_vs_plain.size(); ++i) {
      double ratio = r.overhead_vs_plain[i].second;
      if (!(ratio > 0) || !std::isfinite(ratio)) finite = false;
      char buf[96];
      std::snprintf(buf, sizeof buf, "%s%s: %.2fx", i ? ", " : "",
                    r.overhead_vs_plain[i].first.c_str(), ratio);
      ratios += buf;
    }
    CHECK(finite);
    line.detail = "staged_signed/monolithic_unsigned " + ratios;
    line.ok = finite;
  }
}

TEST_CASE("criterion 8: consumer verification under 1 s for a 720p bundle") {
  Line line{8, "verify_bundle latency budget"};
  HonestRun& run = honest_run();
  std::vector<double> times;
  bool verdicts = true;
  for (int i = 0; i < 3; ++i) {
    auto t0 = AcceptClock::now();
    VerificationReport report = verify_bundle(run.bundle, run.env.policy);
    times.push_back(seconds_since(t0));
    verdicts = verdicts && report.verdict();
  }
  double med = median(times);
  CHECK(verdicts);
  CHECK(med < 1.0);
  char buf[96];
  std::snprintf(buf, sizeof buf, "median %.3f s over 3 runs (< 1 s)", med);
  line.detail = buf;
  line.ok = verdicts && med < 1.0;
}

TEST_CASE("criterion 9: randomized cryptographic and round-trip property suite") {
  Line line{9, "bit-flip and canonical round-trip properties"};
  Authority authority = vtest::make_authority(1, 0);
  std::mt19937_64 rng(0x9999);

  // >= 1000 single-bit flips spread across messages, signatures,
  // certificates, and reports; every flip must break verification.
  int flips = 0, broke = 0;
  KeyPair kp = generate_keypair();
  for (int t = 0; t < 300; ++t) {
    Bytes msg(1 + rng() % 128);
    for (auto& b : msg) b = static_cast<std::uint8_t>(rng());
    Signature sig = sign(kp.private_key, msg);

    Bytes m2 = msg;
    std::size_t bit = rng() % (m2.size() * 8);
    m2[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    ++flips;
    if (!verify(kp.public_key, m2, sig)) ++broke;

    Signature s2 = sig;
    bit = rng() % (s2.size() * 8);
    s2[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    ++flips;
    if (!verify(kp.public_key, msg, s2)) ++broke;
  }
  for (int t = 0; t < 300; ++t) {
    KeyPair stage = keypair_from_seed(sha256("c9-" + std::to_string(t)));
    StageCertificate cert = issue_stage_certificate(
        authority, stage.public_key, filter_measurement("blur"), StageRole::Filter);
    Bytes enc = cert.encode();
    std::size_t bit = rng() % (enc.size() * 8);
    enc[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    ++flips;
    try {
      if (!verify_certificate(authority.public_key(), StageCertificate::decode(enc))) ++broke;
    } catch (const Error&) {
      ++broke;  // structural rejection counts as a failed verification
    }
  }
  for (int t = 0; t < 200; ++t) {
    AttestationReport rep = issue_camera_report(authority, sha256("n" + std::to_string(t)),
                                                DeviceState::Genuine, camera_app_identity());
    Bytes enc = rep.encode();
    std::size_t bit = rng() % (enc.size() * 8);
    enc[bit / 8] ^= static_cast<std::uint8_t>(1u << (bit % 8));
    ++flips;
    try {
      if (!verify_report(authority.public_key(), AttestationReport::decode(enc))) ++broke;
    } catch (const Error&) {
      ++broke;
    }
  }
  bool flips_ok = flips >= 1000 && broke == flips;
  CHECK(flips_ok);

  // >= 10,000 randomized records round-trip through the canonical encoding.
  int records = 0, round_tripped = 0;
  for (int t = 0; t < 10000; ++t) {
    ProvenanceRecord r = vtest::random_record(rng, authority);
    ++records;
    Bytes enc = canonical_encode(r);
    auto back = canonical_decode(enc);
    if (std::holds_alternative<ProvenanceRecord>(back) &&
        std::get<ProvenanceRecord>(back) == r && canonical_encode(r) == enc)
      ++round_tripped;
  }
  bool rt_ok = round_tripped == records;
  CHECK(rt_ok);

  char buf[128];
  std::snprintf(buf, sizeof buf, "%d/%d flips broke verification, %d/%d records round-tripped",
                broke, flips, round_tripped, records);
  line.detail = buf;
  line.ok = flips_ok && rt_ok;
}
