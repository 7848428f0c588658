#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "vron/attest.hpp"
#include "vron/stages.hpp"
#include "vron/video.hpp"

namespace vron {

// Consumer-side verification. Chain verification means the consumer checks
// only the final stage's signatures plus every stage's certificate and
// measurement; it never sees camera-original frames or intermediate
// per-frame signatures.
//
// All checks always run (no short-circuit) so a report enumerates every
// violation; the verdict is the conjunction.

struct CheckResult {
  std::string name;
  bool pass = false;
  std::string detail;

  bool operator==(const CheckResult&) const = default;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool verdict() const {
    return std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }

  const CheckResult* find(const std::string& name) const {
    for (const auto& c : checks)
      if (c.name == name) return &c;
    return nullptr;
  }

  std::string to_text() const {
    std::ostringstream os;
    for (const auto& c : checks)
      os << (c.pass ? "PASS" : "FAIL") << "  " << c.name
         << (c.detail.empty() ? "" : "  (" + c.detail + ")") << "\n";
    os << "verdict: " << (verdict() ? "PASS" : "FAIL") << "\n";
    return os.str();
  }

  /// Machine format: canonical framing, section tag 0x20.
  Bytes to_machine() const {
    Bytes payload;
    ByteWriter w(payload);
    w.u32(static_cast<std::uint32_t>(checks.size()));
    for (const auto& c : checks) {
      w.str16(c.name);
      w.u8(c.pass ? 1 : 0);
      w.str16(c.detail.size() > 0xffff ? c.detail.substr(0, 0xffff) : c.detail);
    }
    w.u8(verdict() ? 1 : 0);
    return wrap_section(SectionTag::VerificationReport, std::move(payload));
  }

  static VerificationReport from_machine(const Bytes& file) {
    Bytes payload =
        unwrap_section(file, SectionTag::VerificationReport, ErrorCode::MalformedMessage);
    ByteReader r(payload);
    std::uint32_t n = r.u32();
    VerificationReport rep;
    for (std::uint32_t i = 0; i < n && !r.failed(); ++i) {
      CheckResult c;
      c.name = r.str16();
      c.pass = r.u8() == 1;
      c.detail = r.str16();
      rep.checks.push_back(std::move(c));
    }
    r.u8();  // verdict byte, redundant with the checks
    if (r.failed() || !r.done()) fail(ErrorCode::MalformedMessage, "bad verification report");
    return rep;
  }
};

struct VerifierPolicy {
  TrustRoots trust;
  std::set<Measurement> allowed_filters;
  std::set<DeviceState> required_device_states = {DeviceState::Genuine};
  bool require_two_reports = true;
};

// ---------------------------------------------------------------------------

namespace detail {

inline std::string short_hex(const Hash32& h) { return hex(h).substr(0, 12); }

class ReportBuilder {
public:
  explicit ReportBuilder(std::string prefix = {}) : prefix_(std::move(prefix)) {}

  void add(const std::string& name, bool pass, const std::string& detail = {}) {
    report_.checks.push_back({prefix_ + name, pass, detail});
  }

  VerificationReport take() { return std::move(report_); }

private:
  std::string prefix_;
  VerificationReport report_;
};

}  // namespace detail

/// Runs the full check sequence over one bundle. Failures are report
/// entries, never exceptions.
inline VerificationReport verify_bundle(const FinalBundle& bundle, const VerifierPolicy& policy,
                                        const std::string& check_prefix = {}) {
  detail::ReportBuilder rb(check_prefix);
  const Bytes& authority = policy.trust.attestation_authority_public_key;
  const ProvenanceRecord& prov = bundle.provenance;

  // (1) certificate validity: encoder certificate plus every relayed stage
  // certificate must be authority-signed; the bundle must carry a decoder
  // certificate and one certificate per filter entry, in order.
  {
    bool ok = verify_certificate(authority, bundle.encoder_certificate) &&
              bundle.encoder_certificate.role == StageRole::Encoder;
    std::string detail = ok ? "" : "encoder certificate invalid";
    std::size_t bad = 0;
    for (const auto& c : bundle.stage_certificates)
      if (!verify_certificate(authority, c)) ++bad;
    if (bad > 0) {
      ok = false;
      detail = std::to_string(bad) + " stage certificate(s) not signed by authority";
    }
    bool have_decoder = false;
    for (const auto& c : bundle.stage_certificates)
      if (c.role == StageRole::Decoder) have_decoder = true;
    if (!have_decoder) {
      ok = false;
      detail = detail.empty() ? "no decoder certificate in bundle" : detail;
    }
    for (const auto& f : prov.filters) {
      bool covered = false;
      for (const auto& c : bundle.stage_certificates)
        if (c.role == StageRole::Filter && c.measurement == f.measurement) covered = true;
      if (!covered) {
        ok = false;
        detail = "missing certificate for filter " + f.name;
      }
    }
    rb.add("certificates", ok, detail);
  }

  // (2) Sig_F' over the container bytes.
  rb.add("container_signature",
         verify(bundle.encoder_certificate.stage_public_key, bundle.container_bytes,
                bundle.sig_f_prime),
         "");

  // (3) Sig_PI' over the canonical provenance bytes.
  {
    bool ok = false;
    try {
      ok = verify(bundle.encoder_certificate.stage_public_key, canonical_encode(prov),
                  bundle.sig_pi_prime);
    } catch (const Error&) {
      ok = false;
    }
    rb.add("provenance_signature", ok, ok ? "" : "Sig_PI' invalid");
  }

  // (4) decoder and encoder measurements on the allowlist, and bound to the
  // certificates in the bundle.
  {
    bool ok = prov.codec.has_value();
    std::string detail = ok ? "" : "codec info absent";
    if (prov.codec) {
      auto approved = [&](const Measurement& m, StageRole role) {
        auto it = policy.trust.approved_measurements.find(m);
        return it != policy.trust.approved_measurements.end() && it->second.role == role;
      };
      if (!approved(prov.codec->decoder_measurement, StageRole::Decoder)) {
        ok = false;
        detail = "decoder measurement not approved";
      }
      if (!approved(prov.codec->encoder_measurement, StageRole::Encoder)) {
        ok = false;
        detail = "encoder measurement not approved";
      }
      if (bundle.encoder_certificate.measurement != prov.codec->encoder_measurement) {
        ok = false;
        detail = "encoder certificate measurement differs from codec info";
      }
      bool decoder_cert_bound = false;
      for (const auto& c : bundle.stage_certificates)
        if (c.role == StageRole::Decoder && c.measurement == prov.codec->decoder_measurement)
          decoder_cert_bound = true;
      if (!decoder_cert_bound) {
        ok = false;
        detail = "decoder certificate measurement differs from codec info";
      }
    }
    rb.add("codec_allowlist", ok, detail);
  }

  // (5) every filter entry allowlisted; the applied order is recorded.
  {
    bool ok = true;
    std::string order;
    for (const auto& f : prov.filters) {
      if (!order.empty()) order += " -> ";
      order += f.name;
      if (policy.allowed_filters.find(f.measurement) == policy.allowed_filters.end()) {
        ok = false;
        order += "(!)";
      }
    }
    rb.add("filter_allowlist", ok,
           prov.filters.empty() ? "no filters applied" : "order: " + order);
  }

  // (6) camera attestation: both reports authority-signed, nonce equals the
  // video id, device state within policy, before/after ordering, approved
  // app identity.
  {
    const CameraDeviceInfo& cam = prov.camera;
    bool ok = true;
    std::string detail;
    auto check = [&](bool cond, const std::string& why) {
      if (!cond) {
        ok = false;
        if (detail.empty()) detail = why;
      }
    };
    check(verify_report(authority, cam.report_before), "report_before signature invalid");
    if (policy.require_two_reports)
      check(verify_report(authority, cam.report_after), "report_after signature invalid");
    check(cam.report_before.nonce == prov.video.video_id, "report_before nonce != video_id");
    if (policy.require_two_reports)
      check(cam.report_after.nonce == prov.video.video_id, "report_after nonce != video_id");
    check(!cam.camera_certificate.empty() &&
              compute_video_id(cam.camera_certificate) == prov.video.video_id,
          "video_id != hash(camera public key)");
    check(policy.required_device_states.count(cam.report_before.device_state) > 0,
          std::string("device state '") + device_state_name(cam.report_before.device_state) +
              "' not accepted");
    if (policy.require_two_reports) {
      check(policy.required_device_states.count(cam.report_after.device_state) > 0,
            std::string("device state '") + device_state_name(cam.report_after.device_state) +
                "' not accepted");
      check(cam.report_before.issued_at <= cam.report_after.issued_at,
            "report_after precedes report_before");
    }
    check(policy.trust.approved_app_identities.count(cam.report_before.app_identity) > 0,
          "camera app identity not approved");
    rb.add("camera_attestation", ok, detail);
  }

  // (7) segment consistency between provenance and the container.
  {
    bool ok = true;
    std::string detail;
    auto check = [&](bool cond, const std::string& why) {
      if (!cond) {
        ok = false;
        if (detail.empty()) detail = why;
      }
    };
    check(prov.segment.segment_id < prov.segment.total_segments,
          "segment_id >= total_segments");
    try {
      VideoSegmentData data = vronc_decode(bundle.container_bytes);
      check(data.frames.size() == prov.segment.total_frames,
            "container frame count != total_frames");
      check(data.fps == prov.segment.frame_rate, "container fps != provenance frame_rate");
      check(data.width() == prov.video.width && data.height() == prov.video.height,
            "container dimensions != provenance dimensions");
    } catch (const Error& e) {
      check(false, std::string("container unreadable: ") + e.what());
    }
    rb.add("segment_consistency", ok, detail);
  }

  return rb.take();
}

/// Per-bundle verification plus cross-segment checks over a whole video.
inline VerificationReport verify_video(const std::vector<FinalBundle>& bundles,
                                       const VerifierPolicy& policy) {
  VerificationReport out;
  for (std::size_t i = 0; i < bundles.size(); ++i) {
    VerificationReport r =
        verify_bundle(bundles[i], policy, "segment[" + std::to_string(i) + "].");
    out.checks.insert(out.checks.end(), r.checks.begin(), r.checks.end());
  }

  bool ids_ok = true;
  std::string ids_detail;
  for (std::size_t i = 1; i < bundles.size(); ++i)
    if (bundles[i].provenance.video.video_id != bundles[0].provenance.video.video_id) {
      ids_ok = false;
      ids_detail = "segment " + std::to_string(i) + " has a different video_id";
    }
  out.checks.push_back({"video.video_id_consistent", ids_ok, ids_detail});

  bool complete = !bundles.empty();
  std::string complete_detail = bundles.empty() ? "no segments" : "";
  if (!bundles.empty()) {
    std::uint32_t total = bundles[0].provenance.segment.total_segments;
    std::vector<bool> seen(total, false);
    for (const auto& b : bundles) {
      if (b.provenance.segment.total_segments != total) {
        complete = false;
        complete_detail = "segments disagree on total_segments";
      } else if (b.provenance.segment.segment_id >= total) {
        complete = false;
        complete_detail = "segment_id out of range";
      } else if (seen[b.provenance.segment.segment_id]) {
        complete = false;
        complete_detail =
            "duplicate segment " + std::to_string(b.provenance.segment.segment_id);
      } else {
        seen[b.provenance.segment.segment_id] = true;
      }
    }
    for (std::uint32_t s = 0; s < total && complete; ++s)
      if (!seen[s]) {
        complete = false;
        complete_detail = "segment omission: missing segment " + std::to_string(s);
      }
  }
  out.checks.push_back({"video.segment_completeness", complete, complete_detail});

  // Cross-segment timestamp ordering is an extra consistency check of this
  // verifier, not implied by any per-segment signature; the detail string
  // says so.
  bool mono = true;
  std::string mono_detail = "cross-segment ordering check (verifier extension)";
  for (std::size_t i = 1; i < bundles.size(); ++i)
    if (bundles[i].provenance.video.timestamp < bundles[i - 1].provenance.video.timestamp) {
      mono = false;
      mono_detail = "timestamp decreases at segment " + std::to_string(i);
    }
  out.checks.push_back({"video.timestamp_monotonic", mono, mono_detail});
  return out;
}

}  // namespace vron
