#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "vron/bytes.hpp"
#include "vron/container.hpp"
#include "vron/crypto.hpp"
#include "vron/error.hpp"

namespace vron {

// Simulated attestation authority. One local keypair plays the roles that
// SGX IAS/DCAP and the Android device-attestation service play in a real
// deployment: it signs stage certificates (binding a stage public key to a
// code measurement) and nonce-bound camera attestation reports. The
// distinction between the anonymous and platform-identifying attestation
// flavors survives as the certificate's `anonymous` flag.

using Measurement = Hash32;

enum class StageRole : std::uint8_t { Decoder = 0, Filter = 1, Encoder = 2 };

inline const char* role_name(StageRole r) {
  switch (r) {
    case StageRole::Decoder: return "decoder";
    case StageRole::Filter: return "filter";
    case StageRole::Encoder: return "encoder";
  }
  return "unknown";
}

inline std::optional<StageRole> role_from_name(std::string_view s) {
  if (s == "decoder") return StageRole::Decoder;
  if (s == "filter") return StageRole::Filter;
  if (s == "encoder") return StageRole::Encoder;
  return std::nullopt;
}

enum class DeviceState : std::uint8_t {
  Genuine = 0,
  Rooted = 1,
  UnlockedBootloader = 2,
  CustomOs = 3,
};

inline const char* device_state_name(DeviceState s) {
  switch (s) {
    case DeviceState::Genuine: return "genuine";
    case DeviceState::Rooted: return "rooted";
    case DeviceState::UnlockedBootloader: return "unlocked_bootloader";
    case DeviceState::CustomOs: return "custom_os";
  }
  return "unknown";
}

inline std::optional<DeviceState> device_state_from_name(std::string_view s) {
  if (s == "genuine") return DeviceState::Genuine;
  if (s == "rooted") return DeviceState::Rooted;
  if (s == "unlocked_bootloader") return DeviceState::UnlockedBootloader;
  if (s == "custom_os") return DeviceState::CustomOs;
  return std::nullopt;
}

/// Hash of a stage's code identity and configuration; the allowlisting key
/// for decoders, filters, and encoders. Field boundaries are length-prefixed
/// so distinct (role, identity, config) triples cannot collide by
/// concatenation.
inline Measurement measure_stage(StageRole role, const Bytes& code_identity,
                                 const Bytes& build_config) {
  if (code_identity.empty()) fail(ErrorCode::EmptyIdentity, "code identity must be nonempty");
  Bytes buf;
  ByteWriter w(buf);
  w.u8(static_cast<std::uint8_t>(role));
  w.blob32(code_identity);
  w.blob32(build_config);
  return sha256(buf);
}

inline Measurement measure_stage(StageRole role, std::string_view code_identity,
                                 std::string_view build_config) {
  return measure_stage(role, to_bytes(code_identity), to_bytes(build_config));
}

// ---------------------------------------------------------------------------
// Stage certificates

struct StageCertificate {
  Bytes stage_public_key;
  Measurement measurement{};
  StageRole role = StageRole::Filter;
  bool anonymous = true;       // true: verifier learns no host identity
  std::string host_identity;   // empty when anonymous
  std::uint64_t issued_at = 0;
  Signature authority_signature{};

  /// Bytes covered by the authority signature.
  Bytes tbs_bytes() const {
    Bytes b;
    ByteWriter w(b);
    w.blob32(stage_public_key);
    w.hash(measurement);
    w.u8(static_cast<std::uint8_t>(role));
    w.u8(anonymous ? 1 : 0);
    w.str16(host_identity);
    w.u64(issued_at);
    return b;
  }

  Bytes encode() const {
    Bytes b = tbs_bytes();
    ByteWriter w(b);
    w.raw(authority_signature.data(), authority_signature.size());
    return b;
  }

  static StageCertificate decode(const Bytes& b) {
    ByteReader r(b);
    StageCertificate c;
    c.stage_public_key = r.blob32();
    c.measurement = r.hash();
    std::uint8_t role = r.u8();
    std::uint8_t anon = r.u8();
    c.host_identity = r.str16();
    c.issued_at = r.u64();
    Bytes sig = r.raw(kSignatureBytes);
    if (r.failed() || !r.done() || role > 2 || anon > 1)
      fail(ErrorCode::MalformedMessage,
           "bad stage certificate at offset " + std::to_string(r.offset()));
    c.role = static_cast<StageRole>(role);
    c.anonymous = anon == 1;
    if (c.anonymous && !c.host_identity.empty())
      fail(ErrorCode::MalformedMessage, "anonymous certificate carries a host identity");
    std::memcpy(c.authority_signature.data(), sig.data(), kSignatureBytes);
    return c;
  }

  bool operator==(const StageCertificate&) const = default;
};

// ---------------------------------------------------------------------------
// Camera attestation reports

struct AttestationReport {
  Hash32 nonce{};          // hash of the camera session public key
  DeviceState device_state = DeviceState::Genuine;
  Hash32 app_identity{};
  std::uint64_t issued_at = 0;
  Signature authority_signature{};

  Bytes tbs_bytes() const {
    Bytes b;
    ByteWriter w(b);
    w.hash(nonce);
    w.u8(static_cast<std::uint8_t>(device_state));
    w.hash(app_identity);
    w.u64(issued_at);
    return b;
  }

  Bytes encode() const {
    Bytes b = tbs_bytes();
    ByteWriter w(b);
    w.raw(authority_signature.data(), authority_signature.size());
    return b;
  }

  static AttestationReport decode(const Bytes& b) {
    ByteReader r(b);
    AttestationReport rep;
    rep.nonce = r.hash();
    std::uint8_t state = r.u8();
    rep.app_identity = r.hash();
    rep.issued_at = r.u64();
    Bytes sig = r.raw(kSignatureBytes);
    if (r.failed() || !r.done() || state > 3)
      fail(ErrorCode::MalformedMessage,
           "bad attestation report at offset " + std::to_string(r.offset()));
    rep.device_state = static_cast<DeviceState>(state);
    std::memcpy(rep.authority_signature.data(), sig.data(), kSignatureBytes);
    return rep;
  }

  bool operator==(const AttestationReport&) const = default;
};

// ---------------------------------------------------------------------------
// Authority

struct Authority {
  KeyPair keys;
  Clock clock = system_clock_seconds();

  static Authority create(Clock clock = system_clock_seconds()) {
    Authority a;
    a.keys = generate_keypair();
    a.clock = std::move(clock);
    return a;
  }

  const Bytes& public_key() const { return keys.public_key; }
};

inline StageCertificate issue_stage_certificate(const Bytes& authority_private_key,
                                                const Bytes& stage_public_key,
                                                const Measurement& measurement, StageRole role,
                                                std::uint64_t issued_at, bool anonymous = true,
                                                std::string host_identity = {}) {
  StageCertificate c;
  c.stage_public_key = stage_public_key;
  c.measurement = measurement;
  c.role = role;
  c.anonymous = anonymous;
  c.host_identity = anonymous ? std::string{} : std::move(host_identity);
  c.issued_at = issued_at;
  c.authority_signature = sign(authority_private_key, c.tbs_bytes());
  return c;
}

inline StageCertificate issue_stage_certificate(const Authority& authority,
                                                const Bytes& stage_public_key,
                                                const Measurement& measurement, StageRole role,
                                                bool anonymous = true,
                                                std::string host_identity = {}) {
  return issue_stage_certificate(authority.keys.private_key, stage_public_key, measurement, role,
                                 authority.clock(), anonymous, std::move(host_identity));
}

inline bool verify_certificate(const Bytes& authority_public_key, const StageCertificate& cert) {
  return verify(authority_public_key, cert.tbs_bytes(), cert.authority_signature);
}

inline AttestationReport issue_camera_report(const Bytes& authority_private_key,
                                             const Hash32& nonce, DeviceState device_state,
                                             const Hash32& app_identity,
                                             std::uint64_t issued_at) {
  AttestationReport r;
  r.nonce = nonce;
  r.device_state = device_state;
  r.app_identity = app_identity;
  r.issued_at = issued_at;
  r.authority_signature = sign(authority_private_key, r.tbs_bytes());
  return r;
}

inline AttestationReport issue_camera_report(const Authority& authority, const Hash32& nonce,
                                             DeviceState device_state,
                                             const Hash32& app_identity) {
  return issue_camera_report(authority.keys.private_key, nonce, device_state, app_identity,
                             authority.clock());
}

inline bool verify_report(const Bytes& authority_public_key, const AttestationReport& report) {
  return verify(authority_public_key, report.tbs_bytes(), report.authority_signature);
}

// ---------------------------------------------------------------------------
// Trust roots

struct ApprovedStage {
  StageRole role;
  std::string name;
  bool operator==(const ApprovedStage&) const = default;
};

struct TrustRoots {
  Bytes attestation_authority_public_key;
  std::map<Measurement, ApprovedStage> approved_measurements;
  std::set<Hash32> approved_app_identities;

  bool valid() const { return !attestation_authority_public_key.empty(); }
};

// ---------------------------------------------------------------------------
// File formats (tags 0x10 key / 0x11 certificate / 0x12 report)

inline Bytes encode_key_file(const KeyPair& kp) {
  Bytes payload;
  ByteWriter w(payload);
  w.u8(kp.private_key.empty() ? 0 : 1);
  w.blob32(kp.public_key);
  w.blob32(kp.private_key);
  return wrap_section(SectionTag::Key, std::move(payload));
}

inline KeyPair decode_key_file(const Bytes& file) {
  Bytes payload = unwrap_section(file, SectionTag::Key, ErrorCode::MalformedMessage);
  ByteReader r(payload);
  std::uint8_t kind = r.u8();
  KeyPair kp;
  kp.public_key = r.blob32();
  kp.private_key = r.blob32();
  if (r.failed() || !r.done() || kind > 1 || kp.public_key.size() != kPublicKeyBytes ||
      (kind == 1 && kp.private_key.size() != kSecretKeyBytes) ||
      (kind == 0 && !kp.private_key.empty()))
    fail(ErrorCode::MalformedMessage, "bad key file");
  return kp;
}

inline Bytes encode_certificate_file(const StageCertificate& c) {
  return wrap_section(SectionTag::Certificate, c.encode());
}

inline StageCertificate decode_certificate_file(const Bytes& file) {
  return StageCertificate::decode(
      unwrap_section(file, SectionTag::Certificate, ErrorCode::MalformedMessage));
}

inline Bytes encode_report_file(const AttestationReport& r) {
  return wrap_section(SectionTag::Report, r.encode());
}

inline AttestationReport decode_report_file(const Bytes& file) {
  return AttestationReport::decode(
      unwrap_section(file, SectionTag::Report, ErrorCode::MalformedMessage));
}

}  // namespace vron
