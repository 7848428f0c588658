#pragma once

#include "vron/camera.hpp"
#include "vron/filters.hpp"
#include "vron/stages.hpp"
#include "vron/verifier.hpp"

namespace vron {

/// Trust roots approving the stock stages: the VRONC decoder/encoder, the
/// six filters, and the camera app identity.
inline TrustRoots standard_trust_roots(const Bytes& authority_public_key) {
  TrustRoots t;
  t.attestation_authority_public_key = authority_public_key;
  t.approved_measurements[decoder_measurement()] = {StageRole::Decoder, "vronc-decoder"};
  t.approved_measurements[encoder_measurement()] = {StageRole::Encoder, "vronc-encoder"};
  for (const auto& name : known_filter_names())
    t.approved_measurements[filter_measurement(name)] = {StageRole::Filter, name};
  t.approved_app_identities.insert(camera_app_identity());
  return t;
}

inline VerifierPolicy standard_policy(const Bytes& authority_public_key) {
  VerifierPolicy p;
  p.trust = standard_trust_roots(authority_public_key);
  for (const auto& name : known_filter_names())
    p.allowed_filters.insert(filter_measurement(name));
  return p;
}

}  // namespace vron
