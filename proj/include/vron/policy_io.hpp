#pragma once

#include <string>

#include <json.hpp>

#include "vron/camera.hpp"
#include "vron/verifier.hpp"

namespace vron {

// JSON policy files for the verifier CLI: trust roots, allowlists, and
// device-state policy in an operator-editable form.

inline Hash32 hash_from_hex(const std::string& s) {
  Bytes b;
  if (!parse_hex(s, b) || b.size() != 32)
    fail(ErrorCode::MalformedMessage, "expected 64 hex chars: " + s);
  Hash32 h{};
  std::memcpy(h.data(), b.data(), 32);
  return h;
}

inline nlohmann::json policy_to_json(const VerifierPolicy& p) {
  nlohmann::json j;
  j["authority_public_key"] = hex(p.trust.attestation_authority_public_key);
  auto& ms = j["approved_measurements"] = nlohmann::json::array();
  for (const auto& [m, info] : p.trust.approved_measurements)
    ms.push_back({{"measurement", hex(m)}, {"role", role_name(info.role)}, {"name", info.name}});
  auto& fs = j["allowed_filters"] = nlohmann::json::array();
  for (const auto& m : p.allowed_filters) fs.push_back(hex(m));
  auto& apps = j["approved_app_identities"] = nlohmann::json::array();
  for (const auto& a : p.trust.approved_app_identities) apps.push_back(hex(a));
  auto& states = j["required_device_states"] = nlohmann::json::array();
  for (const auto& s : p.required_device_states) states.push_back(device_state_name(s));
  j["require_two_reports"] = p.require_two_reports;
  return j;
}

inline VerifierPolicy policy_from_json(const nlohmann::json& j) {
  VerifierPolicy p;
  Bytes pk;
  if (!parse_hex(j.at("authority_public_key").get<std::string>(), pk))
    fail(ErrorCode::MalformedMessage, "bad authority_public_key");
  p.trust.attestation_authority_public_key = pk;
  for (const auto& m : j.at("approved_measurements")) {
    auto role = role_from_name(m.at("role").get<std::string>());
    if (!role) fail(ErrorCode::MalformedMessage, "bad role in policy");
    p.trust.approved_measurements[hash_from_hex(m.at("measurement").get<std::string>())] = {
        *role, m.value("name", std::string{})};
  }
  for (const auto& f : j.at("allowed_filters"))
    p.allowed_filters.insert(hash_from_hex(f.get<std::string>()));
  for (const auto& a : j.at("approved_app_identities"))
    p.trust.approved_app_identities.insert(hash_from_hex(a.get<std::string>()));
  p.required_device_states.clear();
  for (const auto& s : j.at("required_device_states")) {
    auto state = device_state_from_name(s.get<std::string>());
    if (!state) fail(ErrorCode::MalformedMessage, "bad device state in policy");
    p.required_device_states.insert(*state);
  }
  p.require_two_reports = j.value("require_two_reports", true);
  return p;
}

inline void save_policy(const std::string& path, const VerifierPolicy& p) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::IoError, "cannot write " + path);
  out << policy_to_json(p).dump(2) << "\n";
}

inline VerifierPolicy load_policy(const std::string& path) {
  Bytes data = read_file(path);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(data.begin(), data.end());
  } catch (const std::exception& e) {
    fail(ErrorCode::MalformedMessage, std::string("bad policy JSON: ") + e.what());
  }
  return policy_from_json(j);
}

}  // namespace vron
