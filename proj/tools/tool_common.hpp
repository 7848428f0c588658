#pragma once

#include <cstdio>
#include <functional>

#include <CLI11.hpp>

#include "vron/policy_io.hpp"
#include "vron/vron.hpp"

namespace vtool {

/// Error-code exits: vron errors map 1:1 to their numeric codes so scripts
/// can distinguish failure kinds.
inline int run_tool(const std::function<int()>& body) {
  try {
    return body();
  } catch (const vron::Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return static_cast<int>(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
}

inline vron::Authority load_authority(const std::string& key_path) {
  vron::Authority a;
  a.keys = vron::decode_key_file(vron::read_file(key_path));
  if (a.keys.private_key.empty())
    vron::fail(vron::ErrorCode::InvalidKey, "authority key file lacks the private key");
  a.clock = vron::system_clock_seconds();
  return a;
}

inline vron::FrameRate parse_fps(const std::string& s) {
  vron::FrameRate fps{0, 1};
  auto slash = s.find('/');
  try {
    fps.num = static_cast<std::uint32_t>(std::stoul(s.substr(0, slash)));
    if (slash != std::string::npos)
      fps.den = static_cast<std::uint32_t>(std::stoul(s.substr(slash + 1)));
  } catch (const std::exception&) {
    vron::fail(vron::ErrorCode::BadParameters, "bad --fps value: " + s);
  }
  if (fps.num == 0 || fps.den == 0)
    vron::fail(vron::ErrorCode::BadParameters, "frame rate must be positive: " + s);
  return fps;
}

}  // namespace vtool
