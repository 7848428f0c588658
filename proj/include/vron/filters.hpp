#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "vron/attest.hpp"
#include "vron/error.hpp"
#include "vron/fixed.hpp"
#include "vron/video.hpp"

namespace vron {

// The six pixel filters. All arithmetic is integer with round-half-up and
// clamp-to-edge borders, so outputs are byte-identical across platforms and
// a stage's measurement meaningfully pins its behavior.
//
//   blur k        normalized k x k box convolution (k odd, >= 3)
//   sharpen k     unsharp mask: clamp(2*in - box_blur_k(in))
//   brightness d  clamp(in + round(d * 255)), d in [-1, 1]
//   grayscale     BT.601 luma (0.299, 0.587, 0.114) on all channels
//   denoise       3 x 3 per-channel median
//   white_balance gray-world per-channel gain mean(all)/mean(channel)

struct FilterSpec {
  std::string name;
  std::vector<std::int64_t> parameters;  // fixed point, scale 2^16

  bool operator==(const FilterSpec&) const = default;
};

inline const std::vector<std::string>& known_filter_names() {
  static const std::vector<std::string> names = {"blur",      "sharpen", "brightness",
                                                 "grayscale", "denoise", "white_balance"};
  return names;
}

/// Parameter schema per filter; part of the stage measurement, while the
/// parameter values live in provenance.
inline std::string filter_parameter_schema(const std::string& name) {
  if (name == "blur" || name == "sharpen") return "k:q16:odd>=3";
  if (name == "brightness") return "delta:q16:[-1,1]";
  if (name == "grayscale" || name == "denoise" || name == "white_balance") return "";
  fail(ErrorCode::BadParameters, "unknown filter: " + name);
}

inline Measurement filter_measurement(const std::string& name) {
  return measure_stage(StageRole::Filter, to_bytes(name),
                       to_bytes(filter_parameter_schema(name)));
}

inline void validate_filter_spec(const FilterSpec& spec) {
  const std::string& n = spec.name;
  if (n == "blur" || n == "sharpen") {
    if (spec.parameters.size() != 1)
      fail(ErrorCode::BadParameters, n + " takes exactly one parameter (kernel size)");
    std::int64_t p = spec.parameters[0];
    if (!fixed_is_integer(p) || fixed_to_int(p) < 3 || fixed_to_int(p) % 2 == 0)
      fail(ErrorCode::BadParameters, n + " kernel size must be an odd integer >= 3");
    return;
  }
  if (n == "brightness") {
    if (spec.parameters.size() != 1)
      fail(ErrorCode::BadParameters, "brightness takes exactly one parameter (delta)");
    std::int64_t p = spec.parameters[0];
    if (p < -kFixedOne || p > kFixedOne)
      fail(ErrorCode::BadParameters, "brightness delta must be in [-1, 1]");
    return;
  }
  if (n == "grayscale" || n == "denoise" || n == "white_balance") {
    if (!spec.parameters.empty()) fail(ErrorCode::BadParameters, n + " takes no parameters");
    return;
  }
  fail(ErrorCode::BadParameters, "unknown filter: " + n);
}

namespace detail {

inline std::uint8_t clamp_u8(std::int64_t v) {
  return static_cast<std::uint8_t>(std::clamp<std::int64_t>(v, 0, 255));
}

/// Exact box sums per channel with clamp-to-edge, separable; equals the
/// naive window sum for every pixel.
inline std::vector<std::uint64_t> box_sums(const RawFrame& f, int k) {
  const int w = static_cast<int>(f.width), h = static_cast<int>(f.height);
  const int r = k / 2;
  std::vector<std::uint64_t> horiz(static_cast<std::size_t>(w) * h * 3);
  std::vector<std::uint64_t> prefix((static_cast<std::size_t>(w) + 1) * 3);
  for (int y = 0; y < h; ++y) {
    const std::uint8_t* row = f.pixels.data() + static_cast<std::size_t>(y) * w * 3;
    for (int c = 0; c < 3; ++c) prefix[c] = 0;
    for (int x = 0; x < w; ++x)
      for (int c = 0; c < 3; ++c)
        prefix[(x + 1) * 3 + c] = prefix[x * 3 + c] + row[x * 3 + c];
    for (int x = 0; x < w; ++x) {
      int lo = x - r, hi = x + r;
      int lo_c = std::max(lo, 0), hi_c = std::min(hi, w - 1);
      std::uint64_t left_pad = static_cast<std::uint64_t>(lo_c - lo);
      std::uint64_t right_pad = static_cast<std::uint64_t>(hi - hi_c);
      for (int c = 0; c < 3; ++c) {
        std::uint64_t s = prefix[(hi_c + 1) * 3 + c] - prefix[lo_c * 3 + c];
        s += left_pad * row[c];
        s += right_pad * row[(w - 1) * 3 + c];
        horiz[(static_cast<std::size_t>(y) * w + x) * 3 + c] = s;
      }
    }
  }
  std::vector<std::uint64_t> out(static_cast<std::size_t>(w) * h * 3);
  std::vector<std::uint64_t> col_prefix((static_cast<std::size_t>(h) + 1) * 3);
  for (int x = 0; x < w; ++x) {
    for (int c = 0; c < 3; ++c) col_prefix[c] = 0;
    for (int y = 0; y < h; ++y)
      for (int c = 0; c < 3; ++c)
        col_prefix[(y + 1) * 3 + c] =
            col_prefix[y * 3 + c] + horiz[(static_cast<std::size_t>(y) * w + x) * 3 + c];
    for (int y = 0; y < h; ++y) {
      int lo = y - r, hi = y + r;
      int lo_c = std::max(lo, 0), hi_c = std::min(hi, h - 1);
      std::uint64_t top_pad = static_cast<std::uint64_t>(lo_c - lo);
      std::uint64_t bot_pad = static_cast<std::uint64_t>(hi - hi_c);
      for (int c = 0; c < 3; ++c) {
        std::uint64_t s = col_prefix[(hi_c + 1) * 3 + c] - col_prefix[lo_c * 3 + c];
        s += top_pad * horiz[(0 * static_cast<std::size_t>(w) + x) * 3 + c];
        s += bot_pad * horiz[(static_cast<std::size_t>(h - 1) * w + x) * 3 + c];
        out[(static_cast<std::size_t>(y) * w + x) * 3 + c] = s;
      }
    }
  }
  return out;
}

inline RawFrame box_blur(const RawFrame& f, int k) {
  auto sums = box_sums(f, k);
  const std::uint64_t kk = static_cast<std::uint64_t>(k) * static_cast<std::uint64_t>(k);
  RawFrame out = f;
  for (std::size_t i = 0; i < out.pixels.size(); ++i)
    out.pixels[i] = static_cast<std::uint8_t>((sums[i] + kk / 2) / kk);
  return out;
}

/// floor(a / d) for d > 0; used to implement round-half-up on signed values.
inline std::int64_t floor_div(std::int64_t a, std::int64_t d) {
  std::int64_t q = a / d, rem = a % d;
  return (rem != 0 && rem < 0) ? q - 1 : q;
}

/// round-half-up(n / d) for d > 0: floor(n/d + 1/2).
inline std::int64_t round_half_up(std::int64_t n, std::int64_t d) {
  return floor_div(2 * n + d, 2 * d);
}

inline RawFrame apply_brightness(const RawFrame& f, std::int64_t delta_fp) {
  const std::int64_t d = round_half_up(delta_fp * 255, kFixedOne);
  RawFrame out = f;
  for (auto& px : out.pixels) px = clamp_u8(px + d);
  return out;
}

inline RawFrame apply_grayscale(const RawFrame& f) {
  RawFrame out = f;
  for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
    std::uint32_t y = (299u * f.pixels[i] + 587u * f.pixels[i + 1] + 114u * f.pixels[i + 2] +
                       500u) /
                      1000u;
    out.pixels[i] = out.pixels[i + 1] = out.pixels[i + 2] = static_cast<std::uint8_t>(y);
  }
  return out;
}

inline RawFrame apply_denoise(const RawFrame& f) {
  const int w = static_cast<int>(f.width), h = static_cast<int>(f.height);
  RawFrame out = f;
  std::uint8_t window[9];
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < 3; ++c) {
        int n = 0;
        for (int dy = -1; dy <= 1; ++dy) {
          int yy = std::clamp(y + dy, 0, h - 1);
          for (int dx = -1; dx <= 1; ++dx) {
            int xx = std::clamp(x + dx, 0, w - 1);
            window[n++] = f.pixels[(static_cast<std::size_t>(yy) * w + xx) * 3 + c];
          }
        }
        std::nth_element(window, window + 4, window + 9);
        out.pixels[(static_cast<std::size_t>(y) * w + x) * 3 + c] = window[4];
      }
    }
  }
  return out;
}

inline RawFrame apply_white_balance(const RawFrame& f) {
  std::uint64_t sum[3] = {0, 0, 0};
  for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
    sum[0] += f.pixels[i];
    sum[1] += f.pixels[i + 1];
    sum[2] += f.pixels[i + 2];
  }
  const std::uint64_t total = sum[0] + sum[1] + sum[2];
  RawFrame out = f;
  for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
    for (int c = 0; c < 3; ++c) {
      if (sum[c] == 0) continue;  // empty channel: gain 1
      std::int64_t v = round_half_up(static_cast<std::int64_t>(f.pixels[i + c]) *
                                         static_cast<std::int64_t>(total),
                                     3 * static_cast<std::int64_t>(sum[c]));
      out.pixels[i + c] = clamp_u8(v);
    }
  }
  return out;
}

}  // namespace detail

/// Pure function of (spec, frame); output dimensions always equal input
/// dimensions.
inline RawFrame apply_pixel_filter(const FilterSpec& spec, const RawFrame& frame) {
  validate_filter_spec(spec);
  if (!frame.well_formed()) fail(ErrorCode::MalformedContainer, "malformed frame");
  if (spec.name == "blur")
    return detail::box_blur(frame, static_cast<int>(fixed_to_int(spec.parameters[0])));
  if (spec.name == "sharpen") {
    const int k = static_cast<int>(fixed_to_int(spec.parameters[0]));
    RawFrame blurred = detail::box_blur(frame, k);
    RawFrame out = frame;
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
      out.pixels[i] =
          detail::clamp_u8(2 * static_cast<std::int64_t>(frame.pixels[i]) - blurred.pixels[i]);
    return out;
  }
  if (spec.name == "brightness") return detail::apply_brightness(frame, spec.parameters[0]);
  if (spec.name == "grayscale") return detail::apply_grayscale(frame);
  if (spec.name == "denoise") return detail::apply_denoise(frame);
  if (spec.name == "white_balance") return detail::apply_white_balance(frame);
  fail(ErrorCode::BadParameters, "unknown filter: " + spec.name);
}

/// Plain sequential application, no signatures or messages; serves as the
/// monolithic baseline and as the equivalence oracle for the staged pipeline.
inline std::vector<RawFrame> apply_filter_chain(const std::vector<FilterSpec>& chain,
                                                std::vector<RawFrame> frames) {
  for (const auto& spec : chain)
    for (auto& f : frames) f = apply_pixel_filter(spec, f);
  return frames;
}

/// Parses "name" or "name:p1,p2" with decimal parameters into a spec.
inline FilterSpec parse_filter_spec(const std::string& arg) {
  FilterSpec spec;
  auto colon = arg.find(':');
  spec.name = arg.substr(0, colon);
  if (colon != std::string::npos) {
    std::string rest = arg.substr(colon + 1);
    std::size_t pos = 0;
    while (pos <= rest.size()) {
      auto comma = rest.find(',', pos);
      std::string tok = rest.substr(pos, comma == std::string::npos ? std::string::npos
                                                                    : comma - pos);
      if (tok.empty()) fail(ErrorCode::BadParameters, "empty filter parameter in: " + arg);
      try {
        spec.parameters.push_back(fixed_from_double(std::stod(tok)));
      } catch (const std::exception&) {
        fail(ErrorCode::BadParameters, "bad filter parameter '" + tok + "' in: " + arg);
      }
      if (comma == std::string::npos) break;
      pos = comma + 1;
    }
  }
  validate_filter_spec(spec);
  return spec;
}

}  // namespace vron
