#pragma once

// Brute-force scalar reference for all six filters: direct window loops and
// per-pixel arithmetic, no shared code with the library implementation.
// Used by the unit tests and the acceptance suite.

#include <algorithm>
#include <cmath>
#include <vector>

#include "vron/video.hpp"

namespace oracle {

using vron::RawFrame;

inline std::uint8_t clamp255(long long v) {
  return static_cast<std::uint8_t>(v < 0 ? 0 : (v > 255 ? 255 : v));
}

inline std::uint8_t px(const RawFrame& f, int x, int y, int c) {
  x = std::clamp(x, 0, static_cast<int>(f.width) - 1);
  y = std::clamp(y, 0, static_cast<int>(f.height) - 1);
  return f.pixels[(static_cast<std::size_t>(y) * f.width + x) * 3 + c];
}

inline RawFrame blur(const RawFrame& f, int k) {
  RawFrame out = f;
  int r = k / 2;
  long long kk = static_cast<long long>(k) * k;
  for (int y = 0; y < static_cast<int>(f.height); ++y)
    for (int x = 0; x < static_cast<int>(f.width); ++x)
      for (int c = 0; c < 3; ++c) {
        long long sum = 0;
        for (int dy = -r; dy <= r; ++dy)
          for (int dx = -r; dx <= r; ++dx) sum += px(f, x + dx, y + dy, c);
        out.pixels[(static_cast<std::size_t>(y) * f.width + x) * 3 + c] =
            static_cast<std::uint8_t>((sum + kk / 2) / kk);
      }
  return out;
}

inline RawFrame sharpen(const RawFrame& f, int k) {
  RawFrame b = blur(f, k);
  RawFrame out = f;
  for (std::size_t i = 0; i < f.pixels.size(); ++i)
    out.pixels[i] = clamp255(2LL * f.pixels[i] - b.pixels[i]);
  return out;
}

inline RawFrame brightness(const RawFrame& f, std::int64_t delta_fp) {
  // round-half-up via floating point: an independent route to the same rule
  double delta = static_cast<double>(delta_fp) / 65536.0;
  long long d = static_cast<long long>(std::floor(delta * 255.0 + 0.5));
  RawFrame out = f;
  for (std::size_t i = 0; i < f.pixels.size(); ++i)
    out.pixels[i] = clamp255(static_cast<long long>(f.pixels[i]) + d);
  return out;
}

inline RawFrame grayscale(const RawFrame& f) {
  RawFrame out = f;
  for (std::size_t i = 0; i < f.pixels.size(); i += 3) {
    long long y =
        (299LL * f.pixels[i] + 587LL * f.pixels[i + 1] + 114LL * f.pixels[i + 2] + 500) / 1000;
    out.pixels[i] = out.pixels[i + 1] = out.pixels[i + 2] = static_cast<std::uint8_t>(y);
  }
  return out;
}

inline RawFrame denoise(const RawFrame& f) {
  RawFrame out = f;
  for (int y = 0; y < static_cast<int>(f.height); ++y)
    for (int x = 0; x < static_cast<int>(f.width); ++x)
      for (int c = 0; c < 3; ++c) {
        std::vector<std::uint8_t> window;
        for (int dy = -1; dy <= 1; ++dy)
          for (int dx = -1; dx <= 1; ++dx) window.push_back(px(f, x + dx, y + dy, c));
        std::sort(window.begin(), window.end());
        out.pixels[(static_cast<std::size_t>(y) * f.width + x) * 3 + c] = window[4];
      }
  return out;
}

inline RawFrame white_balance(const RawFrame& f) {
  long double sum[3] = {0, 0, 0};
  for (std::size_t i = 0; i < f.pixels.size(); i += 3)
    for (int c = 0; c < 3; ++c) sum[c] += f.pixels[i + c];
  long double total = sum[0] + sum[1] + sum[2];
  RawFrame out = f;
  for (std::size_t i = 0; i < f.pixels.size(); i += 3)
    for (int c = 0; c < 3; ++c) {
      if (sum[c] == 0) continue;
      long double gain = total / (3.0L * sum[c]);
      out.pixels[i + c] =
          clamp255(static_cast<long long>(std::floor(f.pixels[i + c] * gain + 0.5L)));
    }
  return out;
}

}  // namespace oracle
