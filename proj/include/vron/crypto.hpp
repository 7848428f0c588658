#pragma once

#include <sodium.h>

#include <array>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>

#include "vron/bytes.hpp"
#include "vron/error.hpp"

namespace vron {

// Signature scheme is Ed25519: deterministic (same key and message always
// yield the same bytes), 32-byte public keys, 64-byte signatures. Hashing is
// SHA-256 throughout.

constexpr std::size_t kPublicKeyBytes = crypto_sign_PUBLICKEYBYTES;   // 32
constexpr std::size_t kSecretKeyBytes = crypto_sign_SECRETKEYBYTES;   // 64
constexpr std::size_t kSignatureBytes = crypto_sign_BYTES;            // 64
constexpr std::size_t kSeedBytes = crypto_sign_SEEDBYTES;             // 32

using Signature = std::array<std::uint8_t, kSignatureBytes>;
using KeySeed = std::array<std::uint8_t, kSeedBytes>;

inline void ensure_crypto_init() {
  static const int rc = sodium_init();
  if (rc < 0) fail(ErrorCode::EntropyUnavailable, "libsodium initialization failed");
}

inline Hash32 sha256(const std::uint8_t* p, std::size_t n) {
  ensure_crypto_init();
  Hash32 h{};
  crypto_hash_sha256(h.data(), p, n);
  return h;
}

inline Hash32 sha256(const Bytes& b) { return sha256(b.data(), b.size()); }
inline Hash32 sha256(std::string_view s) {
  return sha256(reinterpret_cast<const std::uint8_t*>(s.data()), s.size());
}

struct KeyPair {
  Bytes public_key;   // canonical serialization: the 32 raw Ed25519 bytes
  Bytes private_key;  // secret; zeroized by zeroize()

  /// Overwrites the secret bytes in place. The vector keeps its size so
  /// callers can observe the all-zero state.
  void zeroize() {
    if (!private_key.empty()) sodium_memzero(private_key.data(), private_key.size());
  }

  bool is_zeroized() const {
    for (auto b : private_key)
      if (b != 0) return false;
    return true;
  }
};

inline KeyPair generate_keypair() {
  ensure_crypto_init();
  KeyPair kp;
  kp.public_key.resize(kPublicKeyBytes);
  kp.private_key.resize(kSecretKeyBytes);
  crypto_sign_keypair(kp.public_key.data(), kp.private_key.data());
  return kp;
}

/// Deterministic variant used where tests need reproducible keys.
inline KeyPair keypair_from_seed(const KeySeed& seed) {
  ensure_crypto_init();
  KeyPair kp;
  kp.public_key.resize(kPublicKeyBytes);
  kp.private_key.resize(kSecretKeyBytes);
  crypto_sign_seed_keypair(kp.public_key.data(), kp.private_key.data(), seed.data());
  return kp;
}

/// Source of key seeds. Default draws from the system RNG; tests inject
/// counters to make whole pipelines byte-reproducible.
using KeySeedSource = std::function<KeySeed()>;

inline KeySeedSource random_seed_source() {
  return [] {
    ensure_crypto_init();
    KeySeed s{};
    randombytes_buf(s.data(), s.size());
    return s;
  };
}

/// Seeds derived as SHA-256(label || counter); one source per pipeline run.
inline KeySeedSource counter_seed_source(std::string_view label) {
  auto counter = std::make_shared<std::uint64_t>(0);
  std::string tag(label);
  return [counter, tag] {
    Bytes b = to_bytes(tag);
    ByteWriter w(b);
    w.u64((*counter)++);
    return sha256(b);
  };
}

inline Signature sign(const Bytes& private_key, const Bytes& message) {
  ensure_crypto_init();
  if (private_key.size() != kSecretKeyBytes)
    fail(ErrorCode::InvalidKey, "private key must be " + std::to_string(kSecretKeyBytes) + " bytes");
  Signature sig{};
  crypto_sign_detached(sig.data(), nullptr, message.data(), message.size(), private_key.data());
  return sig;
}

/// Total function: malformed keys or signatures verify as false, never throw.
inline bool verify(const Bytes& public_key, const Bytes& message, const Signature& sig) {
  ensure_crypto_init();
  if (public_key.size() != kPublicKeyBytes) return false;
  return crypto_sign_verify_detached(sig.data(), message.data(), message.size(),
                                     public_key.data()) == 0;
}

inline bool verify(const Bytes& public_key, const Bytes& message, const Bytes& sig) {
  if (sig.size() != kSignatureBytes) return false;
  Signature s{};
  std::memcpy(s.data(), sig.data(), kSignatureBytes);
  return verify(public_key, message, s);
}

using Clock = std::function<std::uint64_t()>;

inline Clock system_clock_seconds() {
  return [] {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(
            std::chrono::system_clock::now().time_since_epoch())
            .count());
  };
}

/// Monotone fake clock for deterministic tests and reproducible pipelines.
inline Clock fixed_clock(std::uint64_t start, std::uint64_t step = 1) {
  auto t = std::make_shared<std::uint64_t>(start);
  return [t, step] {
    std::uint64_t v = *t;
    *t += step;
    return v;
  };
}

}  // namespace vron
