/* ubmlp: hybrid unary-binary MLP hardware toolchain */

#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace ubmlp {

/* Error hierarchy: every stage throws a subclass of ubmlp::error so the
 * CLI can map failures to distinct exit codes. */
struct error : std::runtime_error {
  explicit error(const std::string& msg) : std::runtime_error(msg) {}
};
struct range_error : error {
  explicit range_error(const std::string& msg) : error(msg) {}
};
struct dimension_error : error {
  explicit dimension_error(const std::string& msg) : error(msg) {}
};
struct ingestion_error : error {
  explicit ingestion_error(const std::string& msg) : error(msg) {}
};
struct topology_error : error {
  explicit topology_error(const std::string& msg) : error(msg) {}
};
struct training_error : error {
  explicit training_error(const std::string& msg) : error(msg) {}
};
struct lowering_error : error {
  explicit lowering_error(const std::string& msg) : error(msg) {}
};
struct simulation_error : error {
  explicit simulation_error(const std::string& msg) : error(msg) {}
};
struct plan_error : error {
  explicit plan_error(const std::string& msg) : error(msg) {}
};
struct coefficient_error : error {
  explicit coefficient_error(const std::string& msg) : error(msg) {}
};
struct comparison_error : error {
  explicit comparison_error(const std::string& msg) : error(msg) {}
};
struct serialization_error : error {
  explicit serialization_error(const std::string& msg) : error(msg) {}
};
struct validation_error : error {
  explicit validation_error(const std::string& msg) : error(msg) {}
};

/* splitmix64, used to derive named sub-seeds from the run seed. */
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/* Deterministic PRNG (xoshiro256**). The standard library distributions are
 * not bit-reproducible across implementations, so all randomness in the
 * toolchain goes through this generator and the helpers below. */
class Rng {
 public:
  explicit Rng(std::uint64_t seed) {
    std::uint64_t sm = seed;
    for (auto& w : s_) w = splitmix64(sm);
  }

  std::uint64_t next() {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform integer in [0, n), n > 0; rejection sampling keeps it unbiased
  std::uint64_t below(std::uint64_t n) {
    const std::uint64_t limit = ~0ULL - (~0ULL % n);
    std::uint64_t v;
    do {
      v = next();
    } while (v >= limit);
    return v % n;
  }

  // uniform double in [0, 1)
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }

  // standard normal via Box-Muller (cached second value)
  double normal() {
    if (have_cached_) {
      have_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    while (u1 <= 1e-300) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 6.283185307179586476925286766559 * u2;
    cached_ = r * std::sin(theta);
    have_cached_ = true;
    return r * std::cos(theta);
  }

 private:
  static std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }
  std::uint64_t s_[4];
  double cached_ = 0.0;
  bool have_cached_ = false;
};

/* FNV-1a over a string; used for named sub-seed derivation and config
 * hashing inside artifacts. */
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t sub_seed(std::uint64_t root, const std::string& name) {
  std::uint64_t st = root ^ fnv1a(name);
  return splitmix64(st);
}

}  // namespace ubmlp
