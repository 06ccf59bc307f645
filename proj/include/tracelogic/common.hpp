#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace tracelogic {

using cplx = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Thrown when inputs violate a documented precondition (bad names, sort
// clashes, malformed JSON, out-of-range parameters).
struct ValidationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when a construction would exceed the configured size cap.
struct SizeCapError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown when numerics break down (NaN/Inf reaching a result).
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Thrown by the exhaustive evaluator when an instance is too large for it.
struct OracleIneligible : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v) {
  // 64-bit mix in the boost::hash_combine style.
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 12) + (h >> 4);
  return h;
}

inline std::uint64_t hash_str(const std::string& s) {
  // FNV-1a.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// splitmix64: tiny, seedable, bit-stable across platforms.  Used everywhere
// randomness is needed so results do not depend on the standard library's
// distribution implementations.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1).
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller (deterministic given the seed).
  double next_normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    while (u1 <= 0.0) u1 = next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace tracelogic
