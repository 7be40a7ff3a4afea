// random.hpp — named counter-based random streams and random matrix helpers
//
// Every draw is a pure function of (seed, stream name, counter), so results
// do not depend on the order in which independent streams are consumed.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>

#include "dfslab/opcore.hpp"

namespace dfslab {

class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::string_view stream) : key_(mix(seed ^ fnv1a(stream))) {}

  std::uint64_t next_u64() { return mix(key_ + 0x9E3779B97F4A7C15ULL * ++counter_); }

  // Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller; both variates are used.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * std::numbers::pi * u2);
    has_spare_ = true;
    return r * std::cos(2.0 * std::numbers::pi * u2);
  }

  long long integer(long long lo, long long hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo + 1);
    return lo + static_cast<long long>(next_u64() % span);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  static std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 0xCBF29CE484222325ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 0x100000001B3ULL;
    }
    return h;
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline Matrix random_complex(Index rows, Index cols, CounterRng& rng) {
  Matrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = cplx(rng.normal(), rng.normal());
  return m;
}

inline RealMatrix random_real(Index rows, Index cols, CounterRng& rng) {
  RealMatrix m(rows, cols);
  for (Index c = 0; c < cols; ++c)
    for (Index r = 0; r < rows; ++r) m(r, c) = rng.normal();
  return m;
}

inline Matrix random_hermitian(Index n, CounterRng& rng) {
  const Matrix g = random_complex(n, n, rng);
  return 0.5 * (g + g.adjoint());
}

inline Vector random_unit_vector(Index n, CounterRng& rng) {
  Vector v = random_complex(n, 1, rng);
  return v / v.norm();
}

inline Matrix random_unitary(Index n, CounterRng& rng) {
  const Matrix g = random_complex(n, n, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * identity(n);
  const Matrix r = qr.matrixQR();
  for (Index k = 0; k < n; ++k) {
    const double m = std::abs(r(k, k));
    if (m > 0.0) q.col(k) *= r(k, k) / m;
  }
  return q;
}

// Full-rank random density matrix G G^dagger / Tr.
inline Matrix random_density_matrix(Index n, CounterRng& rng) {
  const Matrix g = random_complex(n, n, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

// Symmetric positive definite with eigenvalues roughly in [0.5, 3].
inline RealMatrix random_spd(Index n, CounterRng& rng) {
  const RealMatrix g = random_real(n, n, rng);
  RealMatrix s = g * g.transpose() / static_cast<double>(n) + 0.5 * RealMatrix::Identity(n, n);
  return 0.5 * (s + s.transpose());
}

inline RealMatrix random_antisymmetric(Index n, CounterRng& rng, double scale = 1.0) {
  RealMatrix a = RealMatrix::Zero(n, n);
  for (Index r = 0; r < n; ++r)
    for (Index c = r + 1; c < n; ++c) {
      a(r, c) = scale * rng.normal();
      a(c, r) = -a(r, c);
    }
  return a;
}

}  // namespace dfslab
