#pragma once

// Seeded, library-independent random sampling: Haar unitaries, pure states,
// density operators and random POVMs built from isometry row blocks.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/QR>

#include "rpovm/linalg.hpp"
#include "rpovm/povm.hpp"

namespace rpovm {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Sub-seed for the i-th case of a run seeded with `seed`.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index + 1));
}

// mt19937_64 with explicit uniform/normal transforms so that streams do not
// depend on the standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  // [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

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

  Complex complex_normal() { return {normal(), normal()}; }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

inline ComplexMatrix ginibre(Index rows, Index cols, Rng& rng) {
  ComplexMatrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.complex_normal();
  return g;
}

// Haar-distributed unitary: QR of a Ginibre matrix with R's diagonal phases
// moved into Q.
inline ComplexMatrix haar_unitary(Index dim, Rng& rng) {
  Eigen::HouseholderQR<ComplexMatrix> qr(ginibre(dim, dim, rng));
  ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(dim, dim);
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Index j = 0; j < dim; ++j) {
    const Complex d = r(j, j);
    const double a = std::abs(d);
    if (a > 0.0) q.col(j) *= d / a;
  }
  return q;
}

inline StateVector random_state(Layout layout, Rng& rng) {
  ComplexVector v = ginibre(layout_dim(layout), 1, rng).col(0);
  v.normalize();
  return StateVector(std::move(v), std::move(layout));
}

inline StateVector random_qubit_state(int n_qubits, Rng& rng, const std::string& prefix = "B") {
  return random_state(qubit_register(prefix, n_qubits), rng);
}

// Random density operator of full rank: G G^dag / Tr.
inline ComplexMatrix random_density(Index dim, Rng& rng) {
  const ComplexMatrix g = ginibre(dim, dim, rng);
  ComplexMatrix rho = g * g.adjoint();
  rho /= rho.trace().real();
  return 0.5 * (rho + rho.adjoint());
}

// K Kraus operators from the first 2^n columns of a Haar unitary on K * 2^n,
// split into K consecutive row blocks.
inline KrausSet random_kraus(int n_qubits, Index outcomes, Rng& rng) {
  const Index d = qubit_dim(n_qubits);
  const ComplexMatrix u = haar_unitary(outcomes * d, rng);
  std::vector<ComplexMatrix> ops;
  for (Index k = 0; k < outcomes; ++k) ops.push_back(u.block(k * d, 0, d, d));
  return KrausSet(n_qubits, std::move(ops));
}

// Outcome counts: {2, 3, 4} for one qubit, {2, ..., 8} for two or more.
inline Index random_outcome_count(int n_qubits, Rng& rng) {
  return n_qubits == 1 ? 2 + static_cast<Index>(rng.below(3)) : 2 + static_cast<Index>(rng.below(7));
}

inline Povm random_povm(int n_qubits, Rng& rng) {
  const Index k = random_outcome_count(n_qubits, rng);
  return Povm::from_kraus(random_kraus(n_qubits, k, rng));
}

}  // namespace rpovm
