#pragma once

namespace rpovm {

// Numerical thresholds used across the library. Each composition level gets
// roughly one decade of slack over the level below it.
struct Tolerances {
  double hermitian = 1e-10;        // ||m - m^dag||_max
  double reconstruction = 1e-9;    // eigen / Schmidt reconstruction
  double psd_clamp = 1e-12;        // eigenvalues in [-clamp, 0) are set to 0
  double state_norm = 1e-10;       // inputs accepted as normalized
  double completeness = 1e-9;      // sum M^dag M = I, sum F = I
  double unitary = 1e-9;
  double orthogonal = 1e-9;        // off-diagonal hs_inner for orthogonal sets
  double oe_offdiagonal = 1e-8;    // off-diagonal |c^dag c| for OE sets
  double alpha_cutoff = 1e-7;      // Pauli weights at or below are dropped
  double decomposition = 1e-8;     // sqrt(F_nu) = sum_mu U_{mu nu} alpha_mu sigma_mu
  double probability = 1e-10;      // distributions sum to one
  double entropy_floor = 1e-15;    // p log p contributes nothing below this
  double schmidt_floor = 1e-14;    // reduced-density eigenvalues treated as 0
};

inline constexpr Tolerances kDefaultTolerances{};

}  // namespace rpovm
