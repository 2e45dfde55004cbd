#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "rpovm/povm.hpp"
#include "rpovm/povm_io.hpp"
#include "rpovm/random.hpp"

using namespace rpovm;

namespace {

std::string data(const char* name) { return std::string(RPOVM_DATA_DIR) + "/" + name; }

Povm fixture(const char* name) { return load_measurement(data(name)).povm(); }

// Projective measurement along the unit vector n on the Bloch sphere.
Povm projective_along(double nx, double ny, double nz) {
  const ComplexMatrix s = nx * pauli(1) + ny * pauli(2) + nz * pauli(3);
  return Povm(1, {0.5 * (pauli(0) + s), 0.5 * (pauli(0) - s)});
}

const double kSqrtA = std::sqrt(0.4375);

}  // namespace

TEST(Pauli, InnerProductIsNormalized) {
  for (int a = 0; a < 4; ++a)
    for (int b = 0; b < 4; ++b)
      EXPECT_NEAR(std::abs(hs_inner(pauli(a), pauli(b))), a == b ? 1.0 : 0.0, 1e-15);
  EXPECT_THROW(hs_inner(pauli(0), ComplexMatrix::Identity(4, 4)), DimensionMismatch);
}

TEST(Pauli, BasisOrderFirstQubitMostSignificant) {
  const auto b = pauli_basis(2);
  ASSERT_EQ(b.size(), 16u);
  EXPECT_LT(max_abs(b[3] - tensor(pauli(0), pauli(3))), 1e-15);
  EXPECT_LT(max_abs(b[12] - tensor(pauli(3), pauli(0))), 1e-15);
  EXPECT_EQ(pauli_label(6, 2), "XY");
  EXPECT_THROW(pauli_basis(0), std::out_of_range);
  EXPECT_THROW(pauli_basis(kMaxQubits + 1), std::out_of_range);
}

TEST(Pauli, BasisIsOrthonormal) {
  const auto b = pauli_basis(2);
  for (std::size_t i = 0; i < b.size(); ++i)
    for (std::size_t j = 0; j < b.size(); ++j)
      EXPECT_NEAR(std::abs(hs_inner(b[i], b[j])), i == j ? 1.0 : 0.0, 1e-14);
}

TEST(Measurements, ValidationErrors) {
  EXPECT_THROW(Povm(1, {diag({1.0, 0.5})}), InvalidMeasurement);
  EXPECT_THROW(Povm(1, {diag({1.2, 1.0}), diag({-0.2, 0.0})}), InvalidMeasurement);
  ComplexMatrix nonherm = pauli(0);
  nonherm(0, 1) = 0.1;
  EXPECT_THROW(Povm(1, {nonherm}), InvalidMeasurement);
  EXPECT_THROW(KrausSet(1, {diag({1.0, 0.5})}), InvalidMeasurement);
  EXPECT_THROW(Povm(1, {ComplexMatrix::Identity(4, 4)}), DimensionMismatch);
}

TEST(PauliExpand, FixtureA) {
  const auto c = pauli_expand(hermitian_roots(fixture("fixture_a_povm.json")));
  ASSERT_EQ(c.outcomes(), 2);
  EXPECT_NEAR(c.entries(0, 0).real(), 0.875, 1e-12);
  EXPECT_NEAR(c.entries(0, 3).real(), 0.125, 1e-12);
  EXPECT_NEAR(c.entries(1, 0).real(), kSqrtA / 2, 1e-12);
  EXPECT_NEAR(c.entries(1, 3).real(), -kSqrtA / 2, 1e-12);
  EXPECT_NEAR(std::abs(c.entries(0, 1)) + std::abs(c.entries(0, 2)), 0.0, 1e-14);
  EXPECT_LT(c.max_imaginary(), 1e-15);
}

TEST(PauliExpand, FixturesBandC) {
  const auto b = pauli_expand(hermitian_roots(fixture("fixture_b_z_measurement.json")));
  EXPECT_NEAR(b.entries(0, 0).real(), 0.5, 1e-14);
  EXPECT_NEAR(b.entries(0, 3).real(), 0.5, 1e-14);
  EXPECT_NEAR(b.entries(1, 3).real(), -0.5, 1e-14);
  const auto c = pauli_expand(hermitian_roots(fixture("fixture_c_trivial.json")));
  EXPECT_NEAR(c.entries(0, 0).real(), 1.0, 1e-14);
  EXPECT_NEAR(c.squared_norm(), 1.0, 1e-14);
}

TEST(Orthogonality, Examples) {
  const std::vector<double> a{0.6, 0.0, 0.0, 0.8};
  std::vector<ComplexMatrix> scaled;
  for (int mu = 0; mu < 4; ++mu) scaled.push_back(a[static_cast<std::size_t>(mu)] * pauli(mu));
  const auto r = is_orthogonal(KrausSet(1, scaled));
  EXPECT_TRUE(r.orthogonal);
  EXPECT_NEAR(r.diagonal[0], 0.36, 1e-14);

  EXPECT_FALSE(is_orthogonal(hermitian_roots(fixture("fixture_a_povm.json"))).orthogonal);
  EXPECT_TRUE(is_orthogonal(hermitian_roots(fixture("fixture_b_z_measurement.json"))).orthogonal);
}

TEST(OrthogonalEquivalence, GivenKrausSetIsNotOeButItsRootsAre) {
  const auto f = load_measurement(data("fixture_d_kraus.json"));
  const auto ks = f.kraus();
  EXPECT_FALSE(is_oe(ks));
  EXPECT_NEAR(oe_offdiagonal(ks), 0.125, 1e-12);
  EXPECT_TRUE(is_oe(hermitian_roots(f.povm())));
  EXPECT_TRUE(is_oe(hermitian_roots(fixture("fixture_a_povm.json"))));
}

TEST(HermitianRoots, SquareToElements) {
  const auto p = fixture("fixture_a_povm.json");
  const auto r = hermitian_roots(p);
  EXPECT_TRUE(r.is_hermitian());
  EXPECT_LT(max_abs(r[0] - diag({1.0, 0.75})), 1e-14);
  EXPECT_LT(max_abs(r[1] - diag({0.0, kSqrtA})), 1e-14);
}

TEST(AncillaUnitary, Examples) {
  const auto roots = hermitian_roots(fixture("fixture_b_z_measurement.json"));
  const auto same = apply_ancilla_unitary(roots, ComplexMatrix::Identity(2, 2));
  EXPECT_LT(max_abs(same[0] - roots[0]), 1e-15);
  const auto swapped = apply_ancilla_unitary(roots, pauli(1));
  EXPECT_LT(max_abs(swapped[0] - roots[1]), 1e-15);
  const auto h = apply_ancilla_unitary(roots, hadamard());
  EXPECT_LT(max_abs(h[0] - pauli(0) / std::sqrt(2.0)), 1e-14);
  EXPECT_LT(max_abs(h[1] - pauli(3) / std::sqrt(2.0)), 1e-14);
  EXPECT_THROW(apply_ancilla_unitary(roots, diag({1.0, 2.0})), NotUnitary);
  EXPECT_THROW(apply_ancilla_unitary(roots, ComplexMatrix::Identity(3, 3)), DimensionMismatch);
}

TEST(AncillaUnitary, PreservesChannel) {
  Rng rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 1 + trial % 2;
    const auto ks = random_kraus(n, random_outcome_count(n, rng), rng);
    const auto mixed = apply_ancilla_unitary(ks, haar_unitary(static_cast<Index>(ks.size()), rng));
    const ComplexMatrix rho = random_density(ks.dim(), rng);
    EXPECT_LT(max_abs(apply_channel(ks, rho) - apply_channel(mixed, rho)), 1e-12);
  }
}

TEST(Decompose, FixtureA) {
  const auto d = oe_decompose(fixture("fixture_a_povm.json"));
  ASSERT_EQ(d.alphas.size(), 4u);
  EXPECT_NEAR(d.alphas[0] * d.alphas[0], 0.875, 1e-12);
  EXPECT_NEAR(d.alphas[3] * d.alphas[3], 0.125, 1e-12);
  EXPECT_EQ(d.retained, (std::vector<Index>{0, 3}));
  EXPECT_EQ(d.register_dim(), 2);
  EXPECT_TRUE(is_unitary(d.unitary));
  EXPECT_LT(d.reconstruction_error, 1e-12);
  EXPECT_NEAR(entanglement_cost(d), 0.5435644432, 1e-9);
}

TEST(Decompose, FixturesBandC) {
  const auto b = oe_decompose(fixture("fixture_b_z_measurement.json"));
  EXPECT_NEAR(entanglement_cost(b), 1.0, 1e-12);
  EXPECT_EQ(b.retained, (std::vector<Index>{0, 3}));
  const auto c = oe_decompose(fixture("fixture_c_trivial.json"));
  EXPECT_NEAR(entanglement_cost(c), 0.0, 1e-12);
  EXPECT_EQ(c.retained, (std::vector<Index>{0}));
  EXPECT_EQ(c.register_dim(), 1);
}

TEST(Decompose, TwoQubitParityMeasurement) {
  const auto d = oe_decompose(load_measurement(data("zz_measurement.json")).povm());
  EXPECT_NEAR(entanglement_cost(d), 2.0, 1e-12);
}

TEST(Decompose, RotatedProjectorNeedsAlignedFrame) {
  const double s = 1.0 / std::sqrt(2.0);
  const auto p = projective_along(s, s, 0.0);
  const auto roots = hermitian_roots(p);
  EXPECT_NEAR(pauli_expand(roots).gram()(1, 2).real(), 0.25, 1e-12);
  EXPECT_FALSE(is_oe(roots));
  EXPECT_THROW(oe_decompose(p), NotOrthogonalEquivalent);

  const auto d = oe_decompose(p, FramePolicy::AlignQubitFrame);
  EXPECT_LT(d.offdiagonal, 1e-12);
  EXPECT_TRUE(is_unitary(d.frame));
  EXPECT_NEAR(entanglement_cost(d), 1.0, 1e-12);
}

TEST(Decompose, AlignedFrameRejectsTwoQubits) {
  EXPECT_THROW(oe_decompose(load_measurement(data("zz_measurement.json")).povm(), FramePolicy::AlignQubitFrame),
               Error);
}

TEST(Properties, RootCoefficientsAreReal) {
  Rng rng(31);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 1 + trial % 2;
    EXPECT_LT(pauli_expand(hermitian_roots(random_povm(n, rng))).max_imaginary(), 1e-12);
  }
}

TEST(Properties, SingleQubitColumnRelations) {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    const auto c = pauli_expand(hermitian_roots(random_povm(1, rng)));
    EXPECT_LT(c.column_relation_residual(), 1e-12);
    EXPECT_NEAR(c.squared_norm(), 1.0, 1e-12);
  }
}

TEST(Properties, TwoQubitColumnRelationsAreNotImplied) {
  Rng rng(33);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial)
    worst = std::max(worst, pauli_expand(hermitian_roots(random_povm(2, rng))).column_relation_residual());
  EXPECT_GT(worst, 1e-4);
}

TEST(Properties, AlignedDecompositionOfRandomQubitPovms) {
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = random_povm(1, rng);
    const auto d = oe_decompose(p, FramePolicy::AlignQubitFrame);
    EXPECT_LT(d.reconstruction_error, 1e-9);
    const double e = entanglement_cost(d);
    EXPECT_GE(e, -1e-12);
    EXPECT_LE(e, 2.0 + 1e-12);
    double total = 0.0;
    for (double a : d.alphas) total += a * a;
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(Properties, RandomQubitRootsAreUsuallyNotOeInPauliFrame) {
  Rng rng(35);
  int oe = 0;
  for (int trial = 0; trial < 50; ++trial) oe += is_oe(hermitian_roots(random_povm(1, rng))) ? 1 : 0;
  EXPECT_LT(oe, 50);
}

TEST(Distribution, FixtureAState) {
  const auto f = load_measurement(data("fixture_a_povm.json"));
  const StateVector psi(*f.state, "B0");
  const auto probs = povm_distribution(f.povm(), psi);
  EXPECT_NEAR(probs[0], 0.36 + 0.64 * 0.5625, 1e-14);
  EXPECT_NEAR(probs[1], 0.64 * 0.4375, 1e-14);
  EXPECT_THROW(povm_distribution(f.povm(), StateVector(ComplexVector::Ones(2), "B0")), NotNormalized);
}

TEST(Fig1Povm, MatchesFixtureA) {
  const auto ks = fig1_povm(0.6, 0.8);
  EXPECT_LT(max_abs(ks[0] - diag({1.0, 0.75})), 1e-14);
  EXPECT_LT(max_abs(ks[1] - diag({0.0, -kSqrtA})), 1e-14);
  EXPECT_NEAR(entanglement_cost(oe_decompose(Povm::from_kraus(ks))), 0.5435644432, 1e-9);
}

TEST(Fig1Povm, RejectsBadAmplitudes) {
  EXPECT_THROW(fig1_povm(0.8, 0.6), std::invalid_argument);
  EXPECT_THROW(fig1_povm(0.5, 0.5), std::invalid_argument);
}

TEST(Fig1Povm, Limits) {
  const double s = 1.0 / std::sqrt(2.0);
  EXPECT_LT(entanglement_cost(oe_decompose(Povm::from_kraus(fig1_povm(s, s)))), 1e-12);
  const double a = 1e-3;
  const double e = entanglement_cost(oe_decompose(Povm::from_kraus(fig1_povm(a, std::sqrt(1 - a * a)))));
  EXPECT_NEAR(e, 1.0, 1e-5);
}
