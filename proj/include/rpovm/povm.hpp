#pragma once

// POVMs, Kraus sets and their Pauli-coefficient algebra: orthogonality,
// orthogonal equivalence (OE), hermitian roots, the OE decomposition that
// fixes the shared resource, and its entanglement cost.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "rpovm/errors.hpp"
#include "rpovm/linalg.hpp"
#include "rpovm/tolerances.hpp"

namespace rpovm {

inline constexpr int kMaxQubits = 3;

inline Index qubit_dim(int n_qubits) { return Index{1} << n_qubits; }
inline Index pauli_count(int n_qubits) { return Index{1} << (2 * n_qubits); }

// ---------------------------------------------------------------------------
// Pauli strings

// Base-4 digit of `index` for qubit `q` (q = 0 is the most significant digit).
inline int pauli_digit(Index index, int q, int n_qubits) {
  return static_cast<int>((index >> (2 * (n_qubits - 1 - q))) & 3);
}

inline ComplexMatrix pauli_string(Index index, int n_qubits) {
  ComplexMatrix m = ComplexMatrix::Identity(1, 1);
  for (int q = 0; q < n_qubits; ++q) m = tensor(m, pauli(pauli_digit(index, q, n_qubits)));
  return m;
}

inline std::string pauli_label(Index index, int n_qubits) {
  static constexpr char kNames[] = {'I', 'X', 'Y', 'Z'};
  std::string s;
  for (int q = 0; q < n_qubits; ++q) s += kNames[pauli_digit(index, q, n_qubits)];
  return s;
}

inline std::vector<ComplexMatrix> pauli_basis(int n_qubits) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw std::out_of_range("pauli_basis: n must be in 1.." + std::to_string(kMaxQubits));
  }
  std::vector<ComplexMatrix> basis;
  basis.reserve(static_cast<std::size_t>(pauli_count(n_qubits)));
  for (Index i = 0; i < pauli_count(n_qubits); ++i) basis.push_back(pauli_string(i, n_qubits));
  return basis;
}

// Normalized Hilbert-Schmidt inner product (a, b) = Tr(a^dag b) / dim.
inline Complex hs_inner(const ComplexMatrix& a, const ComplexMatrix& b) {
  if (a.rows() != a.cols() || b.rows() != b.cols() || a.rows() != b.rows()) {
    throw DimensionMismatch("hs_inner needs square matrices of equal dimension");
  }
  return (a.adjoint() * b).trace() / static_cast<double>(a.rows());
}

// ---------------------------------------------------------------------------
// Measurement carriers

namespace detail {

inline int qubits_for_dim(Index dim) {
  int n = 0;
  while ((Index{1} << n) < dim) ++n;
  if ((Index{1} << n) != dim) throw InvalidMeasurement("operator dimension is not a power of two");
  return n;
}

inline void check_operator_shapes(int n_qubits, const std::vector<ComplexMatrix>& ops) {
  if (n_qubits < 1 || n_qubits > kMaxQubits) {
    throw InvalidMeasurement("n_qubits must be in 1.." + std::to_string(kMaxQubits));
  }
  if (ops.empty()) throw InvalidMeasurement("a measurement needs at least one operator");
  const Index d = qubit_dim(n_qubits);
  for (std::size_t i = 0; i < ops.size(); ++i) {
    if (ops[i].rows() != d || ops[i].cols() != d) {
      throw DimensionMismatch("operator " + std::to_string(i) + " is " + std::to_string(ops[i].rows()) +
                               "x" + std::to_string(ops[i].cols()) + ", expected " + std::to_string(d) +
                               "x" + std::to_string(d));
    }
    if (!ops[i].allFinite()) throw InvalidMeasurement("operator " + std::to_string(i) + " is not finite");
  }
}

}  // namespace detail

// Kraus operators {M_mu} with sum M^dag M = I.
class KrausSet {
 public:
  KrausSet(int n_qubits, std::vector<ComplexMatrix> operators,
           const Tolerances& tol = kDefaultTolerances)
      : n_qubits_(n_qubits), operators_(std::move(operators)) {
    detail::check_operator_shapes(n_qubits_, operators_);
    const double r = completeness_residual();
    if (r > tol.completeness) {
      throw InvalidMeasurement("Kraus operators are not complete (residual " + std::to_string(r) + ")");
    }
  }

  explicit KrausSet(std::vector<ComplexMatrix> operators, const Tolerances& tol = kDefaultTolerances)
      : KrausSet(operators.empty() ? 0 : detail::qubits_for_dim(operators.front().rows()),
                 std::move(operators), tol) {}

  int n_qubits() const { return n_qubits_; }
  Index dim() const { return qubit_dim(n_qubits_); }
  std::size_t size() const { return operators_.size(); }
  const ComplexMatrix& operator[](std::size_t i) const { return operators_[i]; }
  const std::vector<ComplexMatrix>& operators() const { return operators_; }

  double completeness_residual() const {
    ComplexMatrix sum = ComplexMatrix::Zero(dim(), dim());
    for (const auto& m : operators_) sum += m.adjoint() * m;
    return max_abs(sum - ComplexMatrix::Identity(dim(), dim()));
  }

  bool is_hermitian(double tol = kDefaultTolerances.hermitian) const {
    for (const auto& m : operators_)
      if (!rpovm::is_hermitian(m, tol)) return false;
    return true;
  }

 private:
  int n_qubits_;
  std::vector<ComplexMatrix> operators_;
};

// POVM elements {F_mu}: hermitian, PSD, summing to I.
class Povm {
 public:
  Povm(int n_qubits, std::vector<ComplexMatrix> elements, const Tolerances& tol = kDefaultTolerances)
      : n_qubits_(n_qubits), elements_(std::move(elements)) {
    detail::check_operator_shapes(n_qubits_, elements_);
    ComplexMatrix sum = ComplexMatrix::Zero(dim(), dim());
    for (std::size_t i = 0; i < elements_.size(); ++i) {
      const auto& f = elements_[i];
      if (hermiticity_residual(f) > tol.hermitian) {
        throw InvalidMeasurement("element " + std::to_string(i) + " is not hermitian");
      }
      const double lmin = hermitian_eig(f, tol).values.minCoeff();
      if (lmin < -tol.psd_clamp) {
        throw InvalidMeasurement("element " + std::to_string(i) + " has negative eigenvalue " +
                                 std::to_string(lmin));
      }
      sum += f;
    }
    const double r = max_abs(sum - ComplexMatrix::Identity(dim(), dim()));
    if (r > tol.completeness) {
      throw InvalidMeasurement("POVM elements do not sum to identity (residual " + std::to_string(r) + ")");
    }
  }

  static Povm from_kraus(const KrausSet& ks, const Tolerances& tol = kDefaultTolerances) {
    std::vector<ComplexMatrix> f;
    f.reserve(ks.size());
    for (const auto& m : ks.operators()) {
      ComplexMatrix e = m.adjoint() * m;
      f.push_back(0.5 * (e + e.adjoint()));
    }
    return Povm(ks.n_qubits(), std::move(f), tol);
  }

  int n_qubits() const { return n_qubits_; }
  Index dim() const { return qubit_dim(n_qubits_); }
  std::size_t size() const { return elements_.size(); }
  const ComplexMatrix& operator[](std::size_t i) const { return elements_[i]; }
  const std::vector<ComplexMatrix>& elements() const { return elements_; }

 private:
  int n_qubits_;
  std::vector<ComplexMatrix> elements_;
};

// ---------------------------------------------------------------------------
// Pauli coefficients

// c(mu, eta) = (sigma_eta, M_mu); rows are Kraus outcomes, columns Pauli strings.
struct CoefficientMatrix {
  ComplexMatrix entries;

  Index outcomes() const { return entries.rows(); }
  Index paulis() const { return entries.cols(); }
  double squared_norm() const { return entries.squaredNorm(); }
  ComplexMatrix gram() const { return entries.adjoint() * entries; }

  double max_offdiagonal_gram() const {
    ComplexMatrix g = gram();
    g.diagonal().setZero();
    return max_abs(g);
  }

  double max_imaginary() const { return entries.size() ? entries.imag().cwiseAbs().maxCoeff() : 0.0; }

  // Completeness relations: Re sum_mu c*_{mu0} c_{mu k} = 0 for k >= 1 and
  // Im sum_mu c*_{mu n} c_{mu m} = 0 for n, m >= 1. Returns the worst residual.
  // Both follow from completeness on one qubit. For n > 1, products of
  // commuting Pauli strings also feed each sigma_k coefficient, so neither
  // family is implied there.
  double column_relation_residual() const {
    const ComplexMatrix g = gram();
    double worst = 0.0;
    for (Index k = 1; k < g.cols(); ++k) worst = std::max(worst, std::abs(g(0, k).real()));
    for (Index a = 1; a < g.cols(); ++a)
      for (Index b = 1; b < g.cols(); ++b) worst = std::max(worst, std::abs(g(a, b).imag()));
    return worst;
  }
};

// Expansion coefficients of each operator in an orthonormal operator basis.
inline CoefficientMatrix expand_in_basis(const std::vector<ComplexMatrix>& ops,
                                         const std::vector<ComplexMatrix>& basis) {
  CoefficientMatrix c{ComplexMatrix(static_cast<Index>(ops.size()), static_cast<Index>(basis.size()))};
  for (std::size_t mu = 0; mu < ops.size(); ++mu)
    for (std::size_t eta = 0; eta < basis.size(); ++eta)
      c.entries(static_cast<Index>(mu), static_cast<Index>(eta)) = hs_inner(basis[eta], ops[mu]);
  return c;
}

inline CoefficientMatrix pauli_expand(const KrausSet& ks) {
  return expand_in_basis(ks.operators(), pauli_basis(ks.n_qubits()));
}

struct OrthogonalityReport {
  bool orthogonal = false;
  std::vector<double> diagonal;  // c_mu = (M_mu, M_mu)
  double max_offdiagonal = 0.0;
};

inline OrthogonalityReport is_orthogonal(const KrausSet& ks, const Tolerances& tol = kDefaultTolerances) {
  OrthogonalityReport r;
  for (std::size_t a = 0; a < ks.size(); ++a) {
    r.diagonal.push_back(hs_inner(ks[a], ks[a]).real());
    for (std::size_t b = a + 1; b < ks.size(); ++b)
      r.max_offdiagonal = std::max(r.max_offdiagonal, std::abs(hs_inner(ks[a], ks[b])));
  }
  r.orthogonal = r.max_offdiagonal < tol.orthogonal;
  return r;
}

// Largest off-diagonal modulus of c^dag c in the Pauli basis.
inline double oe_offdiagonal(const KrausSet& ks) {
  return pauli_expand(ks).max_offdiagonal_gram();
}

inline bool is_oe(const KrausSet& ks, const Tolerances& tol = kDefaultTolerances) {
  return oe_offdiagonal(ks) < tol.oe_offdiagonal;
}

inline KrausSet hermitian_roots(const Povm& p, const Tolerances& tol = kDefaultTolerances) {
  std::vector<ComplexMatrix> roots;
  roots.reserve(p.size());
  for (const auto& f : p.elements()) roots.push_back(psd_sqrt(f, tol));
  return KrausSet(p.n_qubits(), std::move(roots), tol);
}

// N_mu = sum_rho u(mu, rho) M_rho.
inline KrausSet apply_ancilla_unitary(const KrausSet& ks, const ComplexMatrix& u,
                                      const Tolerances& tol = kDefaultTolerances) {
  const auto k = static_cast<Index>(ks.size());
  if (u.rows() != k || u.cols() != k) {
    throw DimensionMismatch("ancilla unitary must be " + std::to_string(k) + "x" + std::to_string(k));
  }
  if (!is_unitary(u, tol.unitary)) throw NotUnitary("ancilla transformation is not unitary");
  std::vector<ComplexMatrix> out(ks.size(), ComplexMatrix::Zero(ks.dim(), ks.dim()));
  for (Index mu = 0; mu < k; ++mu)
    for (Index rho = 0; rho < k; ++rho) out[static_cast<std::size_t>(mu)] += u(mu, rho) * ks[static_cast<std::size_t>(rho)];
  return KrausSet(ks.n_qubits(), std::move(out), tol);
}

// sum_mu M rho M^dag
inline ComplexMatrix apply_channel(const KrausSet& ks, const ComplexMatrix& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(rho.rows(), rho.cols());
  for (const auto& m : ks.operators()) out += m * rho * m.adjoint();
  return out;
}

// ---------------------------------------------------------------------------
// Qubit frame alignment

namespace detail {

// SU(2) element W with W sigma_k W^dag = sum_l R(l, k) sigma_l for a proper
// rotation R. Uses sum_mu tau_mu A sigma_mu = 2 Tr(W^dag A) W with the
// probe A chosen to avoid Tr(W^dag A) = 0.
inline ComplexMatrix su2_from_rotation(const Eigen::Matrix3d& rot) {
  std::vector<ComplexMatrix> tau{pauli(0)};
  for (int k = 0; k < 3; ++k) {
    ComplexMatrix t = ComplexMatrix::Zero(2, 2);
    for (int l = 0; l < 3; ++l) t += rot(l, k) * pauli(l + 1);
    tau.push_back(t);
  }
  ComplexMatrix best;
  double best_norm = -1.0;
  for (int probe = 0; probe < 4; ++probe) {
    ComplexMatrix x = ComplexMatrix::Zero(2, 2);
    for (int mu = 0; mu < 4; ++mu) x += tau[mu] * pauli(probe) * pauli(mu);
    if (x.norm() > best_norm) best_norm = x.norm(), best = x;
  }
  return best * (std::sqrt(2.0) / best_norm);
}

}  // namespace detail

enum class FramePolicy {
  // Bob's coupling uses the Pauli strings as given.
  PauliFrame,
  // n = 1 only: Bob first rotates his qubit frame so that the 3x3 Pauli block
  // of c^T c becomes diagonal; the coupling then uses W sigma_mu W^dag.
  AlignQubitFrame,
};

inline const char* to_string(FramePolicy p) {
  return p == FramePolicy::PauliFrame ? "pauli" : "aligned";
}

// Frame unitary W for a set of hermitian Kraus operators on one qubit.
inline ComplexMatrix qubit_alignment_frame(const KrausSet& roots) {
  if (roots.n_qubits() != 1) throw Error("frame alignment is only defined for one qubit");
  const Eigen::MatrixXd g = pauli_expand(roots).gram().real();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(g.block<3, 3>(1, 1));
  Eigen::Matrix3d rot = solver.eigenvectors();
  if (rot.determinant() < 0) rot.col(0) *= -1.0;
  return detail::su2_from_rotation(rot);
}

// ---------------------------------------------------------------------------
// OE decomposition

struct OEDecomposition {
  int n_qubits = 0;
  std::vector<double> alphas;       // 4^n Schmidt weights of the resource
  std::vector<Index> retained;      // Pauli indices with alpha above cutoff
  ComplexMatrix unitary;            // K' x K'; row j <-> retained[j], column nu <-> outcome
  KrausSet source_roots;            // sqrt(F_mu)
  FramePolicy policy = FramePolicy::PauliFrame;
  ComplexMatrix frame;              // W (identity for PauliFrame)
  CoefficientMatrix coefficients;   // in the (possibly rotated) frame
  double offdiagonal = 0.0;         // worst |c^dag c| off-diagonal
  double reconstruction_error = 0.0;

  std::size_t outcome_count() const { return source_roots.size(); }
  Index register_dim() const { return unitary.rows(); }

  std::vector<double> retained_alphas() const {
    std::vector<double> a;
    for (Index r : retained) a.push_back(alphas[static_cast<std::size_t>(r)]);
    return a;
  }

  // tau_mu = W sigma_mu W^dag
  ComplexMatrix frame_operator(Index pauli_index) const {
    return frame * pauli_string(pauli_index, n_qubits) * frame.adjoint();
  }
};

namespace detail {

// Extends orthonormal rows to a square unitary by modified Gram-Schmidt over
// the computational basis.
inline ComplexMatrix complete_rows(const ComplexMatrix& rows, Index size) {
  ComplexMatrix u = ComplexMatrix::Zero(size, size);
  u.topRows(rows.rows()) = rows;
  Index filled = rows.rows();
  for (Index e = 0; e < size && filled < size; ++e) {
    ComplexVector v = basis_vector(size, e);
    for (int pass = 0; pass < 2; ++pass)
      for (Index r = 0; r < filled; ++r) {
        const ComplexVector row = u.row(r).transpose();
        v -= row.dot(v) * row;
      }
    if (v.norm() < 1e-6) continue;
    u.row(filled++) = v.normalized().transpose();
  }
  return u;
}

}  // namespace detail

// Orthogonal-form decomposition of a POVM's hermitian roots:
//   alpha_l^2 = sum_mu |c_{mu l}|^2,  U(j, nu) = c(nu, retained[j]) / alpha,
// so that sqrt(F_nu) = sum_j U(j, nu) alpha_{retained[j]} tau_{retained[j]}.
inline OEDecomposition oe_decompose(const Povm& p, FramePolicy policy = FramePolicy::PauliFrame,
                                    const Tolerances& tol = kDefaultTolerances) {
  if (p.n_qubits() > kMaxQubits) throw std::out_of_range("oe_decompose: too many qubits");
  KrausSet roots = hermitian_roots(p, tol);
  const int n = p.n_qubits();

  ComplexMatrix frame = ComplexMatrix::Identity(qubit_dim(n), qubit_dim(n));
  if (policy == FramePolicy::AlignQubitFrame) {
    if (n != 1) throw Error("AlignQubitFrame is only available for single-qubit POVMs");
    frame = qubit_alignment_frame(roots);
  }
  std::vector<ComplexMatrix> basis;
  for (Index i = 0; i < pauli_count(n); ++i) basis.push_back(frame * pauli_string(i, n) * frame.adjoint());
  CoefficientMatrix c = expand_in_basis(roots.operators(), basis);

  const double off = c.max_offdiagonal_gram();
  if (off > tol.oe_offdiagonal) {
    throw NotOrthogonalEquivalent("hermitian roots are not OE in the " + std::string(to_string(policy)) +
                                  " frame: max |c^dag c| off-diagonal = " + std::to_string(off));
  }

  const ComplexMatrix g = c.gram();
  OEDecomposition d{.n_qubits = n,
                    .alphas = {},
                    .retained = {},
                    .unitary = {},
                    .source_roots = roots,
                    .policy = policy,
                    .frame = frame,
                    .coefficients = c,
                    .offdiagonal = off};
  for (Index l = 0; l < g.cols(); ++l) {
    const double a = std::sqrt(std::max(g(l, l).real(), 0.0));
    d.alphas.push_back(a);
    if (a > tol.alpha_cutoff) d.retained.push_back(l);
  }

  const auto k = static_cast<Index>(roots.size());
  const auto m = static_cast<Index>(d.retained.size());
  const Index kprime = std::max(k, m);
  ComplexMatrix rows = ComplexMatrix::Zero(m, kprime);
  for (Index j = 0; j < m; ++j) {
    const Index l = d.retained[static_cast<std::size_t>(j)];
    for (Index nu = 0; nu < k; ++nu) rows(j, nu) = c.entries(nu, l) / d.alphas[static_cast<std::size_t>(l)];
  }
  d.unitary = detail::complete_rows(rows, kprime);
  if (!is_unitary(d.unitary, tol.unitary)) {
    throw NotOrthogonalEquivalent("correcting transformation is not unitary (residual " +
                                  std::to_string(unitarity_residual(d.unitary)) + ")");
  }

  double worst = 0.0;
  for (Index nu = 0; nu < k; ++nu) {
    ComplexMatrix rebuilt = ComplexMatrix::Zero(roots.dim(), roots.dim());
    for (Index j = 0; j < m; ++j) {
      const Index l = d.retained[static_cast<std::size_t>(j)];
      rebuilt += d.unitary(j, nu) * d.alphas[static_cast<std::size_t>(l)] * basis[static_cast<std::size_t>(l)];
    }
    worst = std::max(worst, max_abs(rebuilt - roots[static_cast<std::size_t>(nu)]));
  }
  d.reconstruction_error = worst;
  if (worst > tol.decomposition) {
    throw NotOrthogonalEquivalent("OE reconstruction error " + std::to_string(worst));
  }
  return d;
}

// Entanglement (ebits) of the resource sum alpha_mu |mu>|mu>.
inline double entanglement_cost(const OEDecomposition& d, const Tolerances& tol = kDefaultTolerances) {
  return entropy_base2(std::span<const double>(d.alphas), tol);
}

// Prob(mu) = <psi|F_mu|psi>
inline std::vector<double> povm_distribution(const Povm& p, const StateVector& psi,
                                             const Tolerances& tol = kDefaultTolerances) {
  if (psi.dim() != p.dim()) {
    throw DimensionMismatch("state dimension " + std::to_string(psi.dim()) + " vs POVM dimension " +
                            std::to_string(p.dim()));
  }
  if (!psi.is_normalized(tol.state_norm)) throw NotNormalized("povm_distribution: state is not normalized");
  std::vector<double> probs;
  probs.reserve(p.size());
  for (const auto& f : p.elements()) {
    const double v = psi.amplitudes().dot(f * psi.amplitudes()).real();
    probs.push_back(std::max(v, 0.0));
  }
  return probs;
}

// Kraus pair for unambiguous discrimination of alpha|0> +- beta|1>.
//   M_0 = (1 + a/b)/2 + (1 - a/b)/2 sigma_z,  M_1 = -sqrt(b^2 - a^2)/(2b) (1 - sigma_z)
inline KrausSet fig1_povm(double alpha, double beta, const Tolerances& tol = kDefaultTolerances) {
  if (std::abs(alpha * alpha + beta * beta - 1.0) > tol.hermitian) {
    throw std::invalid_argument("fig1_povm: alpha^2 + beta^2 must equal 1");
  }
  if (!(alpha > 0.0)) throw std::invalid_argument("fig1_povm: alpha must be positive");
  if (alpha > beta + tol.hermitian) {
    throw std::invalid_argument(
        "fig1_povm: alpha > beta; swap the roles of |0> and |1> so that alpha <= beta");
  }
  const double ratio = std::min(alpha / beta, 1.0);
  const double gap = std::sqrt(std::max(beta * beta - alpha * alpha, 0.0));
  const ComplexMatrix id = pauli(0);
  const ComplexMatrix z = pauli(3);
  ComplexMatrix m0 = 0.5 * (1.0 + ratio) * id + 0.5 * (1.0 - ratio) * z;
  ComplexMatrix m1 = -gap / (2.0 * beta) * (id - z);
  return KrausSet(1, {m0, m1}, tol);
}

}  // namespace rpovm
