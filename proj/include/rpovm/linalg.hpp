#pragma once

// Dense complex linear algebra for small registers: Kronecker products,
// subsystem-local operator application, hermitian eigendecomposition,
// PSD square roots, partial traces, Schmidt decomposition and entropy.
//
// Index convention: the first subsystem of a layout is the slowest-varying
// index of the joint amplitude vector.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <span>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rpovm/errors.hpp"
#include "rpovm/tolerances.hpp"

namespace rpovm {

using Complex = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using Index = Eigen::Index;

inline constexpr Complex kI{0.0, 1.0};

struct Subsystem {
  std::string id;
  Index dim = 2;

  friend bool operator==(const Subsystem&, const Subsystem&) = default;
};

using Layout = std::vector<Subsystem>;

inline Index layout_dim(const Layout& layout) {
  Index d = 1;
  for (const auto& s : layout) d *= s.dim;
  return d;
}

inline Layout qubit_register(const std::string& prefix, int count) {
  Layout l;
  for (int i = 0; i < count; ++i) l.push_back({prefix + std::to_string(i), 2});
  return l;
}

// ---------------------------------------------------------------------------
// Matrix predicates and small builders

inline double max_abs(const ComplexMatrix& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double hermiticity_residual(const ComplexMatrix& m) {
  return max_abs(m - m.adjoint());
}

inline bool is_hermitian(const ComplexMatrix& m, double tol = kDefaultTolerances.hermitian) {
  return m.rows() == m.cols() && hermiticity_residual(m) <= tol;
}

inline double unitarity_residual(const ComplexMatrix& u) {
  if (u.rows() != u.cols()) return std::numeric_limits<double>::infinity();
  return max_abs(u.adjoint() * u - ComplexMatrix::Identity(u.rows(), u.cols()));
}

inline bool is_unitary(const ComplexMatrix& u, double tol = kDefaultTolerances.unitary) {
  return unitarity_residual(u) <= tol;
}

inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline ComplexMatrix diag(std::initializer_list<Complex> d) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Index>(d.size()), static_cast<Index>(d.size()));
  Index i = 0;
  for (const auto& v : d) m(i, i) = v, ++i;
  return m;
}

inline ComplexMatrix pauli(int which) {
  ComplexMatrix m(2, 2);
  switch (which) {
    case 0: m << 1, 0, 0, 1; break;
    case 1: m << 0, 1, 1, 0; break;
    case 2: m << 0, -kI, kI, 0; break;
    case 3: m << 1, 0, 0, -1; break;
    default: throw std::out_of_range("pauli index must be 0..3");
  }
  return m;
}

inline ComplexMatrix hadamard() {
  ComplexMatrix h(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  h << r, r, r, -r;
  return h;
}

inline ComplexVector basis_vector(Index dim, Index k) {
  ComplexVector v = ComplexVector::Zero(dim);
  v(k) = 1.0;
  return v;
}

// ---------------------------------------------------------------------------
// StateVector

class StateVector {
 public:
  StateVector() = default;

  StateVector(ComplexVector amplitudes, Layout layout)
      : amplitudes_(std::move(amplitudes)), layout_(std::move(layout)) {
    std::unordered_set<std::string> seen;
    for (const auto& s : layout_) {
      if (s.dim < 1) throw DimensionMismatch("subsystem '" + s.id + "' has non-positive dimension");
      if (!seen.insert(s.id).second) throw DimensionMismatch("duplicate subsystem id '" + s.id + "'");
    }
    if (layout_dim(layout_) != amplitudes_.size()) {
      throw DimensionMismatch("amplitude count " + std::to_string(amplitudes_.size()) +
                              " does not match layout dimension " +
                              std::to_string(layout_dim(layout_)));
    }
    if (!amplitudes_.allFinite()) throw Error("state amplitudes must be finite");
  }

  // Single-subsystem state.
  StateVector(ComplexVector amplitudes, std::string id)
      : StateVector(amplitudes, Layout{{std::move(id), amplitudes.size()}}) {}

  static StateVector basis(Layout layout, Index k) {
    const Index d = layout_dim(layout);
    return StateVector(basis_vector(d, k), std::move(layout));
  }

  const ComplexVector& amplitudes() const { return amplitudes_; }
  const Layout& layout() const { return layout_; }
  Index dim() const { return amplitudes_.size(); }
  double norm() const { return amplitudes_.norm(); }

  StateVector normalized() const {
    const double n = norm();
    if (n == 0.0) throw NotNormalized("cannot normalize the zero vector");
    return StateVector(amplitudes_ / n, layout_);
  }

  bool is_normalized(double tol = kDefaultTolerances.state_norm) const {
    return std::abs(amplitudes_.squaredNorm() - 1.0) <= tol;
  }

  std::size_t position(const std::string& id) const {
    for (std::size_t i = 0; i < layout_.size(); ++i)
      if (layout_[i].id == id) return i;
    throw UnknownSubsystem("unknown subsystem '" + id + "'");
  }

  bool contains(const std::string& id) const {
    return std::any_of(layout_.begin(), layout_.end(), [&](const Subsystem& s) { return s.id == id; });
  }

 private:
  ComplexVector amplitudes_;
  Layout layout_;
};

// ---------------------------------------------------------------------------
// Tensor product

inline ComplexMatrix tensor(const ComplexMatrix& a, const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
  return out;
}

inline ComplexMatrix tensor(std::span<const ComplexMatrix> factors) {
  ComplexMatrix out = ComplexMatrix::Identity(1, 1);
  for (const auto& f : factors) out = tensor(out, f);
  return out;
}

inline StateVector tensor(const StateVector& a, const StateVector& b) {
  ComplexVector amps = tensor(ComplexMatrix(a.amplitudes()), ComplexMatrix(b.amplitudes()));
  Layout layout = a.layout();
  layout.insert(layout.end(), b.layout().begin(), b.layout().end());
  return StateVector(std::move(amps), std::move(layout));
}

namespace detail {

// Strides and per-target offsets for addressing a subset of subsystems.
struct SubsystemIndexer {
  std::vector<Index> target_offsets;  // offset of each target-local basis state
  std::vector<Index> rest_offsets;    // offset of each configuration of the rest
};

inline SubsystemIndexer make_indexer(const Layout& layout, const std::vector<std::size_t>& targets) {
  const std::size_t k = layout.size();
  std::vector<Index> stride(k, 1);
  for (std::size_t i = k; i-- > 1;) stride[i - 1] = stride[i] * layout[i].dim;

  auto offsets_for = [&](const std::vector<std::size_t>& positions) {
    std::vector<Index> offs{0};
    for (std::size_t p : positions) {
      std::vector<Index> next;
      next.reserve(offs.size() * static_cast<std::size_t>(layout[p].dim));
      for (Index o : offs)
        for (Index d = 0; d < layout[p].dim; ++d) next.push_back(o + d * stride[p]);
      offs = std::move(next);
    }
    return offs;
  };

  std::vector<bool> is_target(k, false);
  for (std::size_t t : targets) is_target[t] = true;
  std::vector<std::size_t> rest;
  for (std::size_t i = 0; i < k; ++i)
    if (!is_target[i]) rest.push_back(i);

  return {offsets_for(targets), offsets_for(rest)};
}

inline std::vector<std::size_t> resolve(const StateVector& state, std::span<const std::string> ids) {
  std::vector<std::size_t> pos;
  pos.reserve(ids.size());
  for (const auto& id : ids) {
    const std::size_t p = state.position(id);
    if (std::find(pos.begin(), pos.end(), p) != pos.end())
      throw DimensionMismatch("subsystem '" + id + "' listed twice");
    pos.push_back(p);
  }
  return pos;
}

}  // namespace detail

// Applies `op` to the listed subsystems (first listed = slowest index of op),
// identity elsewhere. `op` need not be unitary.
inline StateVector apply_on_subsystems(const ComplexMatrix& op, const StateVector& state,
                                       std::span<const std::string> targets) {
  const auto pos = detail::resolve(state, targets);
  Index target_dim = 1;
  for (std::size_t p : pos) target_dim *= state.layout()[p].dim;
  if (op.rows() != target_dim || op.cols() != target_dim) {
    throw DimensionMismatch("operator is " + std::to_string(op.rows()) + "x" +
                            std::to_string(op.cols()) + " but targets span dimension " +
                            std::to_string(target_dim));
  }
  const auto idx = detail::make_indexer(state.layout(), pos);
  const ComplexVector& in = state.amplitudes();
  ComplexVector out(in.size());
  ComplexVector local(target_dim);
  for (Index base : idx.rest_offsets) {
    for (Index j = 0; j < target_dim; ++j) local(j) = in(base + idx.target_offsets[j]);
    const ComplexVector mapped = op * local;
    for (Index j = 0; j < target_dim; ++j) out(base + idx.target_offsets[j]) = mapped(j);
  }
  return StateVector(std::move(out), state.layout());
}

inline StateVector apply_on_subsystems(const ComplexMatrix& op, const StateVector& state,
                                       std::initializer_list<std::string> targets) {
  const std::vector<std::string> t(targets);
  return apply_on_subsystems(op, state, std::span<const std::string>(t));
}

// Amplitudes arranged as a (left x rest) matrix; rows follow `left` order,
// columns follow the remaining subsystems in layout order.
inline ComplexMatrix bipartite_matrix(const StateVector& state, std::span<const std::string> left) {
  const auto pos = detail::resolve(state, left);
  const auto idx = detail::make_indexer(state.layout(), pos);
  ComplexMatrix m(static_cast<Index>(idx.target_offsets.size()),
                  static_cast<Index>(idx.rest_offsets.size()));
  for (Index r = 0; r < m.rows(); ++r)
    for (Index c = 0; c < m.cols(); ++c)
      m(r, c) = state.amplitudes()(idx.target_offsets[r] + idx.rest_offsets[c]);
  return m;
}

inline Layout complement(const Layout& layout, std::span<const std::string> ids) {
  Layout rest;
  for (const auto& s : layout)
    if (std::find(ids.begin(), ids.end(), s.id) == ids.end()) rest.push_back(s);
  return rest;
}

// Reduced density operator on `keep` (in the order given).
inline ComplexMatrix partial_trace(const StateVector& state, std::span<const std::string> keep) {
  const ComplexMatrix psi = bipartite_matrix(state, keep);
  return psi * psi.adjoint();
}

// ---------------------------------------------------------------------------
// Eigendecomposition and square roots

struct EigenDecomposition {
  RealVector values;       // ascending
  ComplexMatrix vectors;   // columns
};

inline EigenDecomposition hermitian_eig(const ComplexMatrix& m,
                                        const Tolerances& tol = kDefaultTolerances) {
  if (m.rows() != m.cols()) throw DimensionMismatch("hermitian_eig needs a square matrix");
  if (!m.allFinite()) throw Error("hermitian_eig: non-finite input");
  if (hermiticity_residual(m) > tol.hermitian) {
    throw NotHermitian("matrix is not hermitian (residual " + std::to_string(hermiticity_residual(m)) + ")");
  }
  const ComplexMatrix sym = 0.5 * (m + m.adjoint());
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(sym);
  if (solver.info() != Eigen::Success) throw Error("hermitian_eig: eigensolver did not converge");
  return {solver.eigenvalues(), solver.eigenvectors()};
}

inline ComplexMatrix psd_sqrt(const ComplexMatrix& m, const Tolerances& tol = kDefaultTolerances) {
  auto eig = hermitian_eig(m, tol);
  RealVector roots(eig.values.size());
  for (Index i = 0; i < eig.values.size(); ++i) {
    const double l = eig.values(i);
    if (l < -tol.psd_clamp) {
      throw NotPositive("negative eigenvalue " + std::to_string(l) + " in a POVM element");
    }
    // eigenvalues at rounding level are zero; sqrt would blow 1e-16 up to 1e-8
    roots(i) = l <= tol.psd_clamp ? 0.0 : std::sqrt(l);
  }
  const ComplexMatrix r = eig.vectors * roots.cast<Complex>().asDiagonal() * eig.vectors.adjoint();
  return 0.5 * (r + r.adjoint());
}

// ---------------------------------------------------------------------------
// Schmidt decomposition and entropy

struct SchmidtDecomposition {
  std::vector<double> coefficients;       // descending, non-negative
  std::vector<ComplexVector> left_basis;  // over the left subsystems
  std::vector<ComplexVector> right_basis; // over the complement, layout order
  Layout left_layout;
  Layout right_layout;

  StateVector reconstruct() const {
    Layout layout = left_layout;
    layout.insert(layout.end(), right_layout.begin(), right_layout.end());
    ComplexVector amps = ComplexVector::Zero(layout_dim(layout));
    for (std::size_t i = 0; i < coefficients.size(); ++i) {
      amps += coefficients[i] * tensor(ComplexMatrix(left_basis[i]), ComplexMatrix(right_basis[i]));
    }
    return StateVector(std::move(amps), std::move(layout));
  }
};

// Schmidt decomposition across left | rest, from the eigendecomposition of the
// reduced density operator on the left side. Eigenvalues below
// `tol.schmidt_floor` are indistinguishable from rounding and are dropped.
inline SchmidtDecomposition schmidt(const StateVector& state, std::span<const std::string> left,
                                    const Tolerances& tol = kDefaultTolerances) {
  if (left.empty()) throw DimensionMismatch("schmidt: left side is empty");
  if (left.size() >= state.layout().size()) throw DimensionMismatch("schmidt: right side is empty");
  const ComplexMatrix psi = bipartite_matrix(state, left);
  const auto eig = hermitian_eig(psi * psi.adjoint(), tol);

  SchmidtDecomposition out;
  for (const auto& id : left) out.left_layout.push_back(state.layout()[state.position(id)]);
  out.right_layout = complement(state.layout(), left);

  for (Index i = eig.values.size(); i-- > 0;) {
    const double lambda = eig.values(i);
    if (lambda < tol.schmidt_floor) break;
    const double c = std::sqrt(lambda);
    const ComplexVector l = eig.vectors.col(i);
    ComplexVector r = (l.adjoint() * psi).transpose() / c;
    // re-orthonormalize against earlier partners to absorb rounding
    for (const auto& prev : out.right_basis) r -= prev.dot(r) * prev;
    r.normalize();
    out.coefficients.push_back(c);
    out.left_basis.push_back(l);
    out.right_basis.push_back(std::move(r));
  }
  return out;
}

inline SchmidtDecomposition schmidt(const StateVector& state, std::initializer_list<std::string> left,
                                    const Tolerances& tol = kDefaultTolerances) {
  const std::vector<std::string> l(left);
  return schmidt(state, std::span<const std::string>(l), tol);
}

// Base-2 entropy of squared coefficients, in ebits.
inline double entropy_base2(std::span<const double> coefficients,
                            const Tolerances& tol = kDefaultTolerances) {
  double total = 0.0;
  for (double c : coefficients) total += c * c;
  if (std::abs(total - 1.0) > tol.reconstruction) {
    throw NotNormalized("entropy_base2: sum of squared coefficients is " + std::to_string(total));
  }
  double h = 0.0;
  for (double c : coefficients) {
    const double p = c * c;
    if (p >= tol.entropy_floor) h -= p * std::log2(p);
  }
  return h;
}

inline double entropy_base2(std::initializer_list<double> coefficients,
                            const Tolerances& tol = kDefaultTolerances) {
  const std::vector<double> c(coefficients);
  return entropy_base2(std::span<const double>(c), tol);
}

inline double entanglement_entropy(const StateVector& state, std::span<const std::string> left,
                                   const Tolerances& tol = kDefaultTolerances) {
  const auto s = schmidt(state.normalized(), left, tol);
  return entropy_base2(std::span<const double>(s.coefficients), tol);
}

// |<a|b>|^2 for normalized vectors; global phase is ignored.
inline double fidelity(const ComplexVector& a, const ComplexVector& b) {
  return std::norm(a.dot(b));
}

}  // namespace rpovm
