#pragma once

// Remote POVMs: compile an OE decomposition into an LOCC program, run it on
// a Session, the scripted unambiguous-discrimination scenario, and the
// entanglement-capability experiments.

#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "rpovm/linalg.hpp"
#include "rpovm/locc.hpp"
#include "rpovm/povm.hpp"
#include "rpovm/random.hpp"

namespace rpovm {

inline constexpr int kMaxRemoteQubits = 2;

// Subsystem ids used by the remote program.
inline const std::string kAncilla = "A";
inline std::string resource_qubit(int i) { return "b" + std::to_string(i); }
inline std::string system_qubit(int i) { return "B" + std::to_string(i); }

struct RemotePovmProgram {
  int n_qubits = 0;
  StateVector resource;         // sum_j alpha_{r_j} |j>_A |r_j>_b over A (dim K') and b (2n qubits)
  ComplexMatrix bob_coupling;   // sum_mu |mu><mu|_b (x) tau_mu on (b, B)
  ComplexMatrix alice_unitary;  // ancilla action, U^T of the decomposition
  std::vector<Index> retained;  // A basis state j <-> Pauli index retained[j]
  std::size_t outcome_count = 0;

  std::vector<std::string> ancilla() const { return {kAncilla}; }
  std::vector<std::string> resource_register() const {
    std::vector<std::string> ids;
    for (int i = 0; i < 2 * n_qubits; ++i) ids.push_back(resource_qubit(i));
    return ids;
  }
  std::vector<std::string> system_register() const {
    std::vector<std::string> ids;
    for (int i = 0; i < n_qubits; ++i) ids.push_back(system_qubit(i));
    return ids;
  }
  Index ancilla_dim() const { return alice_unitary.rows(); }
};

// Parity of the bitwise AND of two 2n-bit words.
inline int dot_parity(std::uint64_t a, std::uint64_t b) {
  return static_cast<int>(std::popcount(a & b) & 1);
}

inline RemotePovmProgram compile_remote_povm(const OEDecomposition& d,
                                             const Tolerances& tol = kDefaultTolerances) {
  const int n = d.n_qubits;
  if (n < 1 || n > kMaxRemoteQubits) {
    throw std::out_of_range("compile_remote_povm supports 1.." + std::to_string(kMaxRemoteQubits) + " qubits");
  }
  const Index kprime = d.register_dim();
  if (static_cast<Index>(d.retained.size()) > kprime) {
    throw DimensionMismatch("more retained Pauli weights than ancilla states");
  }
  const Index b_dim = pauli_count(n);

  RemotePovmProgram prog;
  prog.n_qubits = n;
  prog.retained = d.retained;
  prog.outcome_count = d.outcome_count();

  Layout layout{{kAncilla, kprime}};
  const Layout b = qubit_register("b", 2 * n);
  layout.insert(layout.end(), b.begin(), b.end());
  ComplexVector amps = ComplexVector::Zero(kprime * b_dim);
  for (std::size_t j = 0; j < d.retained.size(); ++j) {
    const Index mu = d.retained[j];
    amps(static_cast<Index>(j) * b_dim + mu) = d.alphas[static_cast<std::size_t>(mu)];
  }
  prog.resource = StateVector(std::move(amps), std::move(layout));
  if (!prog.resource.is_normalized(tol.completeness)) throw NotNormalized("resource weights are not normalized");

  const Index sys = qubit_dim(n);
  prog.bob_coupling = ComplexMatrix::Zero(b_dim * sys, b_dim * sys);
  for (Index mu = 0; mu < b_dim; ++mu) prog.bob_coupling.block(mu * sys, mu * sys, sys, sys) = d.frame_operator(mu);
  if (!is_unitary(prog.bob_coupling, tol.unitary)) throw NotUnitary("Bob's coupling is not unitary");

  prog.alice_unitary = d.unitary.transpose();
  return prog;
}

struct RemoteBranch {
  double probability = 0.0;
  int outcome = 0;
  Bits eta;
  StateVector bob_state;
};

struct RemoteRunResult {
  std::vector<double> outcome_distribution;  // over mu < K
  std::vector<StateVector> post_states;      // Bob's state per outcome (empty layout if unreached)
  std::vector<RemoteBranch> branches;
  std::map<std::string, double> eta_distribution;  // Bob's complementary outcomes
  double surplus_probability = 0.0;          // mass on ancilla outcomes >= K
  double entanglement_consumed = 0.0;        // ebits in the resource (A | b)
  Transcript transcript;
  FramePolicy policy = FramePolicy::PauliFrame;
};

struct RemoteRunOptions {
  FramePolicy policy = FramePolicy::PauliFrame;
  bool report_outcome = false;  // Alice sends ceil(log2 K) bits back to Bob
};

inline int bits_for(std::size_t outcomes) {
  int w = 0;
  while ((std::size_t{1} << w) < outcomes) ++w;
  return w;
}

// Runs a compiled program on Bob's input state.
inline Session execute_remote_program(const RemotePovmProgram& prog, const StateVector& psi, Mode mode,
                                      bool report_outcome, const Tolerances& tol = kDefaultTolerances) {
  const int n = prog.n_qubits;
  if (psi.dim() != qubit_dim(n)) throw DimensionMismatch("input state does not match the POVM dimension");
  const StateVector input(psi.amplitudes(), qubit_register("B", n));

  std::vector<Party> resource_owners{Party::Alice};
  resource_owners.resize(1 + 2 * static_cast<std::size_t>(n), Party::Bob);
  Session s(
      {SubsystemGroup{prog.resource, resource_owners},
       SubsystemGroup{input, std::vector<Party>(static_cast<std::size_t>(n), Party::Bob)}},
      mode, tol);

  const auto a = prog.ancilla();
  const auto b = prog.resource_register();
  const auto sys = prog.system_register();
  std::vector<std::string> coupled = b;
  coupled.insert(coupled.end(), sys.begin(), sys.end());

  s.local_unitary(Party::Bob, coupled, prog.bob_coupling, "couple");
  for (std::size_t i = 0; i < b.size(); ++i) s.local_measure(Party::Bob, {b[i]}, hadamard(), "eta" + std::to_string(i));
  s.send_bits(Party::Bob, "eta", [&](const View& v) {
    Bits bits;
    for (std::size_t i = 0; i < b.size(); ++i) bits.push_back(v.outcome("eta" + std::to_string(i)) != 0);
    return bits;
  });

  const Index kprime = prog.ancilla_dim();
  s.local_unitary(
      Party::Alice, a,
      [&](const View& v) {
        const std::uint64_t eta = decode_bits(v.message("eta"));
        ComplexMatrix phase = ComplexMatrix::Identity(kprime, kprime);
        for (std::size_t j = 0; j < prog.retained.size(); ++j)
          if (dot_parity(eta, static_cast<std::uint64_t>(prog.retained[j])))
            phase(static_cast<Index>(j), static_cast<Index>(j)) = -1.0;
        return phase;
      },
      "sign_correction");
  s.local_unitary(Party::Alice, a, prog.alice_unitary, "ancilla_unitary");
  s.local_measure(Party::Alice, a, ComplexMatrix::Identity(kprime, kprime), "mu");
  if (report_outcome) {
    const int w = bits_for(prog.outcome_count);
    s.send_bits(Party::Alice, "outcome", [&](const View& v) {
      return encode_bits(static_cast<std::uint64_t>(v.outcome("mu")), w);
    });
  }
  return s;
}

inline RemoteRunResult run_remote_povm(const Povm& p, const StateVector& psi, Mode mode,
                                       const RemoteRunOptions& opts = {},
                                       const Tolerances& tol = kDefaultTolerances) {
  if (!psi.is_normalized(tol.state_norm)) throw NotNormalized("input state is not normalized");
  const auto d = oe_decompose(p, opts.policy, tol);
  const auto prog = compile_remote_povm(d, tol);
  Session s = execute_remote_program(prog, psi, mode, opts.report_outcome, tol);

  RemoteRunResult r;
  r.policy = opts.policy;
  r.outcome_distribution.assign(p.size(), 0.0);
  r.post_states.resize(p.size());
  const auto sys = prog.system_register();
  for (const auto& br : s.branches()) {
    const int mu = br.outcomes.at("mu").value;
    Bits eta = br.messages.at("eta").bits;
    r.eta_distribution[bits_string(eta)] += br.probability;
    if (static_cast<std::size_t>(mu) >= p.size()) {
      r.surplus_probability += br.probability;
      continue;
    }
    r.outcome_distribution[static_cast<std::size_t>(mu)] += br.probability;
    StateVector bob = factor_out(br.state, sys, tol);
    if (r.post_states[static_cast<std::size_t>(mu)].dim() == 0) r.post_states[static_cast<std::size_t>(mu)] = bob;
    r.branches.push_back({br.probability, mu, std::move(eta), std::move(bob)});
  }
  const auto sch = schmidt(prog.resource, {kAncilla}, tol);
  r.entanglement_consumed = entropy_base2(std::span<const double>(sch.coefficients), tol);
  r.transcript = s.transcript();
  return r;
}

// Histogram of outcomes over `shots` sampled runs with per-shot sub-seeds.
inline std::vector<std::uint64_t> sample_remote_povm(const Povm& p, const StateVector& psi, std::uint64_t shots,
                                                     std::uint64_t seed, FramePolicy policy = FramePolicy::PauliFrame,
                                                     const Tolerances& tol = kDefaultTolerances) {
  const auto prog = compile_remote_povm(oe_decompose(p, policy, tol), tol);
  std::vector<std::uint64_t> counts(static_cast<std::size_t>(prog.ancilla_dim()), 0);
  for (std::uint64_t i = 0; i < shots; ++i) {
    Session s = execute_remote_program(prog, psi, Mode::sampled(derive_seed(seed, i)), false, tol);
    ++counts[static_cast<std::size_t>(s.branches().front().outcomes.at("mu").value)];
  }
  counts.resize(p.size());
  return counts;
}

inline double total_variation(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionMismatch("distributions have different supports");
  double tv = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) tv += std::abs(a[i] - b[i]);
  return 0.5 * tv;
}

inline double compare_remote_vs_local(const Povm& p, const StateVector& psi, FramePolicy policy = FramePolicy::PauliFrame,
                                      const Tolerances& tol = kDefaultTolerances) {
  const auto remote = run_remote_povm(p, psi, Mode::exact(), {.policy = policy}, tol);
  return total_variation(remote.outcome_distribution, povm_distribution(p, psi, tol));
}

// ---------------------------------------------------------------------------
// Unambiguous discrimination of alpha|0> +- beta|1> with the ancilla at Alice.

enum class Sign { Plus, Minus };

struct Fig1Result {
  double outcome0_prob = 0.0;
  double bob_guess_correct_prob_given_outcome0 = 0.0;
  double E_consumed = 0.0;
  double cos2_phi = 0.0;
  std::map<int, double> alice_outcome;       // Alice's ancilla outcome
  std::map<int, double> bob_bit;             // Bob's sigma_x outcome on b (sent to Alice)
  std::map<int, double> bob_x_given_outcome0;
  Transcript transcript;
};

inline ComplexMatrix controlled_z() { return diag({1.0, 1.0, 1.0, -1.0}); }

// cos^2 phi = (1 + alpha/beta) / 2
inline double fig1_cos2_phi(double alpha, double beta) { return 0.5 * (1.0 + std::min(alpha / beta, 1.0)); }

// cos phi |00> + sin phi |11> on (A, b).
inline StateVector fig1_resource(double alpha, double beta) {
  const double cos2 = fig1_cos2_phi(alpha, beta);
  ComplexVector res(4);
  res << std::sqrt(cos2), 0, 0, std::sqrt(std::max(1.0 - cos2, 0.0));
  return StateVector(std::move(res), Layout{{"A", 2}, {"b", 2}});
}

inline Session fig1_session(double alpha, double beta, Sign sign, Mode mode,
                            const Tolerances& tol = kDefaultTolerances) {
  (void)fig1_povm(alpha, beta, tol);  // precondition checks
  const double cos2 = fig1_cos2_phi(alpha, beta);
  const double c = std::sqrt(cos2);
  const double sn = std::sqrt(std::max(1.0 - cos2, 0.0));

  ComplexVector sys(2);
  sys << alpha, (sign == Sign::Plus ? beta : -beta);
  Session s({SubsystemGroup{fig1_resource(alpha, beta), {Party::Alice, Party::Bob}},
             SubsystemGroup{StateVector(sys, "B"), {Party::Bob}}},
            mode, tol);

  // Bob: controlled sigma_z with b as control, then sigma_x measurement of b.
  s.local_unitary(Party::Bob, {"b", "B"}, controlled_z(), "controlled_z");
  s.local_measure(Party::Bob, {"b"}, hadamard(), "bob_b");
  s.send_bits(Party::Bob, "bob_b",
              [](const View& v) { return encode_bits(static_cast<std::uint64_t>(v.outcome("bob_b")), 1); });

  // Alice: pi (or zero) rotation about z, then |0> -> c|0> - s|1>, |1> -> s|0> + c|1>.
  s.local_unitary(
      Party::Alice, {"A"}, [](const View& v) { return v.message("bob_b")[0] ? pauli(3) : pauli(0); },
      "z_correction");
  ComplexMatrix rot(2, 2);
  rot << c, sn, -sn, c;
  s.local_unitary(Party::Alice, {"A"}, rot, "phi_rotation");
  s.local_measure(Party::Alice, {"A"}, pauli(0), "alice_a");
  s.send_bits(Party::Alice, "alice_a",
              [](const View& v) { return encode_bits(static_cast<std::uint64_t>(v.outcome("alice_a")), 1); });

  // Bob measures sigma_x only when told the discriminating branch occurred.
  s.local_measure(Party::Bob, {"B"}, hadamard(), "bob_x", [](const View& v) { return !v.message("alice_a")[0]; });
  return s;
}

inline Fig1Result fig1_protocol(double alpha, double beta, Sign sign, const Tolerances& tol = kDefaultTolerances) {
  const Session s = fig1_session(alpha, beta, sign, Mode::exact(), tol);
  Fig1Result r;
  r.cos2_phi = fig1_cos2_phi(alpha, beta);
  r.alice_outcome = s.branch_distribution("alice_a");
  r.bob_bit = s.branch_distribution("bob_b");
  r.outcome0_prob = 0.0;
  for (const auto& b : s.branches())
    if (b.outcomes.at("alice_a").value == 0) r.outcome0_prob += b.probability;
  if (r.outcome0_prob > 0.0) {
    r.bob_x_given_outcome0 = s.branch_distribution("bob_x");
    // Bob guesses "+" on sigma_x outcome 0 (|+>), "-" on outcome 1.
    const int correct = sign == Sign::Plus ? 0 : 1;
    r.bob_guess_correct_prob_given_outcome0 =
        r.bob_x_given_outcome0.contains(correct) ? r.bob_x_given_outcome0.at(correct) : 0.0;
  }
  const StateVector resource = fig1_resource(alpha, beta);
  r.E_consumed = entanglement_entropy(resource, std::vector<std::string>{"A"}, tol);
  r.transcript = s.transcript();
  return r;
}

// Alice-outcome histogram over sampled runs.
inline std::vector<std::uint64_t> fig1_sample(double alpha, double beta, Sign sign, std::uint64_t shots,
                                              std::uint64_t seed, const Tolerances& tol = kDefaultTolerances) {
  std::vector<std::uint64_t> counts(2, 0);
  for (std::uint64_t i = 0; i < shots; ++i) {
    const Session s = fig1_session(alpha, beta, sign, Mode::sampled(derive_seed(seed, i)), tol);
    ++counts[static_cast<std::size_t>(s.branches().front().outcomes.at("alice_a").value)];
  }
  return counts;
}

// ---------------------------------------------------------------------------
// Entanglement capability

// sum_j alpha_{r_j} |j>_A (x) tau_{r_j} |input> where tau acts on the first
// n qubits of `input` (Bob's system), identity on the rest.
inline StateVector orthogonal_form_action(const OEDecomposition& d, const StateVector& input) {
  const Index sys = qubit_dim(d.n_qubits);
  if (input.dim() % sys != 0) throw DimensionMismatch("input does not contain Bob's system");
  const Index extra = input.dim() / sys;
  const Index kprime = d.register_dim();
  ComplexVector out = ComplexVector::Zero(kprime * input.dim());
  for (std::size_t j = 0; j < d.retained.size(); ++j) {
    const Index mu = d.retained[j];
    const ComplexMatrix op = tensor(d.frame_operator(mu), ComplexMatrix::Identity(extra, extra));
    out.segment(static_cast<Index>(j) * input.dim(), input.dim()) =
        d.alphas[static_cast<std::size_t>(mu)] * (op * input.amplitudes());
  }
  Layout layout{{kAncilla, kprime}};
  layout.insert(layout.end(), input.layout().begin(), input.layout().end());
  return StateVector(std::move(out), std::move(layout));
}

// Bob's system maximally entangled with a local reference R; returns the
// entanglement (ebits) between Alice's ancilla and (B, R).
inline double capability_epr_experiment(const OEDecomposition& d, const Tolerances& tol = kDefaultTolerances) {
  const int n = d.n_qubits;
  if (n < 1 || n > kMaxRemoteQubits) throw std::out_of_range("capability_epr_experiment: n must be 1 or 2");
  const Index sys = qubit_dim(n);
  ComplexVector epr = ComplexVector::Zero(sys * sys);
  for (Index i = 0; i < sys; ++i) epr(i * sys + i) = 1.0 / std::sqrt(static_cast<double>(sys));
  Layout layout = qubit_register("B", n);
  const Layout ref = qubit_register("R", n);
  layout.insert(layout.end(), ref.begin(), ref.end());
  const StateVector joint = orthogonal_form_action(d, StateVector(std::move(epr), std::move(layout)));
  return entanglement_entropy(joint, std::vector<std::string>{kAncilla}, tol);
}

// Best A|B entanglement over Haar-random pure inputs (no reference system).
inline double capability_search(const OEDecomposition& d, std::uint64_t trials, std::uint64_t seed,
                                const Tolerances& tol = kDefaultTolerances) {
  if (trials < 1) throw std::invalid_argument("capability_search needs at least one trial");
  Rng rng(seed);
  double best = 0.0;
  for (std::uint64_t t = 0; t < trials; ++t) {
    const StateVector psi = random_qubit_state(d.n_qubits, rng);
    const StateVector joint = orthogonal_form_action(d, psi);
    best = std::max(best, entanglement_entropy(joint, std::vector<std::string>{kAncilla}, tol));
  }
  return best;
}

}  // namespace rpovm
