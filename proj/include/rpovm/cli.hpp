#pragma once

// Command-line front end. `run_cli` is the whole program minus process
// plumbing so that tests can drive it in-process.
//
// Exit codes: 0 success, 1 usage, 2 invalid input, 3 invariant failure.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "rpovm/rpovm.hpp"

namespace rpovm::cli {

enum ExitCode : int { kOk = 0, kUsage = 1, kInvalidInput = 2, kInvariantFailure = 3 };

using Json = nlohmann::ordered_json;

struct CommandConfig {
  std::string command;
  std::string input;
  std::string output;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> shots;
  std::string mode = "exact";
  std::optional<double> alpha;
  std::optional<double> beta;
  int n = 1;
  std::optional<std::uint64_t> count;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

inline std::string fmt(double v, int precision = 6) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(precision) << v;
  return s.str();
}

inline std::string sci(double v) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(2) << v;
  return s.str();
}

inline Json labels_json(const std::vector<Index>& idx, int n) {
  Json a = Json::array();
  for (Index i : idx) a.push_back(pauli_label(i, n));
  return a;
}

inline std::vector<double> squares(const std::vector<double>& v) {
  std::vector<double> out;
  for (double x : v) out.push_back(x * x);
  return out;
}

// Pauli frame first; single-qubit POVMs fall back to an aligned frame.
inline std::optional<OEDecomposition> decompose_any(const Povm& p, std::string& note) {
  try {
    return oe_decompose(p, FramePolicy::PauliFrame);
  } catch (const NotOrthogonalEquivalent& e) {
    note = e.what();
    if (p.n_qubits() != 1) return std::nullopt;
    return oe_decompose(p, FramePolicy::AlignQubitFrame);
  }
}

inline Json decomposition_json(const OEDecomposition& d) {
  Json j;
  j["frame"] = to_string(d.policy);
  j["alphas_squared"] = squares(d.alphas);
  j["retained"] = labels_json(d.retained, d.n_qubits);
  j["E_POVM"] = entanglement_cost(d);
  j["max_offdiagonal"] = d.offdiagonal;
  j["unitarity_residual"] = unitarity_residual(d.unitary);
  j["reconstruction_error"] = d.reconstruction_error;
  return j;
}

inline void print_decomposition(std::ostream& out, const OEDecomposition& d) {
  out << "  frame                 " << to_string(d.policy) << '\n';
  out << "  alpha^2              ";
  for (std::size_t i = 0; i < d.alphas.size(); ++i)
    out << ' ' << pauli_label(static_cast<Index>(i), d.n_qubits) << '=' << fmt(d.alphas[i] * d.alphas[i]);
  out << '\n';
  out << "  retained             ";
  for (Index r : d.retained) out << ' ' << pauli_label(r, d.n_qubits);
  out << '\n';
  out << "  E_POVM (ebits)        " << fmt(entanglement_cost(d)) << '\n';
  out << "  U unitarity residual  " << sci(unitarity_residual(d.unitary)) << '\n';
  out << "  reconstruction error  " << sci(d.reconstruction_error) << '\n';
}

inline MeasurementFile load_input(const CommandConfig& cfg) {
  if (cfg.input.empty()) throw UsageError("--input is required");
  return load_measurement(cfg.input);
}

inline StateVector input_state(const MeasurementFile& f, Rng& rng) {
  if (f.state) {
    StateVector s(*f.state, qubit_register("B", f.n_qubits));
    if (!s.is_normalized()) throw NotNormalized("input state is not normalized");
    return s;
  }
  return random_qubit_state(f.n_qubits, rng);
}

}  // namespace detail

// ---------------------------------------------------------------------------

inline int cmd_analyze(const CommandConfig& cfg, std::ostream& out, Json& report) {
  const MeasurementFile f = detail::load_input(cfg);
  const Povm p = f.povm();
  const KrausSet roots = hermitian_roots(p);

  report["command"] = "analyze";
  report["povm_digest"] = digest(p.elements());
  report["n_qubits"] = p.n_qubits();
  report["kind"] = f.kind == OperatorKind::Povm ? "povm" : "kraus";
  report["outcomes"] = p.size();

  out << "analyze " << cfg.input << "  (n=" << p.n_qubits() << ", K=" << p.size() << ", digest "
      << digest(p.elements()) << ")\n";

  if (f.kind == OperatorKind::Kraus) {
    const KrausSet ks = f.kraus();
    const double off = oe_offdiagonal(ks);
    const bool oe = is_oe(ks);
    report["kraus_oe"] = oe;
    report["kraus_max_offdiagonal"] = off;
    out << "  given Kraus set       " << (oe ? "OE" : "not OE") << "  (max |c^dag c| off-diagonal "
        << detail::sci(off) << ")\n";
  }

  const double root_off = oe_offdiagonal(roots);
  const bool roots_oe = is_oe(roots);
  report["roots_oe"] = roots_oe;
  report["roots_max_offdiagonal"] = root_off;
  out << "  hermitian roots       " << (roots_oe ? "OE" : "not OE") << " in the Pauli frame  (max off-diagonal "
      << detail::sci(root_off) << ")\n";

  std::string note;
  const auto d = detail::decompose_any(p, note);
  if (d) {
    report["decomposition"] = detail::decomposition_json(*d);
    report["E_POVM"] = entanglement_cost(*d);
    detail::print_decomposition(out, *d);
  } else {
    report["decomposition"] = nullptr;
    report["E_POVM"] = nullptr;
    out << "  no remote decomposition available: " << note << '\n';
  }
  return kOk;
}

inline int cmd_remote_run(const CommandConfig& cfg, std::ostream& out, Json& report) {
  const MeasurementFile f = detail::load_input(cfg);
  const Povm p = f.povm();
  const bool sampled = cfg.mode == "sampled";
  const std::uint64_t seed = cfg.seed.value_or(0);
  const std::uint64_t cases = f.state ? 1 : cfg.count.value_or(1);

  std::string note;
  const auto d = detail::decompose_any(p, note);
  report["command"] = "remote-run";
  report["povm_digest"] = digest(p.elements());
  report["mode"] = cfg.mode;
  if (!d) {
    report["error"] = note;
    out << "remote-run: no remote decomposition available: " << note << '\n';
    return kInvariantFailure;
  }
  report["decomposition"] = detail::decomposition_json(*d);
  report["E_POVM"] = entanglement_cost(*d);

  out << "remote-run " << cfg.input << "  frame=" << to_string(d->policy)
      << "  E_POVM=" << detail::fmt(entanglement_cost(*d)) << " ebits\n";
  out << "  case  TV(remote, local)  min fidelity  bits B->A  bits A->B\n";

  bool ok = true;
  Json runs = Json::array();
  Rng rng(seed);
  for (std::uint64_t i = 0; i < cases; ++i) {
    const StateVector psi = detail::input_state(f, rng);
    const auto local = povm_distribution(p, psi);
    const auto r = run_remote_povm(p, psi, Mode::exact(), {.policy = d->policy, .report_outcome = true});
    const double tv = total_variation(r.outcome_distribution, local);
    double min_fid = 1.0;
    const auto& roots = d->source_roots;
    for (const auto& br : r.branches) {
      if (br.probability <= 1e-12) continue;
      const ComplexVector target = (roots[static_cast<std::size_t>(br.outcome)] * psi.amplitudes()).normalized();
      min_fid = std::min(min_fid, fidelity(target, br.bob_state.amplitudes()));
    }
    ok = ok && tv < 1e-9 && min_fid >= 1.0 - 1e-9;

    Json run;
    run["case"] = i;
    run["local_distribution"] = local;
    run["remote_distribution"] = r.outcome_distribution;
    run["tv_distance"] = tv;
    run["min_post_state_fidelity"] = min_fid;
    run["entanglement_consumed"] = r.entanglement_consumed;
    run["bits_bob_to_alice"] = r.transcript.bits_bob_to_alice;
    run["bits_alice_to_bob"] = r.transcript.bits_alice_to_bob;
    if (sampled) {
      if (!cfg.shots) throw UsageError("--shots is required in sampled mode");
      const std::uint64_t shots = *cfg.shots;
      const auto counts = sample_remote_povm(p, psi, shots, derive_seed(seed, i), d->policy);
      run["shots"] = shots;
      run["counts"] = counts;
      double worst_z = 0.0;
      for (std::size_t k = 0; k < counts.size(); ++k) {
        const double q = local[k];
        const double se = std::sqrt(std::max(q * (1.0 - q), 1e-300) / static_cast<double>(shots));
        const double freq = static_cast<double>(counts[k]) / static_cast<double>(shots);
        if (q > 0.0 && q < 1.0) worst_z = std::max(worst_z, std::abs(freq - q) / se);
        else if (std::abs(freq - q) > 0.0) worst_z = std::numeric_limits<double>::infinity();
      }
      run["max_standard_errors"] = worst_z;
      ok = ok && worst_z <= 4.0;
    }
    out << "  " << std::setw(4) << i << "  " << std::setw(17) << detail::sci(tv) << "  " << std::setw(12)
        << detail::fmt(min_fid, 12) << "  " << std::setw(9) << r.transcript.bits_bob_to_alice << "  "
        << std::setw(9) << r.transcript.bits_alice_to_bob << '\n';
    runs.push_back(std::move(run));
  }
  report["runs"] = std::move(runs);
  report["ok"] = ok;
  return ok ? kOk : kInvariantFailure;
}

inline int cmd_fig1(const CommandConfig& cfg, std::ostream& out, Json& report) {
  if (!cfg.alpha || !cfg.beta) throw UsageError("fig1 needs both --alpha and --beta");
  double a = *cfg.alpha, b = *cfg.beta;
  if (!(a > 0.0) || !(b > 0.0)) throw UsageError("--alpha and --beta must be positive");
  const double norm = std::hypot(a, b);
  if (std::abs(norm * norm - 1.0) > 1e-10) {
    out << "note: (alpha, beta) renormalized by " << detail::fmt(norm, 8) << '\n';
  }
  a /= norm;
  b /= norm;
  if (a > b + 1e-10) throw UsageError("fig1 requires alpha <= beta; swap the basis roles of |0> and |1>");
  b = std::max(a, b);

  report["command"] = "fig1";
  report["alpha"] = a;
  report["beta"] = b;
  out << "fig1  alpha=" << detail::fmt(a) << "  beta=" << detail::fmt(b)
      << "  |<psi+|psi->|=" << detail::fmt(b * b - a * a) << '\n';

  Json signs = Json::object();
  for (Sign sign : {Sign::Plus, Sign::Minus}) {
    const auto r = fig1_protocol(a, b, sign);
    const std::string name = sign == Sign::Plus ? "+" : "-";
    Json j;
    j["outcome0_prob"] = r.outcome0_prob;
    j["bob_guess_correct_prob_given_outcome0"] = r.bob_guess_correct_prob_given_outcome0;
    j["E_consumed"] = r.E_consumed;
    j["bits_bob_to_alice"] = r.transcript.bits_bob_to_alice;
    j["bits_alice_to_bob"] = r.transcript.bits_alice_to_bob;
    out << "  psi" << name << ": P(outcome 0)=" << detail::fmt(r.outcome0_prob)
        << "  P(correct | 0)=" << detail::fmt(r.bob_guess_correct_prob_given_outcome0)
        << "  E=" << detail::fmt(r.E_consumed) << " ebits  bits B->A=" << r.transcript.bits_bob_to_alice
        << " A->B=" << r.transcript.bits_alice_to_bob << '\n';
    if (cfg.shots) {
      const std::uint64_t shots = *cfg.shots;
      const auto counts = fig1_sample(a, b, sign, shots, derive_seed(cfg.seed.value_or(0), sign == Sign::Plus ? 0 : 1));
      const double freq = static_cast<double>(counts[0]) / static_cast<double>(shots);
      const double q = r.outcome0_prob;
      const double se = std::sqrt(q * (1.0 - q) / static_cast<double>(shots));
      const double z = se > 0.0 ? std::abs(freq - q) / se : (freq == q ? 0.0 : std::numeric_limits<double>::infinity());
      j["shots"] = shots;
      j["sampled_outcome0"] = freq;
      j["standard_errors"] = z;
      out << "        sampled P(outcome 0)=" << detail::fmt(freq) << " over " << shots << " shots ("
          << detail::fmt(z, 2) << " s.e.)\n";
    }
    signs[name] = std::move(j);
  }
  report["signs"] = std::move(signs);
  return kOk;
}

inline int cmd_capability(const CommandConfig& cfg, std::ostream& out, Json& report) {
  const MeasurementFile f = detail::load_input(cfg);
  const Povm p = f.povm();
  const std::uint64_t trials = cfg.count.value_or(1000);
  const std::uint64_t seed = cfg.seed.value_or(0);
  if (trials < 1) throw UsageError("--count must be at least 1");
  std::string note;
  const auto d = detail::decompose_any(p, note);
  report["command"] = "capability";
  report["povm_digest"] = digest(p.elements());
  if (!d) {
    report["error"] = note;
    out << "capability: no remote decomposition available: " << note << '\n';
    return kInvariantFailure;
  }
  const double cost = entanglement_cost(*d);
  const double epr = capability_epr_experiment(*d);
  const double search = capability_search(*d, trials, seed);
  const bool ok = std::abs(epr - cost) <= 1e-9 && search <= epr + 1e-9;
  report["frame"] = to_string(d->policy);
  report["E_POVM"] = cost;
  report["capability_epr"] = epr;
  report["capability_search"] = search;
  report["trials"] = trials;
  report["ok"] = ok;
  out << "capability " << cfg.input << "  frame=" << to_string(d->policy) << '\n'
      << "  E_POVM                " << detail::fmt(cost, 9) << '\n'
      << "  EPR-reference         " << detail::fmt(epr, 9) << '\n'
      << "  best of " << trials << " inputs  " << detail::fmt(search, 9) << '\n';
  return ok ? kOk : kInvariantFailure;
}

struct SuiteCase {
  std::uint64_t index = 0;
  std::size_t outcomes = 0;
  double roots_offdiagonal = 0.0;
  bool roots_oe = false;
  std::string frame = "none";
  double reconstruction = 0.0;
  double E = 0.0;
  double tv = 0.0;
  double min_fidelity = 1.0;
  double eta_residual = 0.0;
  double capability_gap = 0.0;  // |EPR experiment - E_POVM|
  double search_excess = 0.0;   // max(search - EPR, 0)
  bool remote_ok = false;
};

inline SuiteCase run_suite_case(int n, std::uint64_t seed, std::uint64_t index) {
  Rng rng(derive_seed(seed, index));
  const Povm p = random_povm(n, rng);
  const StateVector psi = random_qubit_state(n, rng);
  SuiteCase c;
  c.index = index;
  c.outcomes = p.size();
  const KrausSet roots = hermitian_roots(p);
  c.roots_offdiagonal = oe_offdiagonal(roots);
  c.roots_oe = c.roots_offdiagonal < 1e-7;

  std::string note;
  const auto d = detail::decompose_any(p, note);
  if (!d) return c;
  c.frame = to_string(d->policy);
  c.reconstruction = d->reconstruction_error;
  c.E = entanglement_cost(*d);
  const auto r = run_remote_povm(p, psi, Mode::exact(), {.policy = d->policy});
  c.tv = total_variation(r.outcome_distribution, povm_distribution(p, psi));
  for (const auto& br : r.branches) {
    if (br.probability <= 1e-12) continue;
    const ComplexVector target = (roots[static_cast<std::size_t>(br.outcome)] * psi.amplitudes()).normalized();
    c.min_fidelity = std::min(c.min_fidelity, fidelity(target, br.bob_state.amplitudes()));
  }
  const double uniform = 1.0 / static_cast<double>(pauli_count(n));
  for (const auto& [eta, prob] : r.eta_distribution) c.eta_residual = std::max(c.eta_residual, std::abs(prob - uniform));
  if (r.eta_distribution.size() != static_cast<std::size_t>(pauli_count(n))) c.eta_residual = 1.0;
  if (n == 1) {
    const double epr = capability_epr_experiment(*d);
    c.capability_gap = std::abs(epr - c.E);
    c.search_excess = std::max(capability_search(*d, 200, derive_seed(seed, index + 0x5eed)) - epr, 0.0);
  }
  c.remote_ok = c.tv < 1e-9 && c.min_fidelity >= 1.0 - 1e-9 && c.eta_residual <= 1e-10 &&
                c.reconstruction <= 1e-8 && c.capability_gap <= 1e-9 && c.search_excess <= 1e-9;
  return c;
}

inline int cmd_random_suite(const CommandConfig& cfg, std::ostream& out, Json& report) {
  if (cfg.n != 1 && cfg.n != 2) throw UsageError("--n must be 1 or 2");
  const std::uint64_t count = cfg.count.value_or(0);
  const std::uint64_t seed = cfg.seed.value_or(0);

  report["command"] = "random-suite";
  report["n_qubits"] = cfg.n;
  report["count"] = count;
  report["seed"] = seed;

  std::uint64_t oe = 0, remote = 0;
  double worst_off = 0.0, worst_tv = 0.0, worst_fid = 0.0, worst_rec = 0.0, worst_cap = 0.0;
  Json cases = Json::array();
  for (std::uint64_t i = 0; i < count; ++i) {
    const SuiteCase c = run_suite_case(cfg.n, seed, i);
    oe += c.roots_oe ? 1 : 0;
    remote += c.remote_ok ? 1 : 0;
    worst_off = std::max(worst_off, c.roots_offdiagonal);
    worst_tv = std::max(worst_tv, c.tv);
    worst_fid = std::max(worst_fid, 1.0 - c.min_fidelity);
    worst_rec = std::max(worst_rec, c.reconstruction);
    worst_cap = std::max({worst_cap, c.capability_gap, c.search_excess});
    Json j;
    j["case"] = c.index;
    j["outcomes"] = c.outcomes;
    j["roots_oe"] = c.roots_oe;
    j["roots_max_offdiagonal"] = c.roots_offdiagonal;
    j["frame"] = c.frame;
    j["E_POVM"] = c.E;
    j["tv_distance"] = c.tv;
    j["min_post_state_fidelity"] = c.min_fidelity;
    j["reconstruction_error"] = c.reconstruction;
    j["remote_ok"] = c.remote_ok;
    cases.push_back(std::move(j));
  }
  const bool ok = oe == count && remote == count;
  Json summary;
  summary["roots_oe"] = oe;
  summary["remote_ok"] = remote;
  summary["worst_roots_offdiagonal"] = worst_off;
  summary["worst_tv_distance"] = worst_tv;
  summary["worst_fidelity_loss"] = worst_fid;
  summary["worst_reconstruction_error"] = worst_rec;
  summary["worst_capability_residual"] = worst_cap;
  report["summary"] = summary;
  report["cases"] = std::move(cases);
  report["ok"] = ok;

  out << "random-suite n=" << cfg.n << " count=" << count << " seed=" << seed << '\n'
      << "  hermitian roots OE (Pauli frame, off-diagonal < 1e-7)  " << oe << "/" << count << '\n'
      << "  remote = local and post-state checks passed           " << remote << "/" << count << '\n'
      << "  worst roots off-diagonal    " << detail::sci(worst_off) << '\n'
      << "  worst TV distance           " << detail::sci(worst_tv) << '\n'
      << "  worst fidelity loss         " << detail::sci(worst_fid) << '\n'
      << "  worst reconstruction error  " << detail::sci(worst_rec) << '\n'
      << "  worst capability residual   " << detail::sci(worst_cap) << '\n';
  return ok ? kOk : kInvariantFailure;
}

// ---------------------------------------------------------------------------

inline int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Remote POVMs over LOCC with a non-maximal entangled resource"};
  app.require_subcommand(1);
  CommandConfig cfg;
  std::string seed_text;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--output", cfg.output, "Write the JSON report to this path");
  };
  auto add_seed = [&](CLI::App* sub) { sub->add_option("--seed", cfg.seed, "64-bit seed"); };

  auto* analyze = app.add_subcommand("analyze", "OE verdict, Schmidt weights and E_POVM of a POVM file");
  analyze->add_option("--input", cfg.input, "POVM/Kraus JSON file")->required();
  add_common(analyze);

  auto* remote = app.add_subcommand("remote-run", "Simulate the remote protocol and compare with the local POVM");
  remote->add_option("--input", cfg.input, "POVM/Kraus JSON file")->required();
  remote->add_option("--mode", cfg.mode, "exact or sampled")->check(CLI::IsMember({"exact", "sampled"}));
  remote->add_option("--shots", cfg.shots, "Shots in sampled mode");
  remote->add_option("--count", cfg.count, "Random input states when the file has no \"state\"");
  add_seed(remote);
  add_common(remote);

  auto* fig1 = app.add_subcommand("fig1", "Remote unambiguous discrimination of alpha|0> +- beta|1>");
  fig1->add_option("--alpha", cfg.alpha, "Amplitude of |0>")->required();
  fig1->add_option("--beta", cfg.beta, "Amplitude of |1>")->required();
  fig1->add_option("--shots", cfg.shots, "Also sample this many runs");
  fig1->add_option("--mode", cfg.mode, "exact or sampled")->check(CLI::IsMember({"exact", "sampled"}));
  add_seed(fig1);
  add_common(fig1);

  auto* cap = app.add_subcommand("capability", "EPR-reference and random-input entanglement capability");
  cap->add_option("--input", cfg.input, "POVM/Kraus JSON file")->required();
  cap->add_option("--count", cfg.count, "Random inputs to search (default 1000)");
  add_seed(cap);
  add_common(cap);

  auto* suite = app.add_subcommand("random-suite", "Property checks over seeded random POVMs");
  suite->add_option("--n", cfg.n, "Qubits (1 or 2)")->required();
  suite->add_option("--count", cfg.count, "Number of random POVMs")->required();
  add_seed(suite);
  add_common(suite);

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "usage error: " << e.what() << '\n' << app.help();
    return kUsage;
  }

  for (auto* sub : app.get_subcommands()) cfg.command = sub->get_name();
  if (cfg.mode == "sampled" && (!cfg.seed || !cfg.shots)) {
    err << "usage error: sampled mode needs --seed and --shots\n";
    return kUsage;
  }

  Json report;
  int code = kOk;
  try {
    if (cfg.command == "analyze") code = cmd_analyze(cfg, out, report);
    else if (cfg.command == "remote-run") code = cmd_remote_run(cfg, out, report);
    else if (cfg.command == "fig1") code = cmd_fig1(cfg, out, report);
    else if (cfg.command == "capability") code = cmd_capability(cfg, out, report);
    else code = cmd_random_suite(cfg, out, report);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::invalid_argument& e) {
    err << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const ParseError& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const InvalidMeasurement& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const NotNormalized& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const DimensionMismatch& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const NotPositive& e) {
    err << "invalid input: " << e.what() << '\n';
    return kInvalidInput;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kInvariantFailure;
  }

  report["exit_code"] = code;
  if (!cfg.output.empty()) {
    std::ofstream f(cfg.output);
    if (!f) {
      err << "cannot write '" << cfg.output << "'\n";
      return kInvalidInput;
    }
    f << report.dump(2) << '\n';
  }
  return code;
}

}  // namespace rpovm::cli
