#pragma once

// Two-party LOCC substrate. A Session owns the joint pure state of Alice's
// and Bob's subsystems and only lets each party act on what it owns.
// In exact mode every measurement outcome is kept as a separate weighted
// branch; classical messages and conditioned operations are resolved per
// branch. In sampled mode a single trajectory is followed.

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "rpovm/errors.hpp"
#include "rpovm/linalg.hpp"
#include "rpovm/random.hpp"
#include "rpovm/tolerances.hpp"

namespace rpovm {

enum class Party { Alice, Bob };

inline const char* to_string(Party p) { return p == Party::Alice ? "alice" : "bob"; }
inline Party other(Party p) { return p == Party::Alice ? Party::Bob : Party::Alice; }

using Bits = std::vector<bool>;

inline std::string bits_string(const Bits& b) {
  std::string s;
  for (bool v : b) s += v ? '1' : '0';
  return s;
}

// Big-endian encoding of `value` into `width` bits.
inline Bits encode_bits(std::uint64_t value, int width) {
  Bits b(static_cast<std::size_t>(width));
  for (int i = 0; i < width; ++i) b[static_cast<std::size_t>(i)] = (value >> (width - 1 - i)) & 1U;
  return b;
}

inline std::uint64_t decode_bits(const Bits& b) {
  std::uint64_t v = 0;
  for (bool x : b) v = (v << 1) | (x ? 1U : 0U);
  return v;
}

class Mode {
 public:
  static Mode exact() { return Mode(); }
  static Mode sampled(std::uint64_t seed) { return Mode(seed); }

  bool is_exact() const { return !seed_.has_value(); }
  std::uint64_t seed() const { return seed_.value_or(0); }

 private:
  Mode() = default;
  explicit Mode(std::uint64_t seed) : seed_(seed) {}
  std::optional<std::uint64_t> seed_;
};

struct Outcome {
  Party party;
  int value;
};

struct Message {
  Party from;
  Bits bits;
};

struct Branch {
  std::string id;
  double probability = 1.0;
  StateVector state;
  std::map<std::string, Outcome> outcomes;
  std::map<std::string, Message> messages;
};

// What one party knows on one branch: its own outcomes plus messages it has
// sent or received.
class View {
 public:
  View(const Branch& branch, Party party) : branch_(&branch), party_(party) {}

  Party party() const { return party_; }

  bool has_outcome(const std::string& label) const {
    auto it = branch_->outcomes.find(label);
    return it != branch_->outcomes.end() && it->second.party == party_;
  }

  int outcome(const std::string& label) const {
    auto it = branch_->outcomes.find(label);
    if (it == branch_->outcomes.end()) throw Error("no outcome '" + label + "' on this branch");
    if (it->second.party != party_) {
      throw LocalityViolation(std::string(to_string(party_)) + " cannot read " + to_string(it->second.party) +
                              "'s outcome '" + label + "' without a message");
    }
    return it->second.value;
  }

  bool has_message(const std::string& label) const { return branch_->messages.contains(label); }

  const Bits& message(const std::string& label) const {
    auto it = branch_->messages.find(label);
    if (it == branch_->messages.end()) {
      throw LocalityViolation(std::string(to_string(party_)) + " has not received message '" + label + "'");
    }
    return it->second.bits;
  }

 private:
  const Branch* branch_;
  Party party_;
};

enum class EventKind { Unitary, Measurement, Message };

inline const char* to_string(EventKind k) {
  switch (k) {
    case EventKind::Unitary: return "unitary";
    case EventKind::Measurement: return "measurement";
    case EventKind::Message: return "message";
  }
  return "?";
}

struct TranscriptEvent {
  Party party;
  EventKind kind;
  std::string label;
  std::string branch;  // "*" when the step acts on every branch
  nlohmann::ordered_json payload;
};

struct Transcript {
  std::vector<TranscriptEvent> events;
  std::uint64_t bits_alice_to_bob = 0;
  std::uint64_t bits_bob_to_alice = 0;

  // One JSON object per line with fixed field order.
  std::string to_jsonl() const {
    std::ostringstream out;
    for (const auto& e : events) {
      nlohmann::ordered_json j;
      j["party"] = to_string(e.party);
      j["kind"] = to_string(e.kind);
      j["label"] = e.label;
      j["branch"] = e.branch;
      j["payload"] = e.payload;
      out << j.dump() << '\n';
    }
    return out.str();
  }
};

// A group of subsystems with a joint initial state, e.g. a shared resource.
struct SubsystemGroup {
  StateVector state;
  std::vector<Party> owners;  // one per subsystem of `state`, in layout order
};

using Condition = std::function<bool(const View&)>;
using UnitaryChoice = std::function<ComplexMatrix(const View&)>;
using BitsChoice = std::function<Bits(const View&)>;

class Session {
 public:
  Session(std::vector<SubsystemGroup> groups, Mode mode, const Tolerances& tol = kDefaultTolerances)
      : mode_(mode), rng_(mode.seed()), tol_(tol) {
    if (groups.empty()) throw Error("a session needs at least one subsystem");
    std::optional<StateVector> joint;
    for (auto& g : groups) {
      if (g.owners.size() != g.state.layout().size()) {
        throw Error("every subsystem needs exactly one owner");
      }
      for (std::size_t i = 0; i < g.owners.size(); ++i) {
        const auto& s = g.state.layout()[i];
        if (s.dim < 1) throw DimensionMismatch("subsystem '" + s.id + "' has no states");
        if (owner_.contains(s.id)) throw Error("subsystem '" + s.id + "' declared twice");
        owner_[s.id] = g.owners[i];
      }
      if (!g.state.is_normalized(tol_.state_norm)) {
        throw NotNormalized("initial state of group starting at '" + g.state.layout().front().id +
                            "' is not normalized");
      }
      joint = joint ? tensor(*joint, g.state) : g.state;
    }
    branches_.push_back(Branch{"root", 1.0, std::move(*joint), {}, {}});
  }

  const Mode& mode() const { return mode_; }
  const std::vector<Branch>& branches() const { return branches_; }
  const Transcript& transcript() const { return transcript_; }
  const Layout& layout() const { return branches_.front().state.layout(); }

  Party owner(const std::string& id) const {
    auto it = owner_.find(id);
    if (it == owner_.end()) throw UnknownSubsystem("unknown subsystem '" + id + "'");
    return it->second;
  }

  double total_probability() const {
    double t = 0.0;
    for (const auto& b : branches_) t += b.probability;
    return t;
  }

  // Same unitary on every branch.
  void local_unitary(Party party, const std::vector<std::string>& targets, const ComplexMatrix& u,
                     const std::string& label = "") {
    check_owned(party, targets);
    check_unitary(u, label);
    for (auto& b : branches_) b.state = apply_on_subsystems(u, b.state, targets);
    log_all(party, EventKind::Unitary, label, targets, false);
  }

  // Unitary chosen per branch from what `party` knows there.
  void local_unitary(Party party, const std::vector<std::string>& targets, const UnitaryChoice& choose,
                     const std::string& label = "") {
    check_owned(party, targets);
    for (auto& b : branches_) {
      const ComplexMatrix u = choose(View(b, party));
      check_unitary(u, label);
      b.state = apply_on_subsystems(u, b.state, targets);
    }
    log_all(party, EventKind::Unitary, label, targets, true);
  }

  // Projective measurement onto the columns of `basis`; outcome k <-> column k.
  // Branches where `when` is false are left unmeasured.
  void local_measure(Party party, const std::vector<std::string>& targets, const ComplexMatrix& basis,
                     const std::string& label, const Condition& when = {}) {
    check_owned(party, targets);
    Index target_dim = 1;
    for (const auto& t : targets) target_dim *= layout()[branches_.front().state.position(t)].dim;
    if (basis.rows() != target_dim || basis.cols() != target_dim) {
      throw DimensionMismatch("measurement basis must be " + std::to_string(target_dim) + "x" +
                              std::to_string(target_dim));
    }
    if (unitarity_residual(basis) > tol_.unitary) throw NotUnitary("measurement basis is not orthonormal");

    std::vector<ComplexMatrix> projectors;
    for (Index k = 0; k < target_dim; ++k) projectors.push_back(basis.col(k) * basis.col(k).adjoint());

    std::vector<Branch> next;
    for (auto& b : branches_) {
      if (b.outcomes.contains(label)) throw Error("outcome label '" + label + "' already used on this branch");
      if (when && !when(View(b, party))) {
        next.push_back(std::move(b));
        continue;
      }
      std::vector<StateVector> projected;
      std::vector<double> probs;
      for (const auto& p : projectors) {
        projected.push_back(apply_on_subsystems(p, b.state, targets));
        probs.push_back(projected.back().amplitudes().squaredNorm());
      }
      auto make_child = [&](Index k, double weight) {
        Branch child{b.id + "/" + label + "=" + std::to_string(k), weight,
                     projected[static_cast<std::size_t>(k)].normalized(), b.outcomes, b.messages};
        child.outcomes[label] = Outcome{party, static_cast<int>(k)};
        nlohmann::ordered_json payload;
        payload["targets"] = targets;
        payload["outcome"] = k;
        transcript_.events.push_back({party, EventKind::Measurement, label, child.id, std::move(payload)});
        next.push_back(std::move(child));
      };
      if (mode_.is_exact()) {
        for (Index k = 0; k < target_dim; ++k) {
          const double p = probs[static_cast<std::size_t>(k)];
          if (p > tol_.entropy_floor) make_child(k, b.probability * p);
        }
      } else {
        double total = 0.0;
        for (double p : probs) total += p;
        const double r = rng_.uniform() * total;
        double acc = 0.0;
        Index pick = 0;
        for (Index k = 0; k < target_dim; ++k) {
          const double p = probs[static_cast<std::size_t>(k)];
          if (p <= 0.0) continue;
          pick = k;
          acc += p;
          if (r < acc) break;
        }
        make_child(pick, b.probability);
      }
    }
    branches_ = std::move(next);
  }

  void send_bits(Party from, const std::string& label, const Bits& bits) {
    send_bits(from, label, [&bits](const View&) { return bits; });
  }

  // Per-branch payload; the payload length must agree across branches.
  void send_bits(Party from, const std::string& label, const BitsChoice& payload) {
    std::optional<std::size_t> width;
    std::vector<Bits> chosen;
    for (const auto& b : branches_) {
      chosen.push_back(payload(View(b, from)));
      if (width && *width != chosen.back().size()) {
        throw Error("message '" + label + "' has branch-dependent length");
      }
      width = chosen.back().size();
    }
    if (!width || *width == 0) return;
    for (std::size_t i = 0; i < branches_.size(); ++i) {
      auto& b = branches_[i];
      if (b.messages.contains(label)) throw Error("message label '" + label + "' already used");
      b.messages[label] = Message{from, chosen[i]};
      nlohmann::ordered_json p;
      p["to"] = to_string(other(from));
      p["bits"] = bits_string(chosen[i]);
      transcript_.events.push_back({from, EventKind::Message, label, b.id, std::move(p)});
    }
    (from == Party::Alice ? transcript_.bits_alice_to_bob : transcript_.bits_bob_to_alice) += *width;
  }

  // Marginal distribution of an outcome label over the branches that carry it.
  std::map<int, double> branch_distribution(const std::string& label) const {
    std::map<int, double> dist;
    double total = 0.0;
    for (const auto& b : branches_) {
      auto it = b.outcomes.find(label);
      if (it == b.outcomes.end()) continue;
      dist[it->second.value] += b.probability;
      total += b.probability;
    }
    if (dist.empty()) throw Error("unknown outcome label '" + label + "'");
    for (auto& [k, p] : dist) p /= total;
    return dist;
  }

  // Largest |norm - 1| over branch states and |sum of probabilities - 1|.
  double invariant_residual() const {
    double worst = std::abs(total_probability() - 1.0);
    for (const auto& b : branches_) worst = std::max(worst, std::abs(b.state.norm() - 1.0));
    return worst;
  }

 private:
  void check_owned(Party party, const std::vector<std::string>& targets) const {
    if (targets.empty()) throw Error("operation needs at least one target");
    for (const auto& t : targets) {
      if (owner(t) != party) {
        throw LocalityViolation(std::string(to_string(party)) + " cannot act on '" + t + "' owned by " +
                                to_string(owner(t)));
      }
    }
  }

  void check_unitary(const ComplexMatrix& u, const std::string& label) const {
    if (unitarity_residual(u) > tol_.unitary) throw NotUnitary("operation '" + label + "' is not unitary");
  }

  void log_all(Party party, EventKind kind, const std::string& label, const std::vector<std::string>& targets,
               bool conditioned) {
    nlohmann::ordered_json p;
    p["targets"] = targets;
    p["conditioned"] = conditioned;
    transcript_.events.push_back({party, kind, label, "*", std::move(p)});
  }

  Mode mode_;
  Rng rng_;
  Tolerances tol_;
  std::map<std::string, Party> owner_;
  std::vector<Branch> branches_;
  Transcript transcript_;
};

inline Session new_session(std::vector<SubsystemGroup> groups, Mode mode,
                           const Tolerances& tol = kDefaultTolerances) {
  return Session(std::move(groups), mode, tol);
}

// Pure state of `keep` when it factors out of `state` (e.g. after every other
// subsystem has been measured).
inline StateVector factor_out(const StateVector& state, const std::vector<std::string>& keep,
                              const Tolerances& tol = kDefaultTolerances) {
  Layout layout;
  for (const auto& id : keep) layout.push_back(state.layout()[state.position(id)]);
  if (keep.size() == state.layout().size()) {
    return StateVector(bipartite_matrix(state, keep).col(0), std::move(layout));
  }
  const auto s = schmidt(state, std::span<const std::string>(keep), tol);
  if (s.coefficients.empty() || 1.0 - s.coefficients.front() * s.coefficients.front() > tol.reconstruction) {
    throw Error("subsystems do not factor out of the joint state");
  }
  return StateVector(s.left_basis.front(), std::move(layout));
}

}  // namespace rpovm
