#pragma once

// JSON file format for measurements:
//   { "n_qubits": 1, "kind": "povm" | "kraus",
//     "operators": [ [ [ [re, im], ... ], ... ], ... ],
//     "state": [ [re, im], ... ] }            <- optional input state
// Values are parsed as IEEE-754 doubles.

#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "rpovm/errors.hpp"
#include "rpovm/povm.hpp"

namespace rpovm {

enum class OperatorKind { Povm, Kraus };

struct MeasurementFile {
  int n_qubits = 0;
  OperatorKind kind = OperatorKind::Povm;
  std::vector<ComplexMatrix> operators;
  std::optional<ComplexVector> state;

  Povm povm(const Tolerances& tol = kDefaultTolerances) const {
    if (kind == OperatorKind::Povm) return Povm(n_qubits, operators, tol);
    return Povm::from_kraus(kraus(tol), tol);
  }

  KrausSet kraus(const Tolerances& tol = kDefaultTolerances) const {
    if (kind == OperatorKind::Kraus) return KrausSet(n_qubits, operators, tol);
    return hermitian_roots(Povm(n_qubits, operators, tol), tol);
  }
};

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') ++line, col = 1;
    else ++col;
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline Complex parse_complex(const nlohmann::json& j, const std::string& where) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
    throw ParseError(where + ": expected [re, im]");
  }
  return {j[0].get<double>(), j[1].get<double>()};
}

inline ComplexMatrix parse_matrix(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw ParseError(where + ": expected a non-empty array of rows");
  const std::size_t cols = j[0].is_array() ? j[0].size() : 0;
  ComplexMatrix m(static_cast<Index>(j.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < j.size(); ++r) {
    const auto row_where = where + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) throw ParseError(row_where + ": ragged or missing row");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(r), static_cast<Index>(c)) =
          parse_complex(j[r][c], row_where + "[" + std::to_string(c) + "]");
  }
  return m;
}

inline nlohmann::ordered_json complex_json(Complex z) { return nlohmann::ordered_json::array({z.real(), z.imag()}); }

}  // namespace detail

inline MeasurementFile parse_measurement(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("malformed JSON at " + detail::line_col(text, e.byte > 0 ? e.byte - 1 : 0) + ": " +
                     e.what());
  }
  if (!j.is_object()) throw ParseError("top level must be an object");
  MeasurementFile f;
  if (!j.contains("n_qubits") || !j["n_qubits"].is_number_integer()) {
    throw ParseError("\"n_qubits\" must be an integer");
  }
  f.n_qubits = j["n_qubits"].get<int>();
  const std::string kind = j.value("kind", std::string("povm"));
  if (kind == "povm") f.kind = OperatorKind::Povm;
  else if (kind == "kraus") f.kind = OperatorKind::Kraus;
  else throw ParseError("\"kind\" must be \"povm\" or \"kraus\", got \"" + kind + "\"");

  if (!j.contains("operators") || !j["operators"].is_array()) throw ParseError("\"operators\" must be an array");
  const auto& ops = j["operators"];
  for (std::size_t i = 0; i < ops.size(); ++i)
    f.operators.push_back(detail::parse_matrix(ops[i], "operators[" + std::to_string(i) + "]"));

  if (j.contains("state")) {
    const auto& s = j["state"];
    if (!s.is_array()) throw ParseError("\"state\" must be an array of [re, im]");
    ComplexVector v(static_cast<Index>(s.size()));
    for (std::size_t i = 0; i < s.size(); ++i)
      v(static_cast<Index>(i)) = detail::parse_complex(s[i], "state[" + std::to_string(i) + "]");
    f.state = std::move(v);
  }
  return f;
}

inline MeasurementFile load_measurement(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_measurement(ss.str());
}

inline nlohmann::ordered_json matrix_json(const ComplexMatrix& m) {
  auto rows = nlohmann::ordered_json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    auto row = nlohmann::ordered_json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(detail::complex_json(m(r, c)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline nlohmann::ordered_json measurement_json(const MeasurementFile& f) {
  nlohmann::ordered_json j;
  j["n_qubits"] = f.n_qubits;
  j["kind"] = f.kind == OperatorKind::Povm ? "povm" : "kraus";
  auto ops = nlohmann::ordered_json::array();
  for (const auto& m : f.operators) ops.push_back(matrix_json(m));
  j["operators"] = std::move(ops);
  if (f.state) {
    auto s = nlohmann::ordered_json::array();
    for (Index i = 0; i < f.state->size(); ++i) s.push_back(detail::complex_json((*f.state)(i)));
    j["state"] = std::move(s);
  }
  return j;
}

inline MeasurementFile to_file(const Povm& p) { return {p.n_qubits(), OperatorKind::Povm, p.elements(), {}}; }
inline MeasurementFile to_file(const KrausSet& k) { return {k.n_qubits(), OperatorKind::Kraus, k.operators(), {}}; }

// FNV-1a over the shortest round-trip text of every entry; stable across runs.
inline std::string digest(const std::vector<ComplexMatrix>& ops) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&](const std::string& s) {
    for (unsigned char ch : s) {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& m : ops) mix(matrix_json(m).dump());
  std::ostringstream out;
  out << std::hex;
  out.width(16);
  out.fill('0');
  out << h;
  return out.str();
}

}  // namespace rpovm
