#include <string>

#include <gtest/gtest.h>

#include "rpovm/povm_io.hpp"

using namespace rpovm;

namespace {

std::string data(const char* name) { return std::string(RPOVM_DATA_DIR) + "/" + name; }

std::string parse_error(const std::string& text) {
  try {
    parse_measurement(text);
  } catch (const ParseError& e) {
    return e.what();
  }
  return "";
}

}  // namespace

TEST(PovmIo, LoadsEveryDataFile) {
  for (const char* name : {"fixture_a_povm.json", "fixture_b_z_measurement.json", "fixture_c_trivial.json",
                           "fixture_d_kraus.json", "zz_measurement.json"}) {
    const auto f = load_measurement(data(name));
    EXPECT_NO_THROW(f.povm()) << name;
    EXPECT_NO_THROW(f.kraus()) << name;
  }
}

TEST(PovmIo, KindsAndOptionalState) {
  const auto a = load_measurement(data("fixture_a_povm.json"));
  EXPECT_EQ(a.kind, OperatorKind::Povm);
  ASSERT_TRUE(a.state.has_value());
  EXPECT_NEAR(a.state->norm(), 1.0, 1e-15);
  const auto d = load_measurement(data("fixture_d_kraus.json"));
  EXPECT_EQ(d.kind, OperatorKind::Kraus);
  EXPECT_FALSE(d.state.has_value());
  // a Kraus file's POVM is M^dag M
  EXPECT_LT(max_abs(d.povm()[0] - d.operators[0].adjoint() * d.operators[0]), 1e-15);
}

TEST(PovmIo, RealEntriesAreAccepted) {
  const auto f = parse_measurement(R"({"n_qubits": 1, "operators": [[[1, 0], [0, 1]]]})");
  EXPECT_EQ(f.kind, OperatorKind::Povm);
  EXPECT_EQ(f.operators[0](1, 1), Complex(1.0, 0.0));
}

TEST(PovmIo, MalformedJsonReportsLine) {
  const std::string msg = parse_error("{\n  \"n_qubits\": 1,\n  \"operators\": [ oops ]\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(PovmIo, SchemaErrors) {
  EXPECT_NE(parse_error("[]").find("object"), std::string::npos);
  EXPECT_NE(parse_error(R"({"operators": []})").find("n_qubits"), std::string::npos);
  EXPECT_NE(parse_error(R"({"n_qubits": 1, "kind": "channel", "operators": []})").find("kind"), std::string::npos);
  EXPECT_NE(parse_error(R"({"n_qubits": 1, "operators": [[[1, 0], [0]]]})").find("operators[0][1]"),
            std::string::npos);
  EXPECT_NE(parse_error(R"({"n_qubits": 1, "operators": [[[[1, 2, 3], 0], [0, 1]]]})").find("[re, im]"),
            std::string::npos);
  EXPECT_THROW(load_measurement(data("missing.json")), ParseError);
}

TEST(PovmIo, InvalidMeasurementsSurfaceOnConstruction) {
  const auto f = parse_measurement(R"({"n_qubits": 1, "operators": [[[1, 0], [0, 0.5]]]})");
  EXPECT_THROW(f.povm(), InvalidMeasurement);
}

TEST(PovmIo, RoundTripAndDigest) {
  const auto a = load_measurement(data("fixture_a_povm.json"));
  const auto back = parse_measurement(measurement_json(a).dump());
  ASSERT_EQ(back.operators.size(), a.operators.size());
  for (std::size_t i = 0; i < a.operators.size(); ++i) EXPECT_EQ(back.operators[i], a.operators[i]);
  EXPECT_EQ(*back.state, *a.state);
  EXPECT_EQ(digest(a.operators), digest(back.operators));
  EXPECT_EQ(digest(a.operators).size(), 16u);
  EXPECT_NE(digest(a.operators), digest(load_measurement(data("fixture_b_z_measurement.json")).operators));
}
