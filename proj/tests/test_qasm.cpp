#include <gtest/gtest.h>

#include <regex>
#include <sstream>

#include "qfusion/qasm.hpp"
#include "support.hpp"

using namespace qfusion;

namespace {

// Minimal OpenQASM 2 interpreter for the subset the exporter writes.
class QasmInterpreter {
 public:
  explicit QasmInterpreter(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "OPENQASM 2.0;");
    std::getline(in, line);
    EXPECT_EQ(line, "include \"qelib1.inc\";");
    static const std::regex def(R"(gate (\w+) a,b \{ (.*) \})");
    static const std::regex reg(R"(qreg q\[(\d+)\];)");
    static const std::regex stmt(R"((\w+)(?:\(([^)]*)\))? (q\[\d+\](?:,q\[\d+\])*);)");
    while (std::getline(in, line)) {
      std::smatch m;
      if (std::regex_match(line, m, def)) {
        definitions_[m[1]] = m[2];
      } else if (std::regex_match(line, m, reg)) {
        n_ = std::stoi(m[1]);
        u_ = Eigen::MatrixXcd::Identity(Eigen::Index{1} << n_, Eigen::Index{1} << n_);
      } else if (std::regex_match(line, m, stmt)) {
        if (n_ == 0) {
          ADD_FAILURE() << "statement before qreg";
          return;
        }
        std::vector<int> wires;
        static const std::regex q(R"(q\[(\d+)\])");
        std::string args = m[3];
        for (auto it = std::sregex_iterator(args.begin(), args.end(), q); it != std::sregex_iterator(); ++it)
          wires.push_back(std::stoi((*it)[1]));
        double theta = m[2].matched ? std::stod(m[2]) : 0.0;
        apply(m[1], theta, wires);
        ++statements_;
      } else {
        ADD_FAILURE() << "unparsed line: " << line;
      }
    }
  }

  const Eigen::MatrixXcd& unitary() const { return u_; }
  int statements() const { return statements_; }

 private:
  void apply(const std::string& name, double theta, const std::vector<int>& wires) {
    auto def = definitions_.find(name);
    if (def != definitions_.end()) {
      ASSERT_EQ(wires.size(), 2u);
      static const std::regex call(R"((\w+) ([ab])(?:,([ab]))?;)");
      const std::string& body = def->second;
      for (auto it = std::sregex_iterator(body.begin(), body.end(), call); it != std::sregex_iterator(); ++it) {
        std::vector<int> sub{(*it)[2] == "a" ? wires[0] : wires[1]};
        if ((*it)[3].matched) sub.push_back((*it)[3] == "a" ? wires[0] : wires[1]);
        apply((*it)[1], 0.0, sub);
      }
      return;
    }
    static const std::map<std::string, std::string> qelib{
        {"x", "X"},   {"y", "Y"},     {"z", "Z"},   {"h", "H"},   {"s", "S"},     {"sdg", "SDG"},
        {"t", "T"},   {"tdg", "TDG"}, {"id", "ID"}, {"sx", "SX"}, {"sxdg", "SXDG"}, {"cx", "CX"},
        {"cy", "CY"}, {"cz", "CZ"},   {"swap", "SWAP"}, {"ch", "CH"}, {"csx", "CSX"}, {"rz", "RZ"}};
    auto it = qelib.find(name);
    ASSERT_NE(it, qelib.end()) << "gate not in qelib1: " << name;
    u_ = qtest::embed(qtest::textbook_gate(it->second, theta), wires, n_) * u_;
  }

  int n_ = 0;
  int statements_ = 0;
  Eigen::MatrixXcd u_;
  std::map<std::string, std::string> definitions_;
};

double phase_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  // min over global phase of max |a - e^{i phi} b|
  Eigen::Index r = 0, c = 0;
  b.cwiseAbs().maxCoeff(&r, &c);
  std::complex<double> phase = a(r, c) / b(r, c);
  phase /= std::abs(phase);
  return (a - phase * b).cwiseAbs().maxCoeff();
}

}  // namespace

TEST(Qasm, SingleX) {
  Circuit c{1, {{0, {0}, {}}}, GateSetId::Custom22};
  EXPECT_EQ(export_qasm(c), "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[1];\nx q[0];\n");
}

TEST(Qasm, EmptyCircuit) {
  Circuit c{2, {}, GateSetId::HeronNp};
  EXPECT_EQ(export_qasm(c), "OPENQASM 2.0;\ninclude \"qelib1.inc\";\nqreg q[2];\n");
}

TEST(Qasm, ReferenceExampleOrder) {
  const auto& gs = gate_set(GateSetId::Custom22);
  auto g = [&](const char* name, std::vector<int> w) { return GateInstance{*gs.index_of(name), w, {}}; };
  Circuit c{2,
            {g("X", {0}), g("TDG", {1}), g("H", {1}), g("CX", {0, 1}), g("SDG", {1}), g("ECR", {0, 1}),
             g("TDG", {0}), g("CX", {1, 0})},
            GateSetId::Custom22};
  std::string text = export_qasm(c);
  std::string body = text.substr(text.find("qreg"));
  EXPECT_EQ(body,
            "qreg q[2];\nx q[0];\ntdg q[1];\nh q[1];\ncx q[0],q[1];\nsdg q[1];\necr q[0],q[1];\ntdg q[0];\n"
            "cx q[1],q[0];\n");
  QasmInterpreter qi(text);
  EXPECT_EQ(qi.statements(), 8);
  EXPECT_LT(phase_distance(qi.unitary(), qtest::oracle_unitary(c)), 1e-10);
}

TEST(Qasm, DefinitionsMatchGateMatrices) {
  const auto& gs = gate_set(GateSetId::Custom22);
  for (std::size_t g = 0; g < gs.size(); ++g) {
    std::vector<int> wires = gs[g].arity == 1 ? std::vector<int>{1} : std::vector<int>{2, 0};
    Circuit c{3, {{g, wires, {}}}, GateSetId::Custom22};
    QasmInterpreter qi(export_qasm(c));
    EXPECT_LT(phase_distance(qi.unitary(), qtest::oracle_unitary(c)), 1e-10) << gs[g].name;
  }
}

TEST(Qasm, RandomCircuitsInterpretToSameUnitary) {
  Rng rng(404);
  for (auto id : qtest::all_gatesets()) {
    for (int trial = 0; trial < 40; ++trial) {
      Circuit c = qtest::random_circuit(id, 1 + static_cast<int>(uniform_index(rng, 3)), 10, rng);
      QasmInterpreter qi(export_qasm(c));
      EXPECT_EQ(qi.statements(), static_cast<int>(c.gates.size()));
      EXPECT_LT(phase_distance(qi.unitary(), qtest::oracle_unitary(c)), 1e-9) << serialize_circuit(c);
    }
  }
}

TEST(Qasm, DefinitionsEmittedOnceInFirstUseOrder) {
  const auto& gs = gate_set(GateSetId::Custom22);
  auto g = [&](const char* name) { return GateInstance{*gs.index_of(name), {0, 1}, {}}; };
  Circuit c{2, {g("ISWAP"), g("DCX"), g("ISWAP"), g("CS")}, GateSetId::Custom22};
  std::string text = export_qasm(c);
  auto iswap = text.find("gate iswap");
  auto dcx = text.find("gate dcx");
  auto cs = text.find("gate cs ");
  ASSERT_NE(iswap, std::string::npos);
  EXPECT_LT(iswap, dcx);
  EXPECT_LT(dcx, cs);
  EXPECT_EQ(text.find("gate iswap", iswap + 1), std::string::npos);
  EXPECT_EQ(text.find("gate ecr"), std::string::npos);
}

TEST(Qasm, UnsupportedWithoutDefinitions) {
  const auto& gs = gate_set(GateSetId::Custom22);
  Circuit c{2, {{*gs.index_of("ECR"), {0, 1}, {}}, {*gs.index_of("CSDG"), {1, 0}, {}}}, GateSetId::Custom22};
  try {
    export_qasm(c, QasmOptions{false});
    FAIL() << "expected UnsupportedGateError";
  } catch (const UnsupportedGateError& e) {
    EXPECT_EQ(e.names(), (std::vector<std::string>{"ECR", "CSDG"}));
  }
  Circuit ok{2, {{*gs.index_of("CX"), {0, 1}, {}}}, GateSetId::Custom22};
  EXPECT_NO_THROW(export_qasm(ok, QasmOptions{false}));
}

TEST(Qasm, ParametersKeepFullPrecision) {
  Circuit c{1, {{4, {0}, {0.1 + 1e-15}}}, GateSetId::HeronP};
  std::string text = export_qasm(c);
  std::smatch m;
  ASSERT_TRUE(std::regex_search(text, m, std::regex(R"(rz\(([^)]*)\))")));
  EXPECT_EQ(std::stod(m[1]), 0.1 + 1e-15);
}
