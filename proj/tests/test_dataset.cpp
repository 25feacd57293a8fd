#include <gtest/gtest.h>

#include <sstream>

#include "qfusion/dataset.hpp"
#include "qfusion/error.hpp"
#include "support.hpp"

using namespace qfusion;

namespace {

DatasetSpec small_spec(GateSetId id = GateSetId::HeronNp, std::size_t samples = 50) {
  DatasetSpec spec;
  spec.gateset = id;
  spec.num_samples = samples;
  spec.seed = 11;
  return spec;
}

}  // namespace

TEST(Dataset, DeterministicAndIndexIndependent) {
  DatasetSpec spec = small_spec(GateSetId::HeronP, 40);
  Dataset a = build_dataset(spec), b = build_dataset(spec);
  ASSERT_EQ(a.records.size(), 40u);
  EXPECT_EQ(a.records, b.records);
  for (std::size_t i : {0u, 7u, 39u}) EXPECT_EQ(generate_record(spec, i), a.records[i]);
  spec.seed = 12;
  EXPECT_NE(build_dataset(spec).records, a.records);
}

TEST(Dataset, RecordsAreValidWithCorrectLabels) {
  for (auto id : qtest::all_gatesets()) {
    DatasetSpec spec = small_spec(id, 30);
    spec.qubit_counts = {1, 2, 3};
    if (id == GateSetId::HeronNp) spec.qubit_counts = {2, 3};
    for (const auto& r : build_dataset(spec).records) {
      EXPECT_NO_THROW(validate_circuit(r.circuit));
      EXPECT_EQ(r.circuit.gates.size(), 8u);
      EXPECT_TRUE(params_bound(r.circuit));
      Eigen::MatrixXcd rho = qtest::oracle_density(r.circuit);
      EXPECT_NEAR(r.label.re, rho.sum().real(), 1e-9);
      EXPECT_NEAR(r.label.im, rho.sum().imag(), 1e-9);
      for (const auto& g : r.circuit.gates)
        for (double p : g.params) {
          EXPECT_GE(p, 0.0);
          EXPECT_LE(p, 2.0 * std::numbers::pi);
          EXPECT_EQ(p, round_param(p));
        }
    }
  }
}

// Chi-square against the uniform gate distribution, 5 sigma above the mean.
TEST(Dataset, GateFrequenciesUniform) {
  DatasetSpec spec = small_spec(GateSetId::Custom22, 2000);
  const GateSet& gs = gate_set(spec.gateset);
  std::vector<double> counts(gs.size(), 0.0);
  double total = 0.0;
  for (const auto& r : build_dataset(spec).records)
    for (const auto& g : r.circuit.gates) {
      counts[g.gate_index] += 1.0;
      total += 1.0;
    }
  const double expected = total / static_cast<double>(gs.size());
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  const double dof = static_cast<double>(gs.size() - 1);
  EXPECT_LT(chi2, dof + 5.0 * std::sqrt(2.0 * dof));
}

TEST(Dataset, FileRoundTrip) {
  Dataset d = build_dataset(small_spec(GateSetId::HeronP, 25));
  std::stringstream buf;
  write_dataset(d, buf);
  std::string text = buf.str();
  EXPECT_EQ(text.rfind("QFDS v1 gateset=heron_p seed=11\n", 0), 0u);
  EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 26);
  Dataset back = read_dataset(buf);
  EXPECT_EQ(back.gateset, d.gateset);
  EXPECT_EQ(back.seed, d.seed);
  EXPECT_EQ(back.records, d.records);
  std::stringstream again;
  write_dataset(back, again);
  EXPECT_EQ(again.str(), text);
}

TEST(Dataset, ReadErrorsNameTheLine) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_dataset(in);
    } catch (const FormatError& e) {
      return e.line();
    }
    return 0;
  };
  EXPECT_EQ(line_of(""), 1u);
  EXPECT_EQ(line_of("QFDS v2 gateset=heron_np seed=1\n"), 1u);
  EXPECT_EQ(line_of("QFDS v1 gateset=nope seed=1\n"), 1u);
  EXPECT_EQ(line_of("QFDS v1 gateset=heron_np seed=1\n1 0 1|\nfoo\n"), 3u);
  EXPECT_EQ(line_of("QFDS v1 gateset=heron_np seed=1\n1 0 1|\n1 0 1|BOGUS:0:\n"), 3u);
  EXPECT_EQ(line_of("QFDS v1 gateset=heron_np seed=1\nx 0 1|\n"), 2u);
  // Label check applies to the first record.
  EXPECT_EQ(line_of("QFDS v1 gateset=heron_np seed=1\n0.5 0 1|\n"), 2u);
}

TEST(Dataset, SpecValidation) {
  DatasetSpec spec;
  spec.qubit_counts = {};
  EXPECT_THROW(validate_spec(spec), Error);
  spec.qubit_counts = {0};
  EXPECT_THROW(validate_spec(spec), Error);
  spec.qubit_counts = {9};
  EXPECT_THROW(validate_spec(spec, 8), Error);
  spec.qubit_counts = {2};
  spec.gates_per_circuit = -1;
  EXPECT_THROW(validate_spec(spec), Error);
  spec.gates_per_circuit = 3;
  spec.param_hi = spec.param_lo;
  EXPECT_THROW(validate_spec(spec), Error);
}

TEST(Dataset, LabelRounding) {
  EXPECT_EQ(round_label_component(0.123456789012345), 0.123456789012);
  EXPECT_EQ(round_label_component(0.0), 0.0);
  EXPECT_EQ(round_label_component(2.0), 2.0);
}

TEST(Dataset, FullScaleCustom22) {
  DatasetSpec spec = small_spec(GateSetId::Custom22, 6000);
  Dataset d = build_dataset(spec);
  ASSERT_EQ(d.records.size(), 6000u);
  for (const auto& r : d.records) {
    EXPECT_EQ(r.circuit.gates.size(), 8u);
    EXPECT_EQ(r.circuit.num_qubits, 2);
  }
  DatasetSpec seven = small_spec(GateSetId::HeronNp, 1);
  seven.seed = 7;
  EXPECT_EQ(build_dataset(seven).records, build_dataset(seven).records);
}

// Each gate type within 3 sigma of its expected count. Gates that fit every
// width are drawn with probability 1/|G|; two-qubit gates cannot appear on
// one qubit, so widths are tallied separately.
TEST(Dataset, HeronPWideFrequencies) {
  DatasetSpec spec = small_spec(GateSetId::HeronP, 6000);
  spec.qubit_counts = {1, 2, 3, 4, 5};
  spec.gates_per_circuit = 32;
  Dataset d = build_dataset(spec);
  const GateSet& gs = gate_set(spec.gateset);
  std::vector<double> expected(gs.size(), 0.0), counts(gs.size(), 0.0);
  double draws = 0.0;
  for (const auto& r : d.records) {
    std::vector<std::size_t> fit;
    for (std::size_t g = 0; g < gs.size(); ++g)
      if (gs[g].arity <= r.circuit.num_qubits) fit.push_back(g);
    for (const auto& gi : r.circuit.gates) {
      counts[gi.gate_index] += 1.0;
      for (std::size_t g : fit) expected[g] += 1.0 / static_cast<double>(fit.size());
      draws += 1.0;
    }
  }
  for (std::size_t g = 0; g < gs.size(); ++g) {
    const double p = expected[g] / draws;
    EXPECT_LE(std::abs(counts[g] - expected[g]), 3.0 * std::sqrt(draws * p * (1 - p))) << gs[g].name;
  }

  std::stringstream buf;
  write_dataset(d, buf);
  Dataset back = read_dataset(buf);
  EXPECT_EQ(back.records, d.records);
}

TEST(Dataset, WireOutOfRangeNamesLine) {
  std::istringstream in("QFDS v1 gateset=heron_np seed=1\n1 0 2|\n1 0 2|X:5:\n");
  try {
    read_dataset(in);
    ADD_FAILURE() << "no throw";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}
