#include <gtest/gtest.h>

#include <map>
#include <sstream>

#include <omp.h>

#include "qfusion/error.hpp"
#include "qfusion/sampler.hpp"
#include "qfusion/train.hpp"

using namespace qfusion;

namespace {

EncoderConfig small_encoder() {
  EncoderConfig c;
  c.node_embed_dim = 16;
  c.wire_embed_dim = 8;
  c.hidden_dim = 32;
  c.timestep_embed_dim = 8;
  c.label_embed_dim = 8;
  return c;
}

Dataset heron_dataset(std::size_t samples, std::vector<int> widths = {2}) {
  DatasetSpec spec;
  spec.gateset = GateSetId::HeronNp;
  spec.qubit_counts = std::move(widths);
  spec.num_samples = samples;
  spec.seed = 1;
  return build_dataset(spec);
}

// Untrained model carrying the training labels, as train() with zero epochs.
Checkpoint untrained(std::vector<int> widths = {2}) {
  TrainConfig c;
  c.epochs = 0;
  c.encoder = small_encoder();
  c.max_qubits = 3;
  return train(heron_dataset(30, std::move(widths)), c);
}

std::string sample_text(const Checkpoint& ck, const SamplerConfig& cfg, std::size_t count) {
  std::ostringstream out;
  write_samples(sample_circuits(ck, cfg, count), ck.model.gateset(), cfg, out);
  return out.str();
}

class TrainedSampler : public ::testing::Test {
 protected:
  static void SetUpTestSuite() {
    TrainConfig c;
    c.epochs = 40;
    c.seed = 2;
    c.encoder = small_encoder();
    c.learning_rate = 3e-3;
    checkpoint_ = new Checkpoint(train(heron_dataset(600), c));
  }
  static void TearDownTestSuite() {
    delete checkpoint_;
    checkpoint_ = nullptr;
  }
  static Checkpoint* checkpoint_;
};
Checkpoint* TrainedSampler::checkpoint_ = nullptr;

}  // namespace

TEST(Sampler, ModeNames) {
  EXPECT_EQ(to_string(SamplingMode::WireFree), "wire_free");
  EXPECT_EQ(to_string(EdgeMode::Constrained), "constrained");
  EXPECT_EQ(parse_sampling_mode("wire_head"), SamplingMode::WireHead);
  EXPECT_EQ(parse_edge_mode("free"), EdgeMode::Free);
  EXPECT_FALSE(parse_edge_mode("loose").has_value());
}

TEST(Sampler, ConfigValidation) {
  SamplerConfig c;
  c.mode = SamplingMode::WireFree;
  c.edge_mode = EdgeMode::Free;
  EXPECT_THROW(validate_config(c), Error);
  c = SamplerConfig{};
  c.max_layers = 0;
  EXPECT_THROW(validate_config(c), Error);
  Checkpoint ck = untrained();
  Rng rng(1);
  c = SamplerConfig{};
  c.num_qubits = 4;
  EXPECT_THROW(sample_dag(ck, c, rng), Error);
  c.num_qubits = 3;
  EXPECT_THROW(sample_dag(ck, c, rng), Error);  // no 3-qubit training label
  c.fixed_label = CircuitLabel{1.0, 0.0};
  EXPECT_NO_THROW(sample_dag(ck, c, rng));
}

// An untrained model still terminates in every mode, and constrained edges
// always give valid DAGs.
TEST(Sampler, UntrainedTerminatesAndConstrainedIsValid) {
  Checkpoint ck = untrained({1, 2});
  for (auto mode : {SamplingMode::WireHead, SamplingMode::WireFree})
    for (auto edges : {EdgeMode::Constrained, EdgeMode::Free}) {
      if (mode == SamplingMode::WireFree && edges == EdgeMode::Free) continue;
      SamplerConfig c;
      c.mode = mode;
      c.edge_mode = edges;
      c.max_layers = 12;
      c.seed = 3;
      auto items = sample_circuits(ck, c, 200);
      ASSERT_EQ(items.size(), 200u);
      for (const auto& it : items) {
        int deepest = 0;
        for (const auto& n : it.sample.dag.nodes)
          if (n.kind == NodeKind::Gate) deepest = std::max(deepest, n.layer);
        EXPECT_LE(deepest, 12);
        EXPECT_EQ(it.circuit.has_value(), it.report.is_valid());
        if (edges == EdgeMode::Constrained) EXPECT_TRUE(it.report.is_valid()) << it.report.summary();
        if (it.circuit) EXPECT_NO_THROW(validate_circuit(*it.circuit));
      }
    }
}

TEST(Sampler, DeterministicAcrossRunsAndThreads) {
  Checkpoint ck = untrained();
  SamplerConfig c;
  c.seed = 9;
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  std::string one = sample_text(ck, c, 60);
  omp_set_num_threads(4);
  std::string four = sample_text(ck, c, 60);
  omp_set_num_threads(saved);
  EXPECT_EQ(one, four);
  EXPECT_EQ(one, sample_text(ck, c, 60));
  c.seed = 10;
  EXPECT_NE(one, sample_text(ck, c, 60));
}

TEST(Sampler, ItemStreamsAreIndependentOfCount) {
  Checkpoint ck = untrained();
  SamplerConfig c;
  c.seed = 4;
  auto few = sample_circuits(ck, c, 5), many = sample_circuits(ck, c, 20);
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(few[i].index, i);
    EXPECT_EQ(few[i].sample.dag, many[i].sample.dag);
  }
}

TEST(Sampler, HonoursLargeCount) {
  Checkpoint ck = untrained();
  SamplerConfig c;
  c.max_layers = 4;
  auto items = sample_circuits(ck, c, 4320);
  ASSERT_EQ(items.size(), 4320u);
  for (std::size_t i = 0; i < items.size(); ++i) EXPECT_EQ(items[i].index, i);
}

// Chi-square for the start-node qubit permutation over all n! outcomes.
TEST(Sampler, WireFreePermutationUniform) {
  Checkpoint ck = untrained();
  SamplerConfig c;
  c.mode = SamplingMode::WireFree;
  c.num_qubits = 2;
  c.max_layers = 2;
  Rng rng(21);
  std::map<std::vector<int>, double> counts;
  const int draws = 10000;
  for (int i = 0; i < draws; ++i) counts[sample_dag(ck, c, rng).permutation] += 1.0;
  ASSERT_EQ(counts.size(), 2u);
  double chi2 = 0.0;
  for (const auto& [perm, n] : counts) chi2 += (n - draws / 2.0) * (n - draws / 2.0) / (draws / 2.0);
  EXPECT_LT(chi2, 10.83);  // p = 0.001, one degree of freedom
}

TEST(Sampler, SampleFileRoundTrip) {
  Checkpoint ck = untrained({1, 2});
  SamplerConfig c;
  c.edge_mode = EdgeMode::Free;
  c.seed = 12;
  auto items = sample_circuits(ck, c, 80);
  std::ostringstream out;
  write_samples(items, ck.model.gateset(), c, out);
  std::string text = out.str();
  EXPECT_EQ(text.rfind("QFSAMPLES v1 gateset=heron_np seed=12 mode=wire_head edge_mode=free\n", 0), 0u);
  std::istringstream in(text);
  SampleFile back = read_samples(in);
  EXPECT_EQ(back.gateset, GateSetId::HeronNp);
  EXPECT_EQ(back.seed, 12u);
  ASSERT_EQ(back.items.size(), items.size());
  for (std::size_t i = 0; i < items.size(); ++i) {
    EXPECT_EQ(back.items[i].sample.dag, items[i].sample.dag);
    EXPECT_EQ(back.items[i].sample.truncated, items[i].sample.truncated);
    EXPECT_EQ(back.items[i].circuit, items[i].circuit);
  }
  std::ostringstream again;
  write_samples(back.items, back.gateset, c, again);
  EXPECT_EQ(again.str(), text);
}

TEST(Sampler, SampleFileErrors) {
  auto line_of = [](const std::string& text) -> std::size_t {
    std::istringstream in(text);
    try {
      read_samples(in);
    } catch (const FormatError& e) {
      return e.line();
    }
    return 0;
  };
  const std::string header = "QFSAMPLES v1 gateset=heron_np seed=1 mode=wire_head edge_mode=constrained\n";
  EXPECT_EQ(line_of(""), 1u);
  EXPECT_EQ(line_of("QFSAMPLES v2 gateset=heron_np\n"), 1u);
  EXPECT_EQ(line_of("QFSAMPLES v1 gateset=heron_np bogus=1\n"), 1u);
  EXPECT_EQ(line_of(header + "0 valid 0\n"), 2u);
  EXPECT_EQ(line_of(header + "0 valid 0 1|S@0;E@1|0>1:0 -\n"), 2u);
}

TEST_F(TrainedSampler, MeanGateCountNearTraining) {
  SamplerConfig c;
  c.seed = 5;
  auto items = sample_circuits(*checkpoint_, c, 500);
  double gates = 0.0;
  std::size_t valid = 0;
  for (const auto& it : items) {
    if (!it.circuit) continue;
    ++valid;
    gates += static_cast<double>(it.circuit->gates.size());
  }
  EXPECT_EQ(valid, items.size());
  const double mean = gates / static_cast<double>(valid);
  EXPECT_GE(mean, 6.0);
  EXPECT_LE(mean, 10.0);
}

TEST_F(TrainedSampler, WireFreeIsValidAndUsesAllQubitOrders) {
  SamplerConfig c;
  c.mode = SamplingMode::WireFree;
  c.seed = 6;
  auto items = sample_circuits(*checkpoint_, c, 200);
  std::size_t swapped = 0;
  for (const auto& it : items) {
    EXPECT_TRUE(it.report.is_valid());
    swapped += it.sample.permutation == std::vector<int>{1, 0};
  }
  EXPECT_GT(swapped, 60u);
  EXPECT_LT(swapped, 140u);
}
