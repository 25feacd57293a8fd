#include <gtest/gtest.h>

#include <limits>
#include <sstream>

#include "qfusion/checkpoint.hpp"
#include "qfusion/error.hpp"
#include "qfusion/sampler.hpp"
#include "qfusion/train.hpp"

using namespace qfusion;

namespace {

Dataset heron_dataset(std::size_t samples, std::uint64_t seed = 1) {
  DatasetSpec spec;
  spec.gateset = GateSetId::HeronNp;
  spec.num_samples = samples;
  spec.seed = seed;
  return build_dataset(spec);
}

TrainConfig quick_config(int epochs) {
  TrainConfig c;
  c.epochs = epochs;
  c.seed = 5;
  c.encoder.node_embed_dim = 16;
  c.encoder.hidden_dim = 32;
  c.encoder.wire_embed_dim = 8;
  c.encoder.timestep_embed_dim = 8;
  c.encoder.label_embed_dim = 8;
  return c;
}

std::string bytes_of(const Checkpoint& ck) {
  std::ostringstream out;
  write_checkpoint(ck, out);
  return out.str();
}

}  // namespace

TEST(Train, SameSeedGivesIdenticalHistory) {
  Dataset d = heron_dataset(40);
  Checkpoint a = train(d, quick_config(3)), b = train(d, quick_config(3));
  ASSERT_EQ(a.history.size(), 3u);
  EXPECT_EQ(a.history, b.history);
  EXPECT_EQ(bytes_of(a), bytes_of(b));
  TrainConfig other = quick_config(3);
  other.seed = 6;
  EXPECT_NE(train(d, other).history, a.history);
}

// One 600-record desk run checked several ways: loss curve, teacher-forced
// layer-size predictions, and the in-degree of sampled single-qubit nodes.
TEST(Train, DeskRunOnDefaultModel) {
  Dataset d = heron_dataset(600);
  TrainConfig c;
  c.epochs = 20;
  c.seed = 1;
  Checkpoint ck = train(d, c);
  ASSERT_EQ(ck.history.size(), 20u);
  EXPECT_LT(ck.history.back().total, 0.7 * ck.history.front().total)
      << ck.history.front().total << " -> " << ck.history.back().total;

  std::vector<const DatasetRecord*> recs;
  for (const auto& r : d.records) recs.push_back(&r);
  Rng rng(2);
  ModelBatch batch = build_training_batch(ck.model, recs, rng, 0.0);
  ad::Tape tape;
  ModelOutputs out = ck.model.forward(tape, batch);
  const auto& logits = tape.value(out.size_logits);
  double expected_width = 0.0, true_width = 0.0;
  std::size_t layers = 0, stops = 0, confident_stops = 0;
  for (std::size_t r = 0; r < logits.rows; ++r) {
    auto p = softmax(logits.row(r));
    if (batch.size_target[r] == 0) {
      ++stops;
      confident_stops += p[0] >= 0.5;
      continue;
    }
    for (std::size_t k = 0; k < p.size(); ++k) expected_width += static_cast<double>(k) * p[k];
    true_width += batch.size_target[r];
    ++layers;
  }
  EXPECT_EQ(stops, d.records.size());
  EXPECT_NEAR(expected_width / layers, true_width / layers, 1.0);
  EXPECT_GE(static_cast<double>(confident_stops), 0.8 * static_cast<double>(stops));

  SamplerConfig sc;
  sc.edge_mode = EdgeMode::Free;
  sc.seed = 3;
  double in_degree = 0.0;
  std::size_t singles = 0;
  for (const auto& it : sample_circuits(ck, sc, 200)) {
    const auto& dag = it.sample.dag;
    std::vector<int> incoming(dag.nodes.size(), 0);
    for (const auto& e : dag.edges)
      if (e.dst < dag.nodes.size()) ++incoming[e.dst];
    for (std::size_t k = 0; k < dag.nodes.size(); ++k)
      if (dag.nodes[k].kind == NodeKind::Gate && dag.nodes[k].wires.size() == 1) {
        in_degree += incoming[k];
        ++singles;
      }
  }
  ASSERT_GT(singles, 0u);
  EXPECT_NEAR(in_degree / static_cast<double>(singles), 1.0, 0.3);
}

TEST(Train, HistoryAndLabelsRecorded) {
  Dataset d = heron_dataset(10);
  std::vector<int> seen;
  TrainConfig c = quick_config(2);
  c.on_epoch = [&](const EpochStats& s) { seen.push_back(s.epoch); };
  Checkpoint ck = train(d, c);
  EXPECT_EQ(seen, (std::vector<int>{1, 2}));
  ASSERT_EQ(ck.labels.size(), 10u);
  EXPECT_EQ(ck.labels[3].re, d.records[3].label.re);
  EXPECT_EQ(ck.labels[3].num_qubits, 2);
  EXPECT_EQ(ck.model.max_qubits(), 2);
  for (const auto& s : ck.history) EXPECT_NEAR(s.total, s.size + s.node + s.edge, 1e-12);
}

TEST(Train, RejectsBadInputs) {
  Dataset d = heron_dataset(4);
  TrainConfig c = quick_config(1);
  Dataset empty;
  EXPECT_THROW(train(empty, c), Error);
  Dataset mixed = d;
  mixed.records[2].circuit.gateset_id = GateSetId::Custom22;
  EXPECT_THROW(train(mixed, c), Error);
  Dataset poisoned = d;
  poisoned.records[1].label.re = std::numeric_limits<double>::quiet_NaN();
  try {
    train(poisoned, c);
    ADD_FAILURE() << "no throw";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos) << e.what();
  }
  c.max_qubits = 1;
  EXPECT_THROW(train(d, c), Error);
  c = quick_config(1);
  c.batch_size = 0;
  EXPECT_THROW(train(d, c), Error);
  c = quick_config(1);
  c.learning_rate = -1.0;
  EXPECT_THROW(train(d, c), Error);
}

TEST(Checkpoint, BitExactRoundTrip) {
  Dataset d = heron_dataset(12);
  TrainConfig c = quick_config(2);
  c.diffusion_steps = 12;
  Checkpoint ck = train(d, c);
  std::string first = bytes_of(ck);
  std::istringstream in(first);
  Checkpoint back = read_checkpoint(in);
  EXPECT_EQ(bytes_of(back), first);
  EXPECT_EQ(back.history, ck.history);
  EXPECT_EQ(back.labels, ck.labels);
  EXPECT_EQ(back.seed, ck.seed);
  EXPECT_EQ(back.model.config(), ck.model.config());
  EXPECT_EQ(back.model.schedule().keep_probabilities(), ck.model.schedule().keep_probabilities());
  auto a = ck.model.all_params();
  auto b = back.model.all_params();
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i]->name, b[i]->name);
    EXPECT_EQ(a[i]->value, b[i]->value);
  }
}

TEST(Checkpoint, ReadErrors) {
  Checkpoint ck = train(heron_dataset(4), quick_config(1));
  std::string good = bytes_of(ck);
  auto fails = [](std::string text) {
    std::istringstream in(text);
    EXPECT_THROW(read_checkpoint(in), FormatError);
  };
  fails("");
  fails("QFCX" + good.substr(4));
  std::string bad_version = good;
  bad_version[4] = 9;
  fails(bad_version);
  fails(good.substr(0, good.size() / 2));
  fails(good.substr(0, good.size() - 1));
}
