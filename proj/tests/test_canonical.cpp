#include <gtest/gtest.h>

#include "qfusion/canonical.hpp"
#include "support.hpp"

using namespace qfusion;

namespace {

Circuit heron(int n, std::vector<GateInstance> g) { return Circuit{n, std::move(g), GateSetId::HeronNp}; }
Circuit custom(int n, std::vector<GateInstance> g) { return Circuit{n, std::move(g), GateSetId::Custom22}; }

}  // namespace

TEST(Canonical, ParallelGatesCommute) {
  // H@0, X@1 vs X@1, H@0
  EXPECT_EQ(canonical_form(custom(2, {{3, {0}, {}}, {0, {1}, {}}})),
            canonical_form(custom(2, {{0, {1}, {}}, {3, {0}, {}}})));
}

TEST(Canonical, SameWireOrderMatters) {
  EXPECT_NE(canonical_form(custom(1, {{3, {0}, {}}, {0, {0}, {}}})),
            canonical_form(custom(1, {{0, {0}, {}}, {3, {0}, {}}})));
}

TEST(Canonical, WidthAndParamsMatter) {
  EXPECT_NE(canonical_form(heron(1, {})), canonical_form(heron(2, {})));
  Circuit a{1, {{4, {0}, {0.1234561}}}, GateSetId::HeronP};
  Circuit b{1, {{4, {0}, {0.1234564}}}, GateSetId::HeronP};
  Circuit c{1, {{4, {0}, {0.1234579}}}, GateSetId::HeronP};
  EXPECT_EQ(canonical_form(a), canonical_form(b));
  EXPECT_NE(canonical_form(a), canonical_form(c));
  EXPECT_NE(canonical_form(heron(2, {{3, {0, 1}, {}}})), canonical_form(heron(2, {{3, {1, 0}, {}}})));
}

TEST(Canonical, NegativeZeroNormalised) {
  Circuit a{1, {{4, {0}, {-0.0000001}}}, GateSetId::HeronP};
  Circuit b{1, {{4, {0}, {0.0}}}, GateSetId::HeronP};
  EXPECT_EQ(canonical_form(a), canonical_form(b));
}

// Shuffling gates within a layer keeps the key; swapping two gates that
// share a wire changes it unless they are identical.
TEST(Canonical, PermutationProperties) {
  Rng rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    int n = 2 + static_cast<int>(uniform_index(rng, 3));
    Circuit c = qtest::random_circuit(GateSetId::Custom22, n, 8, rng);
    CircuitDAG d = circuit_to_dag(c);
    Circuit layered = dag_to_circuit(d);
    // Reverse each layer's block.
    Circuit shuffled = layered;
    std::vector<int> layer_of;
    for (std::size_t k = 1; k + 1 < d.nodes.size(); ++k) layer_of.push_back(d.nodes[k].layer);
    std::sort(layer_of.begin(), layer_of.end());
    for (std::size_t i = 0; i < layer_of.size();) {
      std::size_t j = i;
      while (j < layer_of.size() && layer_of[j] == layer_of[i]) ++j;
      std::reverse(shuffled.gates.begin() + static_cast<std::ptrdiff_t>(i),
                   shuffled.gates.begin() + static_cast<std::ptrdiff_t>(j));
      i = j;
    }
    EXPECT_EQ(canonical_form(shuffled), canonical_form(c));

    for (std::size_t i = 0; i + 1 < c.gates.size(); ++i) {
      const auto &a = c.gates[i], &b = c.gates[i + 1];
      bool share = std::any_of(a.wires.begin(), a.wires.end(),
                               [&](int w) { return std::find(b.wires.begin(), b.wires.end(), w) != b.wires.end(); });
      if (!share || (a.gate_index == b.gate_index && a.wires == b.wires)) continue;
      Circuit swapped = c;
      std::swap(swapped.gates[i], swapped.gates[i + 1]);
      EXPECT_NE(canonical_form(swapped), canonical_form(c));
    }
  }
}

// Key equality agrees with exhaustive wire-labelled DAG isomorphism.
TEST(Canonical, MatchesIsomorphismOracle) {
  Rng rng(99);
  std::vector<Circuit> pool;
  // Small gate vocabulary and sizes so that collisions actually occur.
  for (int k = 0; k < 150; ++k) {
    int n = 1 + static_cast<int>(uniform_index(rng, 2));
    pool.push_back(qtest::random_circuit(GateSetId::HeronNp, n, 1 + static_cast<int>(uniform_index(rng, 3)), rng));
  }
  int equal_pairs = 0;
  for (std::size_t i = 0; i < pool.size(); ++i)
    for (std::size_t j = i + 1; j < pool.size(); ++j) {
      bool same_key = canonical_form(pool[i]) == canonical_form(pool[j]);
      bool iso = qtest::dags_isomorphic(circuit_to_dag(pool[i]), circuit_to_dag(pool[j]));
      ASSERT_EQ(same_key, iso) << serialize_circuit(pool[i]) << " vs " << serialize_circuit(pool[j]);
      equal_pairs += iso;
    }
  EXPECT_GT(equal_pairs, 10);
}
