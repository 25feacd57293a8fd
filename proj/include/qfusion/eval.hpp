#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "qfusion/sampler.hpp"
#include "qfusion/simulator.hpp"

namespace qfusion {

/// Share of items whose DAG passes validate_dag, in percent. Throws Error on
/// an empty batch.
double percent_valid(std::span<const SampleItem> batch);

/// Distinct canonical forms over the given circuits, in percent.
double percent_unique(std::span<const Circuit> circuits);

/// Circuits whose density matrix has at least 10 entries above 1e-8, in
/// percent.
double percent_meaningful(std::span<const Circuit> circuits);

/// Probability mass of each of `num_bins` equal fidelity bins on [0, 1] under
/// the Haar density (N-1)(1-F)^(N-2), N = 2^num_qubits.
std::vector<double> haar_bin_masses(int num_qubits, int num_bins);

/// KL(empirical histogram || Haar) with 0 log 0 = 0.
double expressibility_from_fidelities(std::span<const double> fidelities, int num_qubits, int num_bins);

/// Fidelities of `num_pairs` pairs of states drawn from `sampler`.
double expressibility(const std::function<StateVector(Rng&)>& sampler, int num_qubits, int num_pairs, int num_bins,
                      Rng& rng);

/// Each pair binds every parametric gate to an independent uniform [0, 2pi)
/// angle, twice. Non-parametric circuits yield the point-mass value.
double expressibility(const Circuit& circuit, int num_pairs, int num_bins, Rng& rng);

struct EvalOptions {
  int num_pairs = 5000;
  int num_bins = 75;
  std::uint64_t seed = 0;
  bool compute_expressibility = true;
};

struct EvalRow {
  std::string statistic;
  std::size_t count = 0;
  std::optional<double> pct_valid, pct_unique, pct_meaningful, expressibility;
};

struct EvalReport {
  std::size_t total = 0;
  double pct_valid = 0.0;
  std::optional<double> pct_unique;
  std::optional<double> pct_meaningful;
  std::optional<double> pct_unique_among_meaningful;
  std::optional<double> expressibility_mean;
  std::optional<double> expressibility_meaningful_mean;
  /// "all", "meaningful", then one "n=<q>" row per qubit count present.
  std::vector<EvalRow> rows;
};

/// Expressibility averages over valid circuits with at least one parametric
/// gate, each against its own qubit count. Deterministic given the batch and
/// options.seed. Throws Error on an empty batch.
EvalReport evaluate_run(std::span<const SampleItem> batch, const EvalOptions& options = {});

std::string render_table(const EvalReport& report);
/// Header `statistic,% valid,% unique,% meaningful,expressibility`.
std::string render_csv(const EvalReport& report);

}  // namespace qfusion
