#include "qfusion/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include "qfusion/canonical.hpp"
#include "qfusion/error.hpp"

namespace qfusion {

namespace {

void require_nonempty(std::size_t n, const char* what) {
  if (n == 0) throw Error(std::string(what) + ": empty batch");
}

double pct(std::size_t part, std::size_t whole) { return 100.0 * static_cast<double>(part) / static_cast<double>(whole); }

bool has_parametric_gate(const Circuit& c) {
  const auto& gates = c.gateset();
  return std::any_of(c.gates.begin(), c.gates.end(), [&](const auto& g) { return gates[g.gate_index].num_params > 0; });
}

bool meaningful(const Circuit& c) { return is_meaningful(density_matrix(c)); }

}  // namespace

double percent_valid(std::span<const SampleItem> batch) {
  require_nonempty(batch.size(), "percent_valid");
  std::size_t valid = 0;
  for (const auto& item : batch) valid += validate_dag(item.sample.dag).is_valid() ? 1 : 0;
  return pct(valid, batch.size());
}

double percent_unique(std::span<const Circuit> circuits) {
  require_nonempty(circuits.size(), "percent_unique");
  std::set<std::string> keys;
  for (const auto& c : circuits) keys.insert(canonical_form(c));
  return pct(keys.size(), circuits.size());
}

double percent_meaningful(std::span<const Circuit> circuits) {
  require_nonempty(circuits.size(), "percent_meaningful");
  std::size_t count = 0;
  for (const auto& c : circuits) count += meaningful(c) ? 1 : 0;
  return pct(count, circuits.size());
}

std::vector<double> haar_bin_masses(int num_qubits, int num_bins) {
  if (num_qubits < 1 || num_qubits > 30) throw Error("haar_bin_masses: qubit count out of range");
  if (num_bins < 1) throw Error("haar_bin_masses: need at least one bin");
  const double exponent = std::ldexp(1.0, num_qubits) - 1.0;  // N - 1
  std::vector<double> masses(static_cast<std::size_t>(num_bins));
  for (int b = 0; b < num_bins; ++b) {
    double lo = static_cast<double>(b) / num_bins;
    double hi = static_cast<double>(b + 1) / num_bins;
    masses[b] = std::pow(1.0 - lo, exponent) - (b + 1 == num_bins ? 0.0 : std::pow(1.0 - hi, exponent));
  }
  return masses;
}

double expressibility_from_fidelities(std::span<const double> fidelities, int num_qubits, int num_bins) {
  require_nonempty(fidelities.size(), "expressibility");
  std::vector<double> haar = haar_bin_masses(num_qubits, num_bins);
  std::vector<double> hist(haar.size(), 0.0);
  for (double f : fidelities) {
    int b = static_cast<int>(std::clamp(f, 0.0, 1.0) * num_bins);
    hist[std::min(b, num_bins - 1)] += 1.0;
  }
  double kl = 0.0;
  const double n = static_cast<double>(fidelities.size());
  for (std::size_t b = 0; b < hist.size(); ++b) {
    if (hist[b] == 0.0) continue;
    double p = hist[b] / n;
    // A bin the reference cannot reach carries an infinite penalty; clamp to
    // the smallest positive double so the value stays finite.
    double q = std::max(haar[b], std::numeric_limits<double>::min());
    kl += p * std::log(p / q);
  }
  return std::max(kl, 0.0);
}

double expressibility(const std::function<StateVector(Rng&)>& sampler, int num_qubits, int num_pairs, int num_bins,
                      Rng& rng) {
  if (num_pairs < 1) throw Error("expressibility: need at least one pair");
  std::vector<double> f(static_cast<std::size_t>(num_pairs));
  for (auto& v : f) {
    StateVector a = sampler(rng);
    StateVector b = sampler(rng);
    v = fidelity(a, b);
  }
  return expressibility_from_fidelities(f, num_qubits, num_bins);
}

double expressibility(const Circuit& circuit, int num_pairs, int num_bins, Rng& rng) {
  if (num_pairs < 1) throw Error("expressibility: need at least one pair");
  const auto& gates = circuit.gateset();
  std::size_t num_angles = 0;
  for (const auto& g : circuit.gates) num_angles += static_cast<std::size_t>(gates[g.gate_index].num_params);
  const std::size_t pairs = static_cast<std::size_t>(num_pairs);
  std::vector<double> angles(2 * pairs * num_angles);
  for (double& a : angles) a = 2.0 * std::numbers::pi * uniform01(rng);

  auto bind = [&](std::size_t k) {
    Circuit c = circuit;
    std::size_t at = k * num_angles;
    for (auto& g : c.gates) {
      int np = gates[g.gate_index].num_params;
      g.params.assign(angles.begin() + static_cast<std::ptrdiff_t>(at),
                      angles.begin() + static_cast<std::ptrdiff_t>(at + static_cast<std::size_t>(np)));
      at += static_cast<std::size_t>(np);
    }
    return c;
  };

  std::vector<double> f(pairs);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(pairs); ++i) {
    try {
      auto k = static_cast<std::size_t>(i);
      f[k] = fidelity(run_statevector(bind(2 * k)), run_statevector(bind(2 * k + 1)));
    } catch (...) {
#pragma omp critical(qfusion_expr_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return expressibility_from_fidelities(f, circuit.num_qubits, num_bins);
}

EvalReport evaluate_run(std::span<const SampleItem> batch, const EvalOptions& options) {
  require_nonempty(batch.size(), "evaluate_run");
  if (options.num_pairs < 1 || options.num_bins < 1) throw Error("evaluate_run: pairs and bins must be positive");

  struct Info {
    int width;
    bool valid;
    bool meaningful = false;
    std::string key;
    std::optional<double> expr;
  };
  std::vector<Info> info(batch.size());
  std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(batch.size()); ++i) {
    try {
      const auto& item = batch[static_cast<std::size_t>(i)];
      Info& in = info[static_cast<std::size_t>(i)];
      in.width = item.sample.dag.num_qubits;
      in.valid = validate_dag(item.sample.dag).is_valid() && item.circuit.has_value();
      if (!in.valid) continue;
      const Circuit& c = *item.circuit;
      in.meaningful = meaningful(c);
      in.key = canonical_form(c);
      if (options.compute_expressibility && has_parametric_gate(c)) {
        Rng rng = derive_rng(options.seed, item.index);
        in.expr = expressibility(c, options.num_pairs, options.num_bins, rng);
      }
    } catch (...) {
#pragma omp critical(qfusion_eval_error)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);

  struct Tally {
    std::size_t count = 0, valid = 0, meaningful = 0, expr_count = 0;
    double expr_sum = 0.0;
    std::set<std::string> keys;
  };
  auto summarize = [](const std::string& name, const Tally& t, bool subset_row) {
    EvalRow row;
    row.statistic = name;
    row.count = t.count;
    if (!subset_row && t.count > 0) row.pct_valid = pct(t.valid, t.count);
    if (t.valid > 0) {
      row.pct_unique = pct(t.keys.size(), t.valid);
      if (!subset_row) row.pct_meaningful = pct(t.meaningful, t.valid);
    }
    if (t.expr_count > 0) row.expressibility = t.expr_sum / static_cast<double>(t.expr_count);
    return row;
  };

  Tally all, mean_subset;
  std::map<int, Tally> by_width;
  for (const auto& in : info) {
    for (Tally* t : {&all, &by_width[in.width]}) {
      ++t->count;
      if (!in.valid) continue;
      ++t->valid;
      t->keys.insert(in.key);
      if (in.meaningful) ++t->meaningful;
      if (in.expr) {
        ++t->expr_count;
        t->expr_sum += *in.expr;
      }
    }
    if (in.valid && in.meaningful) {
      ++mean_subset.count;
      ++mean_subset.valid;
      mean_subset.keys.insert(in.key);
      if (in.expr) {
        ++mean_subset.expr_count;
        mean_subset.expr_sum += *in.expr;
      }
    }
  }

  EvalReport report;
  report.total = batch.size();
  EvalRow all_row = summarize("all", all, false);
  EvalRow m_row = summarize("meaningful", mean_subset, true);
  report.pct_valid = *all_row.pct_valid;
  report.pct_unique = all_row.pct_unique;
  report.pct_meaningful = all_row.pct_meaningful;
  report.pct_unique_among_meaningful = m_row.pct_unique;
  report.expressibility_mean = all_row.expressibility;
  report.expressibility_meaningful_mean = m_row.expressibility;
  report.rows.push_back(all_row);
  report.rows.push_back(m_row);
  for (const auto& [width, t] : by_width) report.rows.push_back(summarize("n=" + std::to_string(width), t, false));
  return report;
}

namespace {

std::string cell(const std::optional<double>& v, const char* fmt) {
  if (!v) return "-";
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, *v);
  return buf;
}

}  // namespace

std::string render_table(const EvalReport& report) {
  std::ostringstream out;
  char line[256];
  std::snprintf(line, sizeof line, "%-12s %8s %9s %9s %12s %14s\n", "statistic", "count", "% valid", "% unique",
                "% meaningful", "expressibility");
  out << line;
  for (const auto& r : report.rows) {
    std::snprintf(line, sizeof line, "%-12s %8zu %9s %9s %12s %14s\n", r.statistic.c_str(), r.count,
                  cell(r.pct_valid, "%.2f").c_str(), cell(r.pct_unique, "%.2f").c_str(),
                  cell(r.pct_meaningful, "%.2f").c_str(), cell(r.expressibility, "%.4f").c_str());
    out << line;
  }
  return out.str();
}

std::string render_csv(const EvalReport& report) {
  std::ostringstream out;
  out << "statistic,% valid,% unique,% meaningful,expressibility\n";
  for (const auto& r : report.rows)
    out << r.statistic << ',' << cell(r.pct_valid, "%.6f") << ',' << cell(r.pct_unique, "%.6f") << ','
        << cell(r.pct_meaningful, "%.6f") << ',' << cell(r.expressibility, "%.6f") << '\n';
  return out.str();
}

}  // namespace qfusion
