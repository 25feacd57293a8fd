#include "qfusion/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "qfusion/checkpoint.hpp"
#include "qfusion/dag.hpp"
#include "qfusion/dataset.hpp"
#include "qfusion/error.hpp"
#include "qfusion/eval.hpp"
#include "qfusion/qasm.hpp"
#include "qfusion/sampler.hpp"
#include "qfusion/train.hpp"

namespace qfusion {

namespace {

class UsageError : public Error {
 public:
  using Error::Error;
};

class GatesetMismatchError : public Error {
 public:
  using Error::Error;
};

struct ConfigEntry {
  std::size_t line;
  std::string key, value;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<ConfigEntry> read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file " + path);
  std::vector<ConfigEntry> entries;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError(n, "config: expected key=value");
    std::string key = trim(t.substr(0, eq));
    for (char& c : key)
      if (c == '_') c = '-';
    entries.push_back({n, key, trim(t.substr(eq + 1))});
  }
  return entries;
}

GateSetId gateset_arg(const std::string& text) {
  auto id = parse_gateset_id(text);
  if (!id) throw UsageError("unknown gate set '" + text + "' (expected custom22, heron_np or heron_p)");
  return *id;
}

std::vector<int> qubit_list(const std::string& text) {
  std::vector<int> out;
  std::stringstream ss(text);
  std::string part;
  auto to_int = [&](const std::string& s) {
    try {
      std::size_t used = 0;
      int v = std::stoi(s, &used);
      if (used != s.size()) throw std::invalid_argument(s);
      return v;
    } catch (const std::exception&) {
      throw UsageError("bad qubit list '" + text + "'");
    }
  };
  while (std::getline(ss, part, ',')) {
    auto dash = part.find('-');
    if (dash != std::string::npos && dash > 0) {
      int lo = to_int(part.substr(0, dash)), hi = to_int(part.substr(dash + 1));
      if (hi < lo) throw UsageError("bad qubit range '" + part + "'");
      for (int q = lo; q <= hi; ++q) out.push_back(q);
    } else {
      out.push_back(to_int(part));
    }
  }
  if (out.empty()) throw UsageError("empty qubit list");
  return out;
}

std::string join_ints(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void log_config(std::ostream& err, const std::string& command,
                const std::vector<std::pair<std::string, std::string>>& fields) {
  err << "config " << command;
  for (const auto& [k, v] : fields) err << ' ' << k << '=' << v;
  err << '\n';
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open " + path + " for writing");
  return out;
}

struct GenArgs {
  std::string gateset = "heron_np", qubits = "2", out;
  int gates = 8;
  std::size_t samples = 6000;
  std::uint64_t seed = 0;
};

struct TrainArgs {
  std::string dataset, out, loss_log, gateset;
  int epochs = 20, steps = 32, batch = 32, max_qubits = 0;
  int node_dim = 64, wire_dim = 16, hidden_dim = 128, rounds = 2;
  double lr = 1e-3;
  std::uint64_t seed = 0;
};

struct SampleArgs {
  std::string checkpoint, out, mode = "wire_head", edge_mode = "constrained", label, gateset, qasm_dir;
  std::size_t count = 100;
  int qubits = 0, max_layers = 64;
  std::uint64_t seed = 0;
};

struct EvalArgs {
  std::string input, out, csv;
  int pairs = 5000, bins = 75;
  std::uint64_t seed = 0;
  bool no_expressibility = false;
};

struct ExportArgs {
  std::string input, out;
  bool no_definitions = false;
};

int cmd_gen_dataset(const GenArgs& a, std::ostream& out, std::ostream& err) {
  DatasetSpec spec;
  spec.gateset = gateset_arg(a.gateset);
  spec.qubit_counts = qubit_list(a.qubits);
  spec.gates_per_circuit = a.gates;
  spec.num_samples = a.samples;
  spec.seed = a.seed;
  log_config(err, "gen-dataset",
             {{"gateset", a.gateset}, {"qubits", join_ints(spec.qubit_counts)}, {"gates", std::to_string(a.gates)},
              {"samples", std::to_string(a.samples)}, {"seed", std::to_string(a.seed)}, {"out", a.out}});
  validate_spec(spec);
  Dataset ds = build_dataset(spec);
  save_dataset(ds, a.out);
  out << "wrote " << ds.records.size() << " records to " << a.out << '\n';
  return 0;
}

int cmd_train(const TrainArgs& a, std::ostream& out, std::ostream& err) {
  TrainConfig cfg;
  cfg.epochs = a.epochs;
  cfg.batch_size = a.batch;
  cfg.learning_rate = a.lr;
  cfg.seed = a.seed;
  cfg.diffusion_steps = a.steps;
  cfg.max_qubits = a.max_qubits;
  cfg.encoder.node_embed_dim = a.node_dim;
  cfg.encoder.wire_embed_dim = a.wire_dim;
  cfg.encoder.hidden_dim = a.hidden_dim;
  cfg.encoder.message_rounds = a.rounds;
  std::string loss_log = a.loss_log.empty() ? a.out + ".loss.csv" : a.loss_log;
  log_config(err, "train",
             {{"dataset", a.dataset}, {"out", a.out}, {"loss-log", loss_log},
              {"gateset", a.gateset.empty() ? "(dataset)" : a.gateset}, {"epochs", std::to_string(a.epochs)},
              {"seed", std::to_string(a.seed)}, {"steps", std::to_string(a.steps)}, {"batch", std::to_string(a.batch)},
              {"lr", fmt_double(a.lr)}, {"max-qubits", std::to_string(a.max_qubits)},
              {"node-dim", std::to_string(a.node_dim)}, {"wire-dim", std::to_string(a.wire_dim)},
              {"hidden-dim", std::to_string(a.hidden_dim)}, {"rounds", std::to_string(a.rounds)}});
  validate_config(cfg);
  Dataset ds = load_dataset(a.dataset);
  if (!a.gateset.empty() && gateset_arg(a.gateset) != ds.gateset)
    throw GatesetMismatchError("dataset uses " + std::string(to_string(ds.gateset)) + " but --gateset is " +
                               a.gateset);
  cfg.on_epoch = [&](const EpochStats& e) {
    err << "epoch " << e.epoch << " total=" << e.total << " size=" << e.size << " node=" << e.node
        << " edge=" << e.edge << '\n';
  };
  Checkpoint ck = train(ds, cfg);
  save_checkpoint(ck, a.out);
  std::ofstream log = open_out(loss_log);
  log << "epoch,total,size,node,edge\n";
  for (const auto& e : ck.history)
    log << e.epoch << ',' << fmt_double(e.total) << ',' << fmt_double(e.size) << ',' << fmt_double(e.node) << ','
        << fmt_double(e.edge) << '\n';
  out << "wrote checkpoint " << a.out << " and loss log " << loss_log << '\n';
  return 0;
}

int cmd_sample(const SampleArgs& a, std::ostream& out, std::ostream& err) {
  SamplerConfig cfg;
  auto mode = parse_sampling_mode(a.mode);
  if (!mode) throw UsageError("unknown mode '" + a.mode + "' (expected wire_free or wire_head)");
  auto edge_mode = parse_edge_mode(a.edge_mode);
  if (!edge_mode) throw UsageError("unknown edge mode '" + a.edge_mode + "' (expected free or constrained)");
  cfg.mode = *mode;
  cfg.edge_mode = *edge_mode;
  cfg.max_layers = a.max_layers;
  cfg.num_qubits = a.qubits;
  cfg.seed = a.seed;
  if (!a.label.empty()) {
    auto comma = a.label.find(',');
    try {
      if (comma == std::string::npos) throw std::invalid_argument(a.label);
      cfg.fixed_label = CircuitLabel{std::stod(a.label.substr(0, comma)), std::stod(a.label.substr(comma + 1))};
    } catch (const std::exception&) {
      throw UsageError("bad label '" + a.label + "' (expected re,im)");
    }
  }
  log_config(err, "sample",
             {{"checkpoint", a.checkpoint}, {"out", a.out}, {"count", std::to_string(a.count)}, {"mode", a.mode},
              {"edge-mode", a.edge_mode}, {"qubits", std::to_string(a.qubits)}, {"seed", std::to_string(a.seed)},
              {"max-layers", std::to_string(a.max_layers)}, {"label", a.label.empty() ? "(empirical)" : a.label},
              {"gateset", a.gateset.empty() ? "(checkpoint)" : a.gateset},
              {"qasm-dir", a.qasm_dir.empty() ? "(none)" : a.qasm_dir}});
  validate_config(cfg);
  Checkpoint ck = load_checkpoint(a.checkpoint);
  if (!a.gateset.empty() && gateset_arg(a.gateset) != ck.model.gateset())
    throw GatesetMismatchError("checkpoint uses " + std::string(to_string(ck.model.gateset())) + " but --gateset is " +
                               a.gateset);
  auto items = sample_circuits(ck, cfg, a.count);
  save_samples(items, ck.model.gateset(), cfg, a.out);
  std::size_t valid = 0;
  for (const auto& item : items) valid += item.circuit ? 1 : 0;
  if (!a.qasm_dir.empty()) {
    std::filesystem::create_directories(a.qasm_dir);
    for (const auto& item : items) {
      if (!item.circuit) continue;
      char name[32];
      std::snprintf(name, sizeof name, "%06zu.qasm", item.index);
      open_out((std::filesystem::path(a.qasm_dir) / name).string()) << export_qasm(*item.circuit);
    }
  }
  out << "wrote " << items.size() << " samples (" << valid << " valid) to " << a.out << '\n';
  return 0;
}

int cmd_eval(const EvalArgs& a, std::ostream& out, std::ostream& err) {
  log_config(err, "eval",
             {{"input", a.input}, {"out", a.out.empty() ? "(stdout)" : a.out}, {"csv", a.csv.empty() ? "(none)" : a.csv},
              {"pairs", std::to_string(a.pairs)}, {"bins", std::to_string(a.bins)}, {"seed", std::to_string(a.seed)},
              {"no-expressibility", a.no_expressibility ? "true" : "false"}});
  SampleFile file = load_samples(a.input);
  EvalOptions opts;
  opts.num_pairs = a.pairs;
  opts.num_bins = a.bins;
  opts.seed = a.seed;
  opts.compute_expressibility = !a.no_expressibility;
  EvalReport report = evaluate_run(file.items, opts);
  std::string table = render_table(report);
  out << table;
  if (!a.out.empty()) open_out(a.out) << table;
  if (!a.csv.empty()) open_out(a.csv) << render_csv(report);
  return 0;
}

int cmd_export(const ExportArgs& a, std::ostream& out, std::ostream& err) {
  log_config(err, "export",
             {{"input", a.input}, {"out", a.out}, {"no-definitions", a.no_definitions ? "true" : "false"}});
  std::string header;
  {
    std::ifstream in(a.input);
    if (!in) throw Error("cannot open " + a.input);
    std::getline(in, header);
  }
  std::vector<std::pair<std::size_t, Circuit>> circuits;
  if (header.rfind("QFDS", 0) == 0) {
    Dataset ds = load_dataset(a.input);
    for (std::size_t i = 0; i < ds.records.size(); ++i) circuits.emplace_back(i, ds.records[i].circuit);
  } else if (header.rfind("QFSAMPLES", 0) == 0) {
    SampleFile file = load_samples(a.input);
    for (const auto& item : file.items)
      if (item.circuit) circuits.emplace_back(item.index, *item.circuit);
  } else {
    throw FormatError(1, "export: input is neither a dataset nor a sample file");
  }
  QasmOptions opts;
  opts.emit_definitions = !a.no_definitions;
  std::filesystem::create_directories(a.out);
  for (const auto& [index, c] : circuits) {
    char name[32];
    std::snprintf(name, sizeof name, "%06zu.qasm", index);
    open_out((std::filesystem::path(a.out) / name).string()) << export_qasm(c, opts);
  }
  out << "wrote " << circuits.size() << " OpenQASM files to " << a.out << '\n';
  return 0;
}

void report_error(std::ostream& err, const std::string& kind, const std::string& message) {
  nlohmann::json j;
  j["error"] = kind;
  j["message"] = message;
  err << j.dump() << '\n';
}

}  // namespace

int run_cli(const std::vector<std::string>& input, std::ostream& out, std::ostream& err) {
  CLI::App app{"Layer-wise discrete diffusion for quantum circuit generation", "qfusion"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key=value file with defaults for the subcommand's flags");

  GenArgs gen;
  auto* g = app.add_subcommand("gen-dataset", "Generate a labelled random-circuit dataset");
  g->add_option("--gateset", gen.gateset, "custom22 | heron_np | heron_p")->capture_default_str();
  g->add_option("--qubits", gen.qubits, "Qubit counts, e.g. 2 or 1-5 or 1,3")->capture_default_str();
  g->add_option("--gates", gen.gates, "Gates per circuit")->capture_default_str();
  g->add_option("--samples", gen.samples, "Number of circuits")->capture_default_str();
  g->add_option("--seed", gen.seed)->capture_default_str();
  g->add_option("--out", gen.out, "Dataset file")->required();

  TrainArgs tr;
  auto* t = app.add_subcommand("train", "Train a model on a dataset");
  t->add_option("--dataset", tr.dataset)->required();
  t->add_option("--out", tr.out, "Checkpoint file")->required();
  t->add_option("--loss-log", tr.loss_log, "Loss CSV (default <out>.loss.csv)");
  t->add_option("--gateset", tr.gateset, "Expected gate set of the dataset");
  t->add_option("--epochs", tr.epochs)->capture_default_str();
  t->add_option("--seed", tr.seed)->capture_default_str();
  t->add_option("--steps", tr.steps, "Diffusion steps")->capture_default_str();
  t->add_option("--batch", tr.batch)->capture_default_str();
  t->add_option("--lr", tr.lr)->capture_default_str();
  t->add_option("--max-qubits", tr.max_qubits, "Model width (0: widest circuit)")->capture_default_str();
  t->add_option("--node-dim", tr.node_dim)->capture_default_str();
  t->add_option("--wire-dim", tr.wire_dim)->capture_default_str();
  t->add_option("--hidden-dim", tr.hidden_dim)->capture_default_str();
  t->add_option("--rounds", tr.rounds, "Message-passing rounds")->capture_default_str();

  SampleArgs sa;
  auto* s = app.add_subcommand("sample", "Sample circuits from a checkpoint");
  s->add_option("--checkpoint", sa.checkpoint)->required();
  s->add_option("--out", sa.out, "Sample file")->required();
  s->add_option("--count", sa.count)->capture_default_str();
  s->add_option("--mode", sa.mode, "wire_free | wire_head")->capture_default_str();
  s->add_option("--edge-mode", sa.edge_mode, "free | constrained")->capture_default_str();
  s->add_option("--qubits", sa.qubits, "Circuit width (0: drawn with the label)")->capture_default_str();
  s->add_option("--seed", sa.seed)->capture_default_str();
  s->add_option("--max-layers", sa.max_layers)->capture_default_str();
  s->add_option("--label", sa.label, "Fixed conditioning label re,im");
  s->add_option("--gateset", sa.gateset, "Expected gate set of the checkpoint");
  s->add_option("--qasm-dir", sa.qasm_dir, "Also write one OpenQASM file per valid sample");

  EvalArgs ev;
  auto* e = app.add_subcommand("eval", "Evaluate a sample file");
  e->add_option("--input", ev.input)->required();
  e->add_option("--out", ev.out, "Text report");
  e->add_option("--csv", ev.csv, "CSV report");
  e->add_option("--pairs", ev.pairs)->capture_default_str();
  e->add_option("--bins", ev.bins)->capture_default_str();
  e->add_option("--seed", ev.seed)->capture_default_str();
  e->add_flag("--no-expressibility", ev.no_expressibility);

  ExportArgs ex;
  auto* x = app.add_subcommand("export", "Write OpenQASM 2 files from a dataset or sample file");
  x->add_option("--input", ex.input)->required();
  x->add_option("--out", ex.out, "Output directory")->required();
  x->add_flag("--no-definitions", ex.no_definitions, "Reject gates missing from qelib1.inc");

  std::vector<std::string> args;
  try {
    // Pull out --config and expand it into flags placed before the user's.
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < input.size(); ++i) {
      if (input[i] == "--config") {
        if (i + 1 >= input.size()) throw UsageError("--config needs a file");
        config_path = input[++i];
      } else if (input[i].rfind("--config=", 0) == 0) {
        config_path = input[i].substr(9);
      } else {
        rest.push_back(input[i]);
      }
    }
    std::size_t sub_at = rest.size();
    CLI::App* sub = nullptr;
    for (std::size_t i = 0; i < rest.size(); ++i) {
      if (!rest[i].empty() && rest[i][0] == '-') continue;
      sub_at = i;
      for (auto* c : {g, t, s, e, x})
        if (c->get_name() == rest[i]) sub = c;
      break;
    }
    args.assign(rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(std::min(sub_at + 1, rest.size())));
    if (!config_path.empty()) {
      if (!sub) throw UsageError("--config needs a subcommand");
      for (const auto& entry : read_config(config_path)) {
        const CLI::Option* opt = nullptr;
        for (const auto* o : sub->get_options())
          for (const auto& name : o->get_lnames())
            if (name == entry.key) opt = o;
        if (!opt || entry.key == "help")
          throw FormatError(entry.line, "config: unknown key '" + entry.key + "' for " + sub->get_name());
        args.push_back("--" + entry.key + "=" + entry.value);
      }
    }
    if (sub_at < rest.size())
      args.insert(args.end(), rest.begin() + static_cast<std::ptrdiff_t>(sub_at + 1), rest.end());

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& ex_) {
    report_error(err, "usage", ex_.what());
    return 2;
  } catch (const UsageError& ex_) {
    report_error(err, "usage", ex_.what());
    return 2;
  } catch (const FormatError& ex_) {
    report_error(err, "format", ex_.what());
    return 2;
  } catch (const Error& ex_) {
    report_error(err, "io", ex_.what());
    return 1;
  }

  try {
    if (g->parsed()) return cmd_gen_dataset(gen, out, err);
    if (t->parsed()) return cmd_train(tr, out, err);
    if (s->parsed()) return cmd_sample(sa, out, err);
    if (e->parsed()) return cmd_eval(ev, out, err);
    return cmd_export(ex, out, err);
  } catch (const UsageError& ex_) {
    report_error(err, "usage", ex_.what());
    return 2;
  } catch (const GatesetMismatchError& ex_) {
    report_error(err, "gateset_mismatch", ex_.what());
  } catch (const FormatError& ex_) {
    report_error(err, "format", ex_.what());
  } catch (const std::filesystem::filesystem_error& ex_) {
    report_error(err, "io", ex_.what());
  } catch (const Error& ex_) {
    report_error(err, "error", ex_.what());
  } catch (const std::exception& ex_) {
    report_error(err, "internal", ex_.what());
  }
  return 1;
}

}  // namespace qfusion
