#include "qfusion/checkpoint.hpp"

#include <bit>
#include <fstream>
#include <istream>
#include <ostream>

#include "qfusion/error.hpp"

namespace qfusion {

namespace {

constexpr char kMagic[4] = {'Q', 'F', 'C', 'K'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& out) : out_(out) {}
  void u32(std::uint32_t v) { bytes(v, 4); }
  void i32(std::int32_t v) { bytes(static_cast<std::uint32_t>(v), 4); }
  void u64(std::uint64_t v) { bytes(v, 8); }
  void f64(double v) { bytes(std::bit_cast<std::uint64_t>(v), 8); }
  void str(const std::string& s) {
    u32(static_cast<std::uint32_t>(s.size()));
    out_.write(s.data(), static_cast<std::streamsize>(s.size()));
  }

 private:
  void bytes(std::uint64_t v, int n) {
    char buf[8];
    for (int i = 0; i < n; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xffu);
    out_.write(buf, n);
  }
  std::ostream& out_;
};

class Reader {
 public:
  explicit Reader(std::istream& in) : in_(in) {}
  std::uint32_t u32() { return static_cast<std::uint32_t>(bytes(4)); }
  std::int32_t i32() { return static_cast<std::int32_t>(u32()); }
  std::uint64_t u64() { return bytes(8); }
  double f64() { return std::bit_cast<double>(bytes(8)); }
  std::string str() {
    std::uint32_t n = u32();
    if (n > (1u << 20)) throw FormatError(0, "checkpoint: implausible string length");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
  void read(char* dst, std::size_t n) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) throw FormatError(0, "checkpoint: truncated file");
  }

 private:
  std::uint64_t bytes(int n) {
    unsigned char buf[8];
    read(reinterpret_cast<char*>(buf), static_cast<std::size_t>(n));
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }
  std::istream& in_;
};

}  // namespace

void write_checkpoint(const Checkpoint& ck, std::ostream& out) {
  Writer w(out);
  out.write(kMagic, 4);
  w.u32(kVersion);
  w.str(std::string(to_string(ck.model.gateset())));
  const auto& c = ck.model.config();
  for (int v : {c.node_embed_dim, c.wire_embed_dim, c.message_rounds, c.hidden_dim, c.timestep_embed_dim,
                c.label_embed_dim})
    w.i32(v);
  w.i32(ck.model.max_qubits());
  const auto& keep = ck.model.schedule().keep_probabilities();
  w.u32(static_cast<std::uint32_t>(keep.size()));
  for (double k : keep) w.f64(k);
  w.u64(ck.seed);
  w.u32(static_cast<std::uint32_t>(ck.history.size()));
  for (const auto& e : ck.history) {
    w.i32(e.epoch);
    for (double v : {e.total, e.size, e.node, e.edge}) w.f64(v);
  }
  w.u32(static_cast<std::uint32_t>(ck.labels.size()));
  for (const auto& l : ck.labels) {
    w.i32(l.num_qubits);
    w.f64(l.re);
    w.f64(l.im);
  }
  auto params = ck.model.all_params();
  w.u32(static_cast<std::uint32_t>(params.size()));
  for (const auto* p : params) {
    w.str(p->name);
    w.u64(p->value.rows);
    w.u64(p->value.cols);
    for (double v : p->value.data) w.f64(v);
  }
  if (!out) throw Error("checkpoint: write failed");
}

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("checkpoint: cannot open " + path + " for writing");
  write_checkpoint(ck, out);
}

Checkpoint read_checkpoint(std::istream& in) {
  Reader r(in);
  char magic[4];
  r.read(magic, 4);
  if (!std::equal(magic, magic + 4, kMagic)) throw FormatError(0, "checkpoint: bad magic");
  if (std::uint32_t v = r.u32(); v != kVersion)
    throw FormatError(0, "checkpoint: unsupported version " + std::to_string(v));
  auto gateset = parse_gateset_id(r.str());
  if (!gateset) throw FormatError(0, "checkpoint: unknown gate set");
  EncoderConfig c;
  c.node_embed_dim = r.i32();
  c.wire_embed_dim = r.i32();
  c.message_rounds = r.i32();
  c.hidden_dim = r.i32();
  c.timestep_embed_dim = r.i32();
  c.label_embed_dim = r.i32();
  int max_qubits = r.i32();
  std::uint32_t nkeep = r.u32();
  if (nkeep < 2 || nkeep > 100000) throw FormatError(0, "checkpoint: bad schedule length");
  std::vector<double> keep(nkeep);
  for (double& k : keep) k = r.f64();

  NoiseSchedule schedule = [&] {
    try {
      return NoiseSchedule::from_keep_probabilities(keep);
    } catch (const Error& e) {
      throw FormatError(0, std::string("checkpoint: ") + e.what());
    }
  }();
  Checkpoint ck{[&] {
                  try {
                    return Model(*gateset, max_qubits, c, static_cast<int>(nkeep) - 1, 0);
                  } catch (const Error& e) {
                    throw FormatError(0, std::string("checkpoint: ") + e.what());
                  }
                }(),
                0,
                {},
                {}};
  ck.model.set_schedule(schedule);
  ck.seed = r.u64();
  std::uint32_t nhist = r.u32();
  for (std::uint32_t i = 0; i < nhist; ++i) {
    EpochStats e;
    e.epoch = r.i32();
    e.total = r.f64();
    e.size = r.f64();
    e.node = r.f64();
    e.edge = r.f64();
    ck.history.push_back(e);
  }
  std::uint32_t nlabels = r.u32();
  for (std::uint32_t i = 0; i < nlabels; ++i) {
    TrainingLabel l;
    l.num_qubits = r.i32();
    l.re = r.f64();
    l.im = r.f64();
    ck.labels.push_back(l);
  }
  auto params = ck.model.all_params();
  std::uint32_t ntensors = r.u32();
  if (ntensors != params.size()) throw FormatError(0, "checkpoint: tensor count does not match the model");
  for (std::uint32_t i = 0; i < ntensors; ++i) {
    std::string name = r.str();
    ad::Parameter* p = ck.model.find(name);
    if (!p) throw FormatError(0, "checkpoint: unknown tensor " + name);
    std::uint64_t rows = r.u64(), cols = r.u64();
    if (rows != p->value.rows || cols != p->value.cols)
      throw FormatError(0, "checkpoint: shape mismatch for tensor " + name);
    for (double& v : p->value.data) v = r.f64();
  }
  return ck;
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("checkpoint: cannot open " + path);
  return read_checkpoint(in);
}

}  // namespace qfusion
