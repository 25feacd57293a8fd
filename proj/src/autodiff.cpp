#include "qfusion/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace qfusion::ad {
namespace {

void require(bool ok, const char* what) {
  if (!ok) throw std::invalid_argument(what);
}

// dA += dC * B^T
void gemm_nt_acc(const Matrix& dc, const Matrix& b, Matrix& da) {
  for (std::size_t i = 0; i < dc.rows; ++i) {
    const double* g = dc.data.data() + i * dc.cols;
    double* out = da.data.data() + i * da.cols;
    for (std::size_t k = 0; k < b.rows; ++k) {
      const double* brow = b.data.data() + k * b.cols;
      double acc = 0.0;
      for (std::size_t j = 0; j < b.cols; ++j) acc += g[j] * brow[j];
      out[k] += acc;
    }
  }
}

// dB += A^T * dC
void gemm_tn_acc(const Matrix& a, const Matrix& dc, Matrix& db) {
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + i * a.cols;
    const double* g = dc.data.data() + i * dc.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double s = arow[k];
      if (s == 0.0) continue;
      double* out = db.data.data() + k * db.cols;
      for (std::size_t j = 0; j < dc.cols; ++j) out[j] += s * g[j];
    }
  }
}

}  // namespace

void gemm(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate) {
  require(a.cols == b.rows, "gemm: inner dimensions differ");
  if (!accumulate) c = Matrix(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + i * a.cols;
    double* out = c.data.data() + i * c.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double s = arow[k];
      if (s == 0.0) continue;
      const double* brow = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) out[j] += s * brow[j];
    }
  }
}

Var Tape::push(Matrix value) {
  nodes_.push_back({std::move(value), {}, nullptr, {}});
  return {nodes_.size() - 1};
}

Matrix& Tape::grad(std::size_t id) {
  Node& n = nodes_[id];
  if (n.param) return n.param->grad;
  if (n.grad.data.size() != n.value.data.size()) n.grad = Matrix(n.value.rows, n.value.cols);
  return n.grad;
}

Var Tape::constant(Matrix value) { return push(std::move(value)); }

Var Tape::parameter(Parameter& p) {
  Var v = push(Matrix());
  nodes_[v.id].param = &p;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  Matrix out;
  gemm(value(a), value(b), out);
  Var v = push(std::move(out));
  nodes_[v.id].backward = [this, a, b, v] {
    const Matrix& g = nodes_[v.id].grad;
    gemm_nt_acc(g, value(b), grad(a.id));
    gemm_tn_acc(value(a), g, grad(b.id));
  };
  return v;
}

Var Tape::add(Var a, Var b) {
  require(value(a).rows == value(b).rows && value(a).cols == value(b).cols, "add: shape mismatch");
  Matrix out = value(a);
  const Matrix& bv = value(b);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += bv.data[i];
  Var v = push(std::move(out));
  nodes_[v.id].backward = [this, a, b, v] {
    const Matrix& g = nodes_[v.id].grad;
    Matrix& ga = grad(a.id);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
    Matrix& gb = grad(b.id);
    for (std::size_t i = 0; i < g.data.size(); ++i) gb.data[i] += g.data[i];
  };
  return v;
}

Var Tape::sub(Var a, Var b) {
  require(value(a).rows == value(b).rows && value(a).cols == value(b).cols, "sub: shape mismatch");
  Matrix out = value(a);
  const Matrix& bv = value(b);
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] -= bv.data[i];
  Var v = push(std::move(out));
  nodes_[v.id].backward = [this, a, b, v] {
    const Matrix& g = nodes_[v.id].grad;
    Matrix& ga = grad(a.id);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
    Matrix& gb = grad(b.id);
    for (std::size_t i = 0; i < g.data.size(); ++i) gb.data[i] -= g.data[i];
  };
  return v;
}

Var Tape::add_row(Var a, Var row) {
  require(value(row).rows == 1 && value(row).cols == value(a).cols, "add_row: shape mismatch");
  Matrix out = value(a);
  const Matrix& r = value(row);
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (std::size_t j = 0; j < out.cols; ++j) out(i, j) += r.data[j];
  }
  Var v = push(std::move(out));
  nodes_[v.id].backward = [this, a, row, v] {
    const Matrix& g = nodes_[v.id].grad;
    Matrix& ga = grad(a.id);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i];
    Matrix& gr = grad(row.id);
    for (std::size_t i = 0; i < g.rows; ++i) {
      for (std::size_t j = 0; j < g.cols; ++j) gr.data[j] += g(i, j);
    }
  };
  return v;
}

Var Tape::tanh(Var a) {
  Matrix out = value(a);
  for (double& x : out.data) x = std::tanh(x);
  Var v = push(std::move(out));
  nodes_[v.id].backward = [this, a, v] {
    const Matrix& g = nodes_[v.id].grad;
    const Matrix& y = nodes_[v.id].value;
    Matrix& ga = grad(a.id);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += g.data[i] * (1.0 - y.data[i] * y.data[i]);
  };
  return v;
}

Var Tape::scale(Var a, double s) {
  Matrix out = value(a);
  for (double& x : out.data) x *= s;
  Var v = push(std::move(out));
  nodes_[v.id].backward = [this, a, v, s] {
    const Matrix& g = nodes_[v.id].grad;
    Matrix& ga = grad(a.id);
    for (std::size_t i = 0; i < g.data.size(); ++i) ga.data[i] += s * g.data[i];
  };
  return v;
}

Var Tape::gather_rows(Var a, std::vector<int> index) {
  const Matrix& src = value(a);
  Matrix out(index.size(), src.cols);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0) continue;
    require(static_cast<std::size_t>(index[i]) < src.rows, "gather_rows: index out of range");
    std::copy_n(src.data.begin() + static_cast<long>(static_cast<std::size_t>(index[i]) * src.cols), src.cols,
                out.data.begin() + static_cast<long>(i * src.cols));
  }
  Var v = push(std::move(out));
  nodes_[v.id].backward = [this, a, v, index = std::move(index)] {
    const Matrix& g = nodes_[v.id].grad;
    Matrix& ga = grad(a.id);
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] < 0) continue;
      double* dst = ga.data.data() + static_cast<std::size_t>(index[i]) * ga.cols;
      const double* src_g = g.data.data() + i * g.cols;
      for (std::size_t j = 0; j < g.cols; ++j) dst[j] += src_g[j];
    }
  };
  return v;
}

Var Tape::scatter_add_rows(Var a, std::vector<int> index, std::size_t rows) {
  const Matrix& src = value(a);
  require(index.size() == src.rows, "scatter_add_rows: one index per row");
  Matrix out(rows, src.cols);
  for (std::size_t i = 0; i < index.size(); ++i) {
    if (index[i] < 0) continue;
    require(static_cast<std::size_t>(index[i]) < rows, "scatter_add_rows: index out of range");
    double* dst = out.data.data() + static_cast<std::size_t>(index[i]) * out.cols;
    const double* s = src.data.data() + i * src.cols;
    for (std::size_t j = 0; j < src.cols; ++j) dst[j] += s[j];
  }
  Var v = push(std::move(out));
  nodes_[v.id].backward = [this, a, v, index = std::move(index)] {
    const Matrix& g = nodes_[v.id].grad;
    Matrix& ga = grad(a.id);
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] < 0) continue;
      const double* src_g = g.data.data() + static_cast<std::size_t>(index[i]) * g.cols;
      double* dst = ga.data.data() + i * ga.cols;
      for (std::size_t j = 0; j < g.cols; ++j) dst[j] += src_g[j];
    }
  };
  return v;
}

Var Tape::scale_rows(Var a, std::vector<double> factors) {
  Matrix out = value(a);
  require(factors.size() == out.rows, "scale_rows: one factor per row");
  for (std::size_t i = 0; i < out.rows; ++i) {
    for (double& x : out.row(i)) x *= factors[i];
  }
  Var v = push(std::move(out));
  nodes_[v.id].backward = [this, a, v, factors = std::move(factors)] {
    const Matrix& g = nodes_[v.id].grad;
    Matrix& ga = grad(a.id);
    for (std::size_t i = 0; i < g.rows; ++i) {
      for (std::size_t j = 0; j < g.cols; ++j) ga(i, j) += factors[i] * g(i, j);
    }
  };
  return v;
}

Var Tape::concat_cols(const std::vector<Var>& parts) {
  require(!parts.empty(), "concat_cols: no inputs");
  const std::size_t rows = value(parts[0]).rows;
  std::size_t cols = 0;
  for (Var p : parts) {
    require(value(p).rows == rows, "concat_cols: row mismatch");
    cols += value(p).cols;
  }
  Matrix out(rows, cols);
  std::size_t offset = 0;
  for (Var p : parts) {
    const Matrix& m = value(p);
    for (std::size_t i = 0; i < rows; ++i) {
      std::copy(m.row(i).begin(), m.row(i).end(), out.row(i).begin() + static_cast<long>(offset));
    }
    offset += m.cols;
  }
  Var v = push(std::move(out));
  nodes_[v.id].backward = [this, parts, v] {
    const Matrix& g = nodes_[v.id].grad;
    std::size_t off = 0;
    for (Var p : parts) {
      Matrix& gp = grad(p.id);
      for (std::size_t i = 0; i < g.rows; ++i) {
        for (std::size_t j = 0; j < gp.cols; ++j) gp(i, j) += g(i, off + j);
      }
      off += gp.cols;
    }
  };
  return v;
}

Var Tape::cross_entropy(Var logits, std::vector<int> targets) {
  const Matrix& x = value(logits);
  require(targets.size() == x.rows, "cross_entropy: one target per row");
  Matrix probs(x.rows, x.cols);
  double total = 0.0;
  std::size_t counted = 0;
  for (std::size_t i = 0; i < x.rows; ++i) {
    if (targets[i] < 0) continue;
    require(static_cast<std::size_t>(targets[i]) < x.cols, "cross_entropy: target out of range");
    const auto r = x.row(i);
    const double hi = *std::max_element(r.begin(), r.end());
    double z = 0.0;
    for (std::size_t j = 0; j < x.cols; ++j) {
      probs(i, j) = std::exp(r[j] - hi);
      z += probs(i, j);
    }
    for (std::size_t j = 0; j < x.cols; ++j) probs(i, j) /= z;
    total += hi + std::log(z) - r[static_cast<std::size_t>(targets[i])];
    ++counted;
  }
  const double scale = counted > 0 ? 1.0 / static_cast<double>(counted) : 0.0;
  Var v = push(Matrix(1, 1, total * scale));
  nodes_[v.id].backward = [this, logits, v, scale, targets = std::move(targets), probs = std::move(probs)] {
    const double g = nodes_[v.id].grad.data[0] * scale;
    Matrix& gl = grad(logits.id);
    for (std::size_t i = 0; i < probs.rows; ++i) {
      if (targets[i] < 0) continue;
      for (std::size_t j = 0; j < probs.cols; ++j) {
        gl(i, j) += g * (probs(i, j) - (static_cast<int>(j) == targets[i] ? 1.0 : 0.0));
      }
    }
  };
  return v;
}

void Tape::backward(Var root) {
  require(value(root).data.size() == 1, "backward: root must be 1 x 1");
  grad(root.id).data[0] = 1.0;
  for (std::size_t id = root.id + 1; id-- > 0;) {
    Node& n = nodes_[id];
    if (n.param || n.grad.data.empty()) continue;
    if (n.backward) n.backward();
  }
}

Adam::Adam(std::vector<Parameter*> params, AdamConfig config) : params_(std::move(params)), config_(config) {
  for (Parameter* p : params_) {
    m_.emplace_back(p->value.rows, p->value.cols);
    v_.emplace_back(p->value.rows, p->value.cols);
  }
}

void Adam::step() {
  ++t_;
  const double c1 = 1.0 - std::pow(config_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(config_.beta2, static_cast<double>(t_));
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Parameter& p = *params_[k];
    for (std::size_t i = 0; i < p.value.data.size(); ++i) {
      const double g = p.grad.data[i];
      double& m = m_[k].data[i];
      double& v = v_[k].data[i];
      m = config_.beta1 * m + (1.0 - config_.beta1) * g;
      v = config_.beta2 * v + (1.0 - config_.beta2) * g * g;
      p.value.data[i] -= config_.learning_rate * (m / c1) / (std::sqrt(v / c2) + config_.epsilon);
    }
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

}  // namespace qfusion::ad
