#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qfusion::ad {

/// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0) : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  std::span<double> row(std::size_t r) { return {data.data() + r * cols, cols}; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols, cols}; }

  bool operator==(const Matrix&) const = default;
};

/// C (+)= A * B
void gemm(const Matrix& a, const Matrix& b, Matrix& c, bool accumulate = false);

struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;

  Parameter() = default;
  Parameter(std::string n, Matrix v) : name(std::move(n)), value(std::move(v)), grad(value.rows, value.cols) {}
  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

struct Var {
  std::size_t id = 0;
};

/// Reverse-mode tape over matrix operations. Build the forward graph with the
/// op methods, then call backward() once on a 1x1 result; gradients are
/// accumulated into the bound Parameters.
class Tape {
 public:
  Var constant(Matrix value);
  Var parameter(Parameter& p);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  /// a + broadcast of 1 x cols row vector.
  Var add_row(Var a, Var row);
  Var tanh(Var a);
  Var scale(Var a, double s);
  /// out.row(i) = a.row(index[i]), or zeros when index[i] < 0.
  Var gather_rows(Var a, std::vector<int> index);
  /// out.row(index[i]) += a.row(i) for index[i] >= 0; out has `rows` rows.
  Var scatter_add_rows(Var a, std::vector<int> index, std::size_t rows);
  /// Row r multiplied by factors[r].
  Var scale_rows(Var a, std::vector<double> factors);
  Var concat_cols(const std::vector<Var>& parts);
  /// Mean over rows with target >= 0 of -log softmax(row)[target]; 1 x 1.
  /// Rows with target < 0 are ignored. Zero when no row counts.
  Var cross_entropy(Var logits, std::vector<int> targets);

  const Matrix& value(Var v) const {
    const Node& n = nodes_[v.id];
    return n.param ? n.param->value : n.value;
  }
  double scalar(Var v) const { return value(v).data.at(0); }
  std::size_t size() const { return nodes_.size(); }

  void backward(Var root);

 private:
  // Parameter nodes read and write the Parameter's own value and grad.
  struct Node {
    Matrix value;
    Matrix grad;
    Parameter* param = nullptr;
    std::function<void()> backward;
  };

  Var push(Matrix value);
  Matrix& grad(std::size_t id);

  std::vector<Node> nodes_;
};

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Parameter*> params, AdamConfig config = {});

  void step();
  void zero_grad();
  long steps() const { return t_; }

 private:
  std::vector<Parameter*> params_;
  AdamConfig config_;
  std::vector<Matrix> m_, v_;
  long t_ = 0;
};

}  // namespace qfusion::ad
