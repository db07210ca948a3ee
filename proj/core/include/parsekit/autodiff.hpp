#pragma once

#include <map>
#include <random>
#include <string>
#include <vector>

#include "parsekit/tensor.hpp"

namespace parsekit::ad {

using GradMap = std::map<std::string, Tensor>;

struct AdamConfig {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// All trainable tensors plus per-parameter Adam moments.
class ParameterStore {
 public:
  Tensor& add(const std::string& name, Tensor init);
  Tensor& add_matrix(const std::string& name, int rows, int cols, std::mt19937_64& rng);
  Tensor& add_bias(const std::string& name, int rows);
  Tensor& add_embedding(const std::string& name, int rows, int cols, std::mt19937_64& rng);

  bool has(const std::string& name) const { return params_.count(name) > 0; }
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;

  // Adam update over every parameter; missing grads are treated as zero.
  void adam_step(const GradMap& grads, const AdamConfig& cfg = {});

  long step() const { return step_; }
  const std::map<std::string, Tensor>& all() const { return params_; }
  std::map<std::string, Tensor> snapshot() const { return params_; }
  void restore(const std::map<std::string, Tensor>& values);

 private:
  std::map<std::string, Tensor> params_;
  std::map<std::string, Tensor> m_, v_;
  long step_ = 0;
};

enum class Op {
  Constant,
  Param,
  Row,        // row of a parameter matrix, as a vector (embedding lookup)
  Add,
  Sub,
  CMult,      // elementwise product
  MatVec,
  Concat,
  Tanh,
  Logistic,
  Pick,       // single element of a vector -> scalar
  Slice,      // contiguous sub-vector
  ColSlice,   // contiguous column block of a matrix
  MaxOver,    // max over a subset of vector indices -> scalar; ties to lowest index
  ScalarAdd,
  ScalarMul,
  SumElems,
};

struct Expr {
  int idx = -1;
  bool valid() const { return idx >= 0; }
};

// Eagerly-evaluated expression graph over one training stream. Parameter
// values are read at node-creation time; backward() returns gradients keyed
// by parameter name, zero-filled for parameters the loss does not reach.
class Graph {
 public:
  explicit Graph(const ParameterStore& store) : store_(&store) {}

  Expr constant(Tensor t);
  Expr scalar(double x) { return constant(Tensor::from({x})); }
  Expr param(const std::string& name);
  Expr row(Expr matrix_param, int r);
  Expr add(Expr a, Expr b);
  Expr sub(Expr a, Expr b);
  Expr cmult(Expr a, Expr b);
  Expr matvec(Expr m, Expr x);
  Expr concat(const std::vector<Expr>& parts);
  Expr tanh(Expr a);
  Expr logistic(Expr a);
  Expr pick(Expr a, int i);
  Expr slice(Expr a, int begin, int len);
  Expr col_slice(Expr m, int begin, int len);
  Expr max_over(Expr a, const std::vector<int>& indices);
  Expr scalar_add(Expr a, double c);
  Expr scalar_mul(Expr a, double c);
  Expr sum_elems(Expr a);

  // Left fold with add; parts must be non-empty and shape-congruent.
  Expr add_all(const std::vector<Expr>& parts);

  // max(0, x) for scalar x.
  Expr rectify(Expr x);

  const Tensor& value(Expr e) const;
  double scalar_value(Expr e) const;

  // Reverse-mode gradients of a scalar loss with respect to every parameter.
  GradMap backward(Expr loss) const;

  void clear() {
    nodes_.clear();
    param_nodes_.clear();
  }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Op op;
    std::vector<int> args;
    Tensor value;
    std::string pname;          // Param / Row
    int index = 0;              // Pick / Row / Slice begin / ColSlice begin
    int len = 0;                // Slice / ColSlice
    std::vector<int> indices;   // MaxOver
    double scalar = 0.0;        // ScalarAdd / ScalarMul
  };

  int push(Node n);
  const Node& node(Expr e) const;

  std::vector<Node> nodes_;
  std::map<std::string, int> param_nodes_;
  const ParameterStore* store_;
};

}  // namespace parsekit::ad
