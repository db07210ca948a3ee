#pragma once

#include <cmath>
#include <cstddef>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace parsekit {

// Dense rank<=2 tensor of doubles, row-major. cols == 1 means vector.
struct Tensor {
  int rows = 0;
  int cols = 1;
  std::vector<double> v;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), v(static_cast<size_t>(r) * c, 0.0) {
    if (r <= 0 || c <= 0)
      throw std::invalid_argument("tensor dims must be positive: " + shape_str());
  }

  static Tensor zeros(int r, int c = 1) { return Tensor(r, c); }

  static Tensor from(std::vector<double> vals) {
    Tensor t;
    t.rows = static_cast<int>(vals.size());
    t.cols = 1;
    t.v = std::move(vals);
    return t;
  }

  int size() const { return rows * cols; }
  bool is_vector() const { return cols == 1; }
  bool is_scalar() const { return rows == 1 && cols == 1; }

  double& at(int r, int c = 0) { return v[static_cast<size_t>(r) * cols + c]; }
  double at(int r, int c = 0) const { return v[static_cast<size_t>(r) * cols + c]; }

  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }

  bool all_finite() const {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  }

  std::string shape_str() const {
    return "(" + std::to_string(rows) + "x" + std::to_string(cols) + ")";
  }
};

inline void check_same_shape(const Tensor& a, const Tensor& b, const char* op) {
  if (!a.same_shape(b))
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
}

// Glorot-uniform for weight matrices, uniform(-0.1, 0.1) for embeddings.
inline Tensor glorot_init(int rows, int cols, std::mt19937_64& rng) {
  Tensor t(rows, cols);
  double bound = std::sqrt(6.0 / (rows + cols));
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& x : t.v) x = dist(rng);
  return t;
}

inline Tensor embedding_init(int rows, int cols, std::mt19937_64& rng) {
  Tensor t(rows, cols);
  std::uniform_real_distribution<double> dist(-0.1, 0.1);
  for (double& x : t.v) x = dist(rng);
  return t;
}

}  // namespace parsekit
