#include "parsekit/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace parsekit::ad {

Tensor& ParameterStore::add(const std::string& name, Tensor init) {
  if (params_.count(name))
    throw std::invalid_argument("parameter already exists: " + name);
  m_[name] = Tensor::zeros(init.rows, init.cols);
  v_[name] = Tensor::zeros(init.rows, init.cols);
  return params_[name] = std::move(init);
}

Tensor& ParameterStore::add_matrix(const std::string& name, int rows, int cols,
                                   std::mt19937_64& rng) {
  return add(name, glorot_init(rows, cols, rng));
}

Tensor& ParameterStore::add_bias(const std::string& name, int rows) {
  return add(name, Tensor::zeros(rows));
}

Tensor& ParameterStore::add_embedding(const std::string& name, int rows, int cols,
                                      std::mt19937_64& rng) {
  return add(name, embedding_init(rows, cols, rng));
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("no such parameter: " + name);
  return it->second;
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw std::out_of_range("no such parameter: " + name);
  return it->second;
}

void ParameterStore::adam_step(const GradMap& grads, const AdamConfig& cfg) {
  for (const auto& [name, g] : grads) {
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("gradient for unknown parameter: " + name);
    if (!g.same_shape(it->second))
      throw std::invalid_argument("gradient shape mismatch for " + name + ": " +
                                  g.shape_str() + " vs " + it->second.shape_str());
    if (!g.all_finite())
      throw std::runtime_error("non-finite gradient for parameter: " + name);
  }
  ++step_;
  double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(step_));
  double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(step_));
  for (auto& [name, p] : params_) {
    auto git = grads.find(name);
    Tensor& m = m_[name];
    Tensor& v = v_[name];
    for (int i = 0; i < p.size(); ++i) {
      double g = git == grads.end() ? 0.0 : git->second.v[i];
      m.v[i] = cfg.beta1 * m.v[i] + (1.0 - cfg.beta1) * g;
      v.v[i] = cfg.beta2 * v.v[i] + (1.0 - cfg.beta2) * g * g;
      double mhat = m.v[i] / bc1;
      double vhat = v.v[i] / bc2;
      p.v[i] -= cfg.lr * mhat / (std::sqrt(vhat) + cfg.eps);
    }
  }
}

void ParameterStore::restore(const std::map<std::string, Tensor>& values) {
  for (const auto& [name, t] : values) {
    Tensor& p = get(name);
    check_same_shape(p, t, "restore");
    p = t;
  }
}

int Graph::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

const Graph::Node& Graph::node(Expr e) const {
  if (!e.valid() || e.idx >= static_cast<int>(nodes_.size()))
    throw std::out_of_range("invalid expression handle");
  return nodes_[e.idx];
}

Expr Graph::constant(Tensor t) {
  return {push({Op::Constant, {}, std::move(t)})};
}

Expr Graph::param(const std::string& name) {
  // One node per parameter per graph: values cannot change while the graph is
  // live (updates clear it), and re-copying large matrices per use would
  // dominate memory.
  auto it = param_nodes_.find(name);
  if (it != param_nodes_.end()) return {it->second};
  Node n{Op::Param, {}, store_->get(name)};
  n.pname = name;
  int idx = push(std::move(n));
  param_nodes_[name] = idx;
  return {idx};
}

Expr Graph::row(Expr matrix_param, int r) {
  const Node& m = node(matrix_param);
  if (r < 0 || r >= m.value.rows)
    throw std::out_of_range("row " + std::to_string(r) + " out of range for " +
                            m.value.shape_str());
  Node n{Op::Row, {matrix_param.idx}, Tensor(m.value.cols, 1)};
  n.index = r;
  for (int c = 0; c < m.value.cols; ++c) n.value.v[c] = m.value.at(r, c);
  return {push(std::move(n))};
}

Expr Graph::add(Expr a, Expr b) {
  const Tensor &ta = node(a).value, &tb = node(b).value;
  check_same_shape(ta, tb, "add");
  Node n{Op::Add, {a.idx, b.idx}, ta};
  for (int i = 0; i < tb.size(); ++i) n.value.v[i] += tb.v[i];
  return {push(std::move(n))};
}

Expr Graph::sub(Expr a, Expr b) {
  const Tensor &ta = node(a).value, &tb = node(b).value;
  check_same_shape(ta, tb, "sub");
  Node n{Op::Sub, {a.idx, b.idx}, ta};
  for (int i = 0; i < tb.size(); ++i) n.value.v[i] -= tb.v[i];
  return {push(std::move(n))};
}

Expr Graph::cmult(Expr a, Expr b) {
  const Tensor &ta = node(a).value, &tb = node(b).value;
  check_same_shape(ta, tb, "cmult");
  Node n{Op::CMult, {a.idx, b.idx}, ta};
  for (int i = 0; i < tb.size(); ++i) n.value.v[i] *= tb.v[i];
  return {push(std::move(n))};
}

Expr Graph::matvec(Expr m, Expr x) {
  const Tensor &tm = node(m).value, &tx = node(x).value;
  if (!tx.is_vector() || tm.cols != tx.rows)
    throw std::invalid_argument("matvec: shape mismatch " + tm.shape_str() + " vs " +
                                tx.shape_str());
  Node n{Op::MatVec, {m.idx, x.idx}, Tensor(tm.rows, 1)};
  for (int r = 0; r < tm.rows; ++r) {
    double s = 0.0;
    const double* mr = &tm.v[static_cast<size_t>(r) * tm.cols];
    for (int c = 0; c < tm.cols; ++c) s += mr[c] * tx.v[c];
    n.value.v[r] = s;
  }
  return {push(std::move(n))};
}

Expr Graph::concat(const std::vector<Expr>& parts) {
  if (parts.empty()) throw std::invalid_argument("concat: empty argument list");
  int total = 0;
  std::vector<int> args;
  for (Expr p : parts) {
    const Tensor& t = node(p).value;
    if (!t.is_vector())
      throw std::invalid_argument("concat: vector expected, got " + t.shape_str());
    total += t.rows;
    args.push_back(p.idx);
  }
  Node n{Op::Concat, std::move(args), Tensor(total, 1)};
  int off = 0;
  for (Expr p : parts) {
    const Tensor& t = node(p).value;
    std::copy(t.v.begin(), t.v.end(), n.value.v.begin() + off);
    off += t.rows;
  }
  return {push(std::move(n))};
}

Expr Graph::tanh(Expr a) {
  Node n{Op::Tanh, {a.idx}, node(a).value};
  for (double& x : n.value.v) x = std::tanh(x);
  return {push(std::move(n))};
}

Expr Graph::logistic(Expr a) {
  Node n{Op::Logistic, {a.idx}, node(a).value};
  for (double& x : n.value.v) x = 1.0 / (1.0 + std::exp(-x));
  return {push(std::move(n))};
}

Expr Graph::pick(Expr a, int i) {
  const Tensor& t = node(a).value;
  if (!t.is_vector() || i < 0 || i >= t.rows)
    throw std::out_of_range("pick: index " + std::to_string(i) + " out of range for " +
                            t.shape_str());
  Node n{Op::Pick, {a.idx}, Tensor::from({t.v[i]})};
  n.index = i;
  return {push(std::move(n))};
}

Expr Graph::slice(Expr a, int begin, int len) {
  const Tensor& t = node(a).value;
  if (!t.is_vector() || begin < 0 || len <= 0 || begin + len > t.rows)
    throw std::out_of_range("slice: [" + std::to_string(begin) + "," +
                            std::to_string(begin + len) + ") out of range for " +
                            t.shape_str());
  Node n{Op::Slice, {a.idx}, Tensor(len, 1)};
  n.index = begin;
  n.len = len;
  std::copy(t.v.begin() + begin, t.v.begin() + begin + len, n.value.v.begin());
  return {push(std::move(n))};
}

Expr Graph::col_slice(Expr m, int begin, int len) {
  const Tensor& t = node(m).value;
  if (begin < 0 || len <= 0 || begin + len > t.cols)
    throw std::out_of_range("col_slice: [" + std::to_string(begin) + "," +
                            std::to_string(begin + len) + ") out of range for " +
                            t.shape_str());
  Node n{Op::ColSlice, {m.idx}, Tensor(t.rows, len)};
  n.index = begin;
  n.len = len;
  for (int r = 0; r < t.rows; ++r)
    for (int c = 0; c < len; ++c) n.value.at(r, c) = t.at(r, begin + c);
  return {push(std::move(n))};
}

Expr Graph::max_over(Expr a, const std::vector<int>& indices) {
  const Tensor& t = node(a).value;
  if (indices.empty()) throw std::invalid_argument("max_over: empty index set");
  int best = -1;
  for (int i : indices) {
    if (!t.is_vector() || i < 0 || i >= t.rows)
      throw std::out_of_range("max_over: index " + std::to_string(i) +
                              " out of range for " + t.shape_str());
    if (best < 0 || t.v[i] > t.v[best]) best = i;
  }
  Node n{Op::MaxOver, {a.idx}, Tensor::from({t.v[best]})};
  n.index = best;
  n.indices = indices;
  return {push(std::move(n))};
}

Expr Graph::scalar_add(Expr a, double c) {
  Node n{Op::ScalarAdd, {a.idx}, node(a).value};
  n.scalar = c;
  for (double& x : n.value.v) x += c;
  return {push(std::move(n))};
}

Expr Graph::scalar_mul(Expr a, double c) {
  Node n{Op::ScalarMul, {a.idx}, node(a).value};
  n.scalar = c;
  for (double& x : n.value.v) x *= c;
  return {push(std::move(n))};
}

Expr Graph::sum_elems(Expr a) {
  const Tensor& t = node(a).value;
  double s = 0.0;
  for (double x : t.v) s += x;
  return {push({Op::SumElems, {a.idx}, Tensor::from({s})})};
}

Expr Graph::add_all(const std::vector<Expr>& parts) {
  if (parts.empty()) throw std::invalid_argument("add_all: empty argument list");
  Expr acc = parts[0];
  for (size_t i = 1; i < parts.size(); ++i) acc = add(acc, parts[i]);
  return acc;
}

Expr Graph::rectify(Expr x) {
  if (!node(x).value.is_scalar())
    throw std::invalid_argument("rectify: scalar expected, got " + node(x).value.shape_str());
  return max_over(concat({scalar(0.0), x}), {0, 1});
}

const Tensor& Graph::value(Expr e) const { return node(e).value; }

double Graph::scalar_value(Expr e) const {
  const Tensor& t = node(e).value;
  if (!t.is_scalar())
    throw std::invalid_argument("scalar_value: node has shape " + t.shape_str());
  return t.v[0];
}

GradMap Graph::backward(Expr loss) const {
  const Node& ln = node(loss);
  if (!ln.value.is_scalar())
    throw std::invalid_argument("backward: loss must be scalar, got " +
                                ln.value.shape_str());

  std::vector<Tensor> grad(nodes_.size());
  for (size_t i = 0; i < nodes_.size(); ++i)
    grad[i] = Tensor::zeros(nodes_[i].value.rows, nodes_[i].value.cols);
  grad[loss.idx].v[0] = 1.0;

  for (int i = loss.idx; i >= 0; --i) {
    const Node& n = nodes_[i];
    const Tensor& g = grad[i];
    switch (n.op) {
      case Op::Constant:
      case Op::Param:
        break;
      case Op::Row: {
        Tensor& gm = grad[n.args[0]];
        for (int c = 0; c < gm.cols; ++c) gm.at(n.index, c) += g.v[c];
        break;
      }
      case Op::Add:
        for (int k = 0; k < g.size(); ++k) {
          grad[n.args[0]].v[k] += g.v[k];
          grad[n.args[1]].v[k] += g.v[k];
        }
        break;
      case Op::Sub:
        for (int k = 0; k < g.size(); ++k) {
          grad[n.args[0]].v[k] += g.v[k];
          grad[n.args[1]].v[k] -= g.v[k];
        }
        break;
      case Op::CMult: {
        const Tensor &a = nodes_[n.args[0]].value, &b = nodes_[n.args[1]].value;
        for (int k = 0; k < g.size(); ++k) {
          grad[n.args[0]].v[k] += g.v[k] * b.v[k];
          grad[n.args[1]].v[k] += g.v[k] * a.v[k];
        }
        break;
      }
      case Op::MatVec: {
        const Tensor& m = nodes_[n.args[0]].value;
        const Tensor& x = nodes_[n.args[1]].value;
        Tensor& gm = grad[n.args[0]];
        Tensor& gx = grad[n.args[1]];
        for (int r = 0; r < m.rows; ++r) {
          double gr = g.v[r];
          if (gr == 0.0) continue;
          double* gmr = &gm.v[static_cast<size_t>(r) * m.cols];
          const double* mr = &m.v[static_cast<size_t>(r) * m.cols];
          for (int c = 0; c < m.cols; ++c) {
            gmr[c] += gr * x.v[c];
            gx.v[c] += gr * mr[c];
          }
        }
        break;
      }
      case Op::Concat: {
        int off = 0;
        for (int a : n.args) {
          Tensor& ga = grad[a];
          for (int k = 0; k < ga.rows; ++k) ga.v[k] += g.v[off + k];
          off += ga.rows;
        }
        break;
      }
      case Op::Tanh:
        for (int k = 0; k < g.size(); ++k)
          grad[n.args[0]].v[k] += g.v[k] * (1.0 - n.value.v[k] * n.value.v[k]);
        break;
      case Op::Logistic:
        for (int k = 0; k < g.size(); ++k)
          grad[n.args[0]].v[k] += g.v[k] * n.value.v[k] * (1.0 - n.value.v[k]);
        break;
      case Op::Pick:
        grad[n.args[0]].v[n.index] += g.v[0];
        break;
      case Op::Slice:
        for (int k = 0; k < n.len; ++k) grad[n.args[0]].v[n.index + k] += g.v[k];
        break;
      case Op::ColSlice: {
        Tensor& gm = grad[n.args[0]];
        for (int r = 0; r < n.value.rows; ++r)
          for (int c = 0; c < n.len; ++c) gm.at(r, n.index + c) += g.at(r, c);
        break;
      }
      case Op::MaxOver:
        grad[n.args[0]].v[n.index] += g.v[0];
        break;
      case Op::ScalarAdd:
        for (int k = 0; k < g.size(); ++k) grad[n.args[0]].v[k] += g.v[k];
        break;
      case Op::ScalarMul:
        for (int k = 0; k < g.size(); ++k) grad[n.args[0]].v[k] += g.v[k] * n.scalar;
        break;
      case Op::SumElems:
        for (double& gk : grad[n.args[0]].v) gk += g.v[0];
        break;
    }
  }

  GradMap out;
  for (const auto& [name, p] : store_->all()) out[name] = Tensor::zeros(p.rows, p.cols);
  for (size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].op != Op::Param) continue;
    Tensor& acc = out[nodes_[i].pname];
    for (int k = 0; k < acc.size(); ++k) acc.v[k] += grad[i].v[k];
  }
  return out;
}

}  // namespace parsekit::ad
