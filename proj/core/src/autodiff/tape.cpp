#include "cmnet/autodiff/tape.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmnet/errors.hpp"

namespace cmnet::ad {

namespace {

[[noreturn]] void dimension_error(OpKind kind, const Tensor& a, const Tensor& b) {
  throw DimensionError(std::string(op_name(kind)) + ": incompatible shapes " +
                       shape_string(a.shape()) + " and " + shape_string(b.shape()));
}

void same_tape(OpKind kind, Var a, Var b) {
  if (!a.valid() || !b.valid() || &a.tape() != &b.tape()) {
    throw ContractError(std::string(op_name(kind)) + ": operands on different tapes");
  }
}

// C(m×n) += A(m×k)·B(k×n)
void gemm_nn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    double* ci = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      const double* bp = b + p * n;
      for (std::size_t j = 0; j < n; ++j) ci[j] += aip * bp[j];
    }
  }
}

// C(m×n) += A(m×k)·B(n×k)ᵀ
void gemm_nt(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* ai = a + i * k;
    for (std::size_t j = 0; j < n; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (std::size_t p = 0; p < k; ++p) acc += ai[p] * bj[p];
      c[i * n + j] += acc;
    }
  }
}

// C(k×n) += A(m×k)ᵀ·B(m×n)
void gemm_tn(std::size_t m, std::size_t k, std::size_t n, const double* a, const double* b,
             double* c) {
  for (std::size_t i = 0; i < m; ++i) {
    const double* bi = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = a[i * k + p];
      if (aip == 0.0) continue;
      double* cp = c + p * n;
      for (std::size_t j = 0; j < n; ++j) cp[j] += aip * bi[j];
    }
  }
}

template <typename Fn>
Var unary(OpKind kind, Var a, Fn f, Tape::Backprop backprop) {
  const Tensor& x = a.value();
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = f(x[i]);
  return a.tape().record(kind, {a}, std::move(y), std::move(backprop));
}

double stable_sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

}  // namespace

std::string_view op_name(OpKind kind) {
  switch (kind) {
    case OpKind::kConstant: return "constant";
    case OpKind::kParameter: return "parameter";
    case OpKind::kMatMul: return "matmul";
    case OpKind::kMatMulT: return "matmul_t";
    case OpKind::kAdd: return "add";
    case OpKind::kSub: return "sub";
    case OpKind::kScale: return "scale";
    case OpKind::kConcat: return "concat";
    case OpKind::kMul: return "elementwise-mul";
    case OpKind::kSigmoid: return "sigmoid";
    case OpKind::kTanh: return "tanh";
    case OpKind::kSoftmax: return "softmax";
    case OpKind::kLogSumExp: return "log-sum-exp";
    case OpKind::kMean: return "mean";
    case OpKind::kSum: return "sum";
    case OpKind::kSlice: return "slice";
    case OpKind::kReshape: return "reshape";
    case OpKind::kEmbeddingLookup: return "embedding-lookup";
    case OpKind::kMaxOverTime: return "max-over-time";
    case OpKind::kDropout: return "dropout";
    case OpKind::kWindow3: return "window3";
    case OpKind::kCrfNll: return "crf-nll";
    case OpKind::kGradScale: return "grad-scale";
  }
  return "unknown";
}

const Tensor& Var::value() const {
  if (!tape_) throw ContractError("use of an empty Var");
  return tape_->value(id_);
}

Var Tape::constant(Tensor value) {
  nodes_.push_back(Node{OpKind::kConstant, {}, std::move(value), {}, false, nullptr, {}});
  return Var(this, nodes_.size() - 1);
}

Var Tape::parameter(const Parameter& param) {
  if (auto it = param_nodes_.find(&param); it != param_nodes_.end()) return Var(this, it->second);
  nodes_.push_back(
      Node{OpKind::kParameter, {}, param.value, {}, recording_ && param.trainable, &param, {}});
  param_nodes_.emplace(&param, nodes_.size() - 1);
  return Var(this, nodes_.size() - 1);
}

Var Tape::record(OpKind kind, std::vector<Var> inputs, Tensor value, Backprop backprop) {
  Node node{kind, {}, std::move(value), {}, false, nullptr, {}};
  node.inputs.reserve(inputs.size());
  for (const auto& v : inputs) {
    if (&v.tape() != this) throw ContractError(std::string(op_name(kind)) + ": foreign operand");
    node.inputs.push_back(v.id());
    node.needs_grad = node.needs_grad || nodes_[v.id()].needs_grad;
  }
  node.needs_grad = node.needs_grad && recording_;
  if (node.needs_grad) node.backprop = std::move(backprop);
  nodes_.push_back(std::move(node));
  return Var(this, nodes_.size() - 1);
}

Tensor& Tape::adjoint(std::size_t id) {
  auto& node = nodes_[id];
  if (node.adjoint.empty()) node.adjoint = Tensor(node.value.shape());
  return node.adjoint;
}

Gradients Tape::backward(Var seed, const ParameterStore& store) {
  if (&seed.tape() != this) throw ContractError("backward: seed belongs to another tape");
  if (seed.value().size() != 1) {
    throw ContractError("backward: seed must be scalar, got " + shape_string(seed.value().shape()));
  }
  if (consumed_) throw ContractError("backward: tape already differentiated");
  if (!recording_) throw ContractError("backward: tape was built without gradient recording");
  consumed_ = true;

  adjoint(seed.id())[0] = 1.0;
  for (std::size_t id = seed.id() + 1; id-- > 0;) {
    auto& node = nodes_[id];
    if (!node.needs_grad || node.adjoint.empty() || !node.backprop) continue;
    node.backprop(*this, id);
  }

  Gradients grads = zero_gradients(store);
  for (const auto& [param, id] : param_nodes_) {
    if (!param->trainable) continue;
    auto it = grads.find(param->name);
    if (it == grads.end() || nodes_[id].adjoint.empty()) continue;
    if (store.find(param->name) != param) continue;
    it->second = nodes_[id].adjoint;
  }
  return grads;
}

Gradients backward(Var seed, const ParameterStore& store) {
  return seed.tape().backward(seed, store);
}

Var matmul(Var a, Var b) {
  same_tape(OpKind::kMatMul, a, b);
  const Tensor& x = a.value();
  const Tensor& w = b.value();
  if (x.cols() != w.rows()) dimension_error(OpKind::kMatMul, x, w);
  const std::size_t m = x.rows(), k = x.cols(), n = w.cols();
  Tensor y = Tensor::zeros(m, n);
  gemm_nn(m, k, n, x.data().data(), w.data().data(), y.data().data());
  return a.tape().record(OpKind::kMatMul, {a, b}, std::move(y), [m, k, n](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0), ib = t.input(self, 1);
    const double* dy = t.adjoint(self).data().data();
    if (t.needs_grad(ia)) gemm_nt(m, n, k, dy, t.value(ib).data().data(), t.adjoint(ia).data().data());
    if (t.needs_grad(ib)) gemm_tn(m, k, n, t.value(ia).data().data(), dy, t.adjoint(ib).data().data());
  });
}

Var matmul_t(Var a, Var b) {
  same_tape(OpKind::kMatMulT, a, b);
  const Tensor& x = a.value();
  const Tensor& w = b.value();
  if (x.cols() != w.cols()) dimension_error(OpKind::kMatMulT, x, w);
  const std::size_t m = x.rows(), k = x.cols(), n = w.rows();
  Tensor y = Tensor::zeros(m, n);
  gemm_nt(m, k, n, x.data().data(), w.data().data(), y.data().data());
  return a.tape().record(OpKind::kMatMulT, {a, b}, std::move(y), [m, k, n](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0), ib = t.input(self, 1);
    const double* dy = t.adjoint(self).data().data();
    // y = x·wᵀ: dx = dy·w, dw = dyᵀ·x
    if (t.needs_grad(ia)) gemm_nn(m, n, k, dy, t.value(ib).data().data(), t.adjoint(ia).data().data());
    if (t.needs_grad(ib)) gemm_tn(m, n, k, dy, t.value(ia).data().data(), t.adjoint(ib).data().data());
  });
}

Var add(Var a, Var b) {
  same_tape(OpKind::kAdd, a, b);
  const Tensor& x = a.value();
  const Tensor& z = b.value();
  const bool broadcast = x.shape() != z.shape();
  if (broadcast && !(z.rows() == 1 && z.cols() == x.cols())) dimension_error(OpKind::kAdd, x, z);
  Tensor y = x;
  const std::size_t cols = x.cols();
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += broadcast ? z[i % cols] : z[i];
  return a.tape().record(OpKind::kAdd, {a, b}, std::move(y), [broadcast, cols](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0), ib = t.input(self, 1);
    const Tensor& dy = t.adjoint(self);
    if (t.needs_grad(ia)) {
      auto& dx = t.adjoint(ia);
      for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
    }
    if (t.needs_grad(ib)) {
      auto& dz = t.adjoint(ib);
      for (std::size_t i = 0; i < dy.size(); ++i) dz[broadcast ? i % cols : i] += dy[i];
    }
  });
}

Var sub(Var a, Var b) {
  same_tape(OpKind::kSub, a, b);
  const Tensor& x = a.value();
  const Tensor& z = b.value();
  if (x.shape() != z.shape()) dimension_error(OpKind::kSub, x, z);
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] -= z[i];
  return a.tape().record(OpKind::kSub, {a, b}, std::move(y), [](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0), ib = t.input(self, 1);
    const Tensor& dy = t.adjoint(self);
    if (t.needs_grad(ia)) {
      auto& dx = t.adjoint(ia);
      for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
    }
    if (t.needs_grad(ib)) {
      auto& dz = t.adjoint(ib);
      for (std::size_t i = 0; i < dy.size(); ++i) dz[i] -= dy[i];
    }
  });
}

Var scale(Var a, double factor) {
  return unary(OpKind::kScale, a, [factor](double v) { return v * factor; },
               [factor](Tape& t, std::size_t self) {
                 const auto ia = t.input(self, 0);
                 const Tensor& dy = t.adjoint(self);
                 auto& dx = t.adjoint(ia);
                 for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += factor * dy[i];
               });
}

Var concat(const std::vector<Var>& parts, std::size_t axis) {
  if (parts.empty()) throw ContractError("concat: no operands");
  if (axis > 1) throw ContractError("concat: axis must be 0 or 1");
  const Tensor& first = parts.front().value();
  std::size_t rows = 0, cols = 0;
  for (const auto& p : parts) {
    same_tape(OpKind::kConcat, parts.front(), p);
    const Tensor& v = p.value();
    if (axis == 0) {
      if (v.cols() != first.cols()) dimension_error(OpKind::kConcat, first, v);
      rows += v.rows();
      cols = v.cols();
    } else {
      if (v.rows() != first.rows()) dimension_error(OpKind::kConcat, first, v);
      cols += v.cols();
      rows = v.rows();
    }
  }
  Tensor y = Tensor::zeros(rows, cols);
  std::vector<std::size_t> offsets;
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const Tensor& v = p.value();
    offsets.push_back(offset);
    if (axis == 0) {
      std::copy(v.data().begin(), v.data().end(), y.data().begin() + offset * cols);
      offset += v.rows();
    } else {
      for (std::size_t r = 0; r < rows; ++r) {
        auto src = v.row_span(r);
        std::copy(src.begin(), src.end(), y.data().begin() + r * cols + offset);
      }
      offset += v.cols();
    }
  }
  return parts.front().tape().record(
      OpKind::kConcat, parts, std::move(y), [axis, offsets, cols](Tape& t, std::size_t self) {
        const Tensor& dy = t.adjoint(self);
        for (std::size_t k = 0; k < offsets.size(); ++k) {
          const auto in = t.input(self, k);
          if (!t.needs_grad(in)) continue;
          auto& dx = t.adjoint(in);
          if (axis == 0) {
            const double* src = dy.data().data() + offsets[k] * cols;
            for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += src[i];
          } else {
            const std::size_t w = dx.cols();
            for (std::size_t r = 0; r < dx.rows(); ++r) {
              for (std::size_t c = 0; c < w; ++c) dx(r, c) += dy(r, offsets[k] + c);
            }
          }
        }
      });
}

Var mul(Var a, Var b) {
  same_tape(OpKind::kMul, a, b);
  const Tensor& x = a.value();
  const Tensor& z = b.value();
  if (x.shape() != z.shape()) dimension_error(OpKind::kMul, x, z);
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= z[i];
  return a.tape().record(OpKind::kMul, {a, b}, std::move(y), [](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0), ib = t.input(self, 1);
    const Tensor& dy = t.adjoint(self);
    if (t.needs_grad(ia)) {
      auto& dx = t.adjoint(ia);
      const auto& zb = t.value(ib);
      for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * zb[i];
    }
    if (t.needs_grad(ib)) {
      auto& dz = t.adjoint(ib);
      const auto& xa = t.value(ia);
      for (std::size_t i = 0; i < dy.size(); ++i) dz[i] += dy[i] * xa[i];
    }
  });
}

Var sigmoid(Var a) {
  return unary(OpKind::kSigmoid, a, stable_sigmoid, [](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const Tensor& y = t.value(self);
    const Tensor& dy = t.adjoint(self);
    auto& dx = t.adjoint(ia);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * y[i] * (1.0 - y[i]);
  });
}

Var tanh(Var a) {
  return unary(OpKind::kTanh, a, [](double v) { return std::tanh(v); }, [](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const Tensor& y = t.value(self);
    const Tensor& dy = t.adjoint(self);
    auto& dx = t.adjoint(ia);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * (1.0 - y[i] * y[i]);
  });
}

Var softmax(Var a, std::size_t axis) {
  if (axis > 1) throw ContractError("softmax: axis must be 0 or 1");
  const Tensor& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  // Slices run along `axis`: axis 1 normalises each row, axis 0 each column.
  const std::size_t count = axis == 1 ? rows : cols;
  const std::size_t len = axis == 1 ? cols : rows;
  auto at = [=](std::size_t s, std::size_t k) { return axis == 1 ? s * cols + k : k * cols + s; };
  Tensor y(x.shape());
  for (std::size_t s = 0; s < count; ++s) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < len; ++k) mx = std::max(mx, x[at(s, k)]);
    double total = 0.0;
    for (std::size_t k = 0; k < len; ++k) {
      const double e = std::exp(x[at(s, k)] - mx);
      y[at(s, k)] = e;
      total += e;
    }
    for (std::size_t k = 0; k < len; ++k) y[at(s, k)] /= total;
  }
  return a.tape().record(OpKind::kSoftmax, {a}, std::move(y), [count, len, at](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const Tensor& y = t.value(self);
    const Tensor& dy = t.adjoint(self);
    auto& dx = t.adjoint(ia);
    for (std::size_t s = 0; s < count; ++s) {
      double dot = 0.0;
      for (std::size_t k = 0; k < len; ++k) dot += dy[at(s, k)] * y[at(s, k)];
      for (std::size_t k = 0; k < len; ++k) dx[at(s, k)] += y[at(s, k)] * (dy[at(s, k)] - dot);
    }
  });
}

Var log_sum_exp(Var a, std::size_t axis) {
  if (axis > 1) throw ContractError("log-sum-exp: axis must be 0 or 1");
  const Tensor& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  const std::size_t count = axis == 1 ? rows : cols;
  const std::size_t len = axis == 1 ? cols : rows;
  auto at = [=](std::size_t s, std::size_t k) { return axis == 1 ? s * cols + k : k * cols + s; };
  Tensor y = axis == 1 ? Tensor::zeros(rows, 1) : Tensor::zeros(1, cols);
  for (std::size_t s = 0; s < count; ++s) {
    double mx = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < len; ++k) mx = std::max(mx, x[at(s, k)]);
    double total = 0.0;
    for (std::size_t k = 0; k < len; ++k) total += std::exp(x[at(s, k)] - mx);
    y[s] = mx + std::log(total);
  }
  return a.tape().record(OpKind::kLogSumExp, {a}, std::move(y), [count, len, at](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const Tensor& x = t.value(ia);
    const Tensor& y = t.value(self);
    const Tensor& dy = t.adjoint(self);
    auto& dx = t.adjoint(ia);
    for (std::size_t s = 0; s < count; ++s) {
      for (std::size_t k = 0; k < len; ++k) dx[at(s, k)] += dy[s] * std::exp(x[at(s, k)] - y[s]);
    }
  });
}

Var mean(Var a, std::size_t axis) {
  if (axis > 1) throw ContractError("mean: axis must be 0 or 1");
  const Tensor& x = a.value();
  const std::size_t rows = x.rows(), cols = x.cols();
  Tensor y = axis == 0 ? Tensor::zeros(1, cols) : Tensor::zeros(rows, 1);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) y[axis == 0 ? c : r] += x(r, c);
  }
  const double n = static_cast<double>(axis == 0 ? rows : cols);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] /= n;
  return a.tape().record(OpKind::kMean, {a}, std::move(y), [axis, rows, cols, n](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const Tensor& dy = t.adjoint(self);
    auto& dx = t.adjoint(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) dx(r, c) += dy[axis == 0 ? c : r] / n;
    }
  });
}

Var sum(Var a) {
  const Tensor& x = a.value();
  double total = 0.0;
  for (double v : x.data()) total += v;
  return a.tape().record(OpKind::kSum, {a}, Tensor::scalar(total), [](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const double g = t.adjoint(self)[0];
    auto& dx = t.adjoint(ia);
    for (std::size_t i = 0; i < dx.size(); ++i) dx[i] += g;
  });
}

Var slice(Var a, std::size_t axis, std::size_t start, std::size_t length) {
  if (axis > 1) throw ContractError("slice: axis must be 0 or 1");
  const Tensor& x = a.value();
  const std::size_t extent = axis == 0 ? x.rows() : x.cols();
  if (length == 0 || start + length > extent) {
    throw DimensionError("slice: range [" + std::to_string(start) + ", " +
                         std::to_string(start + length) + ") outside " + shape_string(x.shape()) +
                         " on axis " + std::to_string(axis));
  }
  const std::size_t rows = axis == 0 ? length : x.rows();
  const std::size_t cols = axis == 1 ? length : x.cols();
  Tensor y = Tensor::zeros(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      y(r, c) = axis == 0 ? x(start + r, c) : x(r, start + c);
    }
  }
  return a.tape().record(OpKind::kSlice, {a}, std::move(y), [axis, start, rows, cols](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const Tensor& dy = t.adjoint(self);
    auto& dx = t.adjoint(ia);
    for (std::size_t r = 0; r < rows; ++r) {
      for (std::size_t c = 0; c < cols; ++c) {
        (axis == 0 ? dx(start + r, c) : dx(r, start + c)) += dy(r, c);
      }
    }
  });
}

Var reshape(Var a, std::size_t rows, std::size_t cols) {
  Tensor y = a.value();
  y.reshape({rows, cols});
  return a.tape().record(OpKind::kReshape, {a}, std::move(y), [](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const Tensor& dy = t.adjoint(self);
    auto& dx = t.adjoint(ia);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i];
  });
}

Var embedding_lookup(Var table, const std::vector<std::size_t>& ids) {
  const Tensor& w = table.value();
  if (ids.empty()) throw ContractError("embedding-lookup: no ids");
  const std::size_t cols = w.cols();
  Tensor y = Tensor::zeros(ids.size(), cols);
  for (std::size_t r = 0; r < ids.size(); ++r) {
    if (ids[r] >= w.rows()) {
      throw DimensionError("embedding-lookup: id " + std::to_string(ids[r]) + " outside table " +
                           shape_string(w.shape()));
    }
    auto src = w.row_span(ids[r]);
    std::copy(src.begin(), src.end(), y.row_span(r).begin());
  }
  return table.tape().record(OpKind::kEmbeddingLookup, {table}, std::move(y),
                             [ids, cols](Tape& t, std::size_t self) {
                               const auto ia = t.input(self, 0);
                               const Tensor& dy = t.adjoint(self);
                               auto& dw = t.adjoint(ia);
                               for (std::size_t r = 0; r < ids.size(); ++r) {
                                 for (std::size_t c = 0; c < cols; ++c) dw(ids[r], c) += dy(r, c);
                               }
                             });
}

Var max_over_time(Var a, const std::vector<std::size_t>& segments) {
  const Tensor& x = a.value();
  std::vector<std::size_t> segs = segments.empty() ? std::vector<std::size_t>{x.rows()} : segments;
  std::size_t total = 0;
  for (auto s : segs) {
    if (s == 0) throw ContractError("max-over-time: empty segment");
    total += s;
  }
  if (total != x.rows()) {
    throw DimensionError("max-over-time: segments cover " + std::to_string(total) + " rows of " +
                         shape_string(x.shape()));
  }
  const std::size_t cols = x.cols();
  Tensor y = Tensor::zeros(segs.size(), cols);
  std::vector<std::size_t> argmax(segs.size() * cols);
  std::size_t begin = 0;
  for (std::size_t s = 0; s < segs.size(); ++s) {
    for (std::size_t c = 0; c < cols; ++c) {
      std::size_t best = begin;
      for (std::size_t r = begin + 1; r < begin + segs[s]; ++r) {
        if (x(r, c) > x(best, c)) best = r;
      }
      argmax[s * cols + c] = best;
      y(s, c) = x(best, c);
    }
    begin += segs[s];
  }
  return a.tape().record(OpKind::kMaxOverTime, {a}, std::move(y),
                         [argmax = std::move(argmax), cols](Tape& t, std::size_t self) {
                           const auto ia = t.input(self, 0);
                           const Tensor& dy = t.adjoint(self);
                           auto& dx = t.adjoint(ia);
                           for (std::size_t i = 0; i < argmax.size(); ++i) {
                             dx(argmax[i], i % cols) += dy[i];
                           }
                         });
}

Var dropout(Var a, const Tensor& mask) {
  const Tensor& x = a.value();
  if (x.shape() != mask.shape()) dimension_error(OpKind::kDropout, x, mask);
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
  return a.tape().record(OpKind::kDropout, {a}, std::move(y), [mask](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const Tensor& dy = t.adjoint(self);
    auto& dx = t.adjoint(ia);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += dy[i] * mask[i];
  });
}

Var window3(Var a) {
  const Tensor& x = a.value();
  const std::size_t n = x.rows(), d = x.cols();
  Tensor y = Tensor::zeros(n, 3 * d);
  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t k = 0; k < 3; ++k) {
      if ((k == 0 && t == 0) || (k == 2 && t + 1 == n)) continue;
      auto src = x.row_span(t + k - 1);
      std::copy(src.begin(), src.end(), y.row_span(t).begin() + k * d);
    }
  }
  return a.tape().record(OpKind::kWindow3, {a}, std::move(y), [n, d](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const Tensor& dy = t.adjoint(self);
    auto& dx = t.adjoint(ia);
    for (std::size_t r = 0; r < n; ++r) {
      for (std::size_t k = 0; k < 3; ++k) {
        if ((k == 0 && r == 0) || (k == 2 && r + 1 == n)) continue;
        for (std::size_t c = 0; c < d; ++c) dx(r + k - 1, c) += dy(r, k * d + c);
      }
    }
  });
}

Var grad_scale(Var a, double factor) {
  return unary(OpKind::kGradScale, a, [](double v) { return v; }, [factor](Tape& t, std::size_t self) {
    const auto ia = t.input(self, 0);
    const Tensor& dy = t.adjoint(self);
    auto& dx = t.adjoint(ia);
    for (std::size_t i = 0; i < dy.size(); ++i) dx[i] += factor * dy[i];
  });
}

}  // namespace cmnet::ad
