#pragma once

#include <cstddef>
#include <deque>
#include <functional>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cmnet/autodiff/parameter.hpp"
#include "cmnet/autodiff/tensor.hpp"

namespace cmnet::ad {

enum class OpKind {
  kConstant,
  kParameter,
  kMatMul,
  kMatMulT,
  kAdd,
  kSub,
  kScale,
  kConcat,
  kMul,
  kSigmoid,
  kTanh,
  kSoftmax,
  kLogSumExp,
  kMean,
  kSum,
  kSlice,
  kReshape,
  kEmbeddingLookup,
  kMaxOverTime,
  kDropout,
  kWindow3,
  kCrfNll,
  kGradScale,
};

std::string_view op_name(OpKind kind);

class Tape;

// Handle to a node on a tape. Cheap to copy; valid while the tape lives.
class Var {
 public:
  Var() = default;

  const Tensor& value() const;
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
  Tape& tape() const { return *tape_; }
  std::size_t id() const noexcept { return id_; }
  bool valid() const noexcept { return tape_ != nullptr; }

 private:
  friend class Tape;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

// Define-by-run record of one computation. Nodes are appended in
// topological order; backward() walks them in reverse, once.
class Tape {
 public:
  using Backprop = std::function<void(Tape&, std::size_t)>;

  // With record_gradients == false the tape only evaluates values.
  explicit Tape(bool record_gradients = true) : recording_(record_gradients) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Tensor value);
  // The same Parameter always maps to the same node on a tape.
  Var parameter(const Parameter& param);

  Var record(OpKind kind, std::vector<Var> inputs, Tensor value, Backprop backprop);

  const Tensor& value(std::size_t id) const { return nodes_[id].value; }
  // Zero-initialised on first access.
  Tensor& adjoint(std::size_t id);
  bool needs_grad(std::size_t id) const { return nodes_[id].needs_grad; }
  std::size_t input(std::size_t id, std::size_t k) const { return nodes_[id].inputs[k]; }
  OpKind kind(std::size_t id) const { return nodes_[id].kind; }

  bool recording() const noexcept { return recording_; }
  std::size_t size() const noexcept { return nodes_.size(); }

  // Seeds d(seed)/d(seed) = 1 and propagates adjoints. Returns a gradient
  // for every trainable parameter in `store`; parameters the seed does not
  // reach get zeros. A tape may be differentiated only once.
  Gradients backward(Var seed, const ParameterStore& store);

 private:
  struct Node {
    OpKind kind;
    std::vector<std::size_t> inputs;
    Tensor value;
    Tensor adjoint;
    bool needs_grad = false;
    const Parameter* param = nullptr;
    Backprop backprop;
  };

  std::deque<Node> nodes_;
  std::unordered_map<const Parameter*, std::size_t> param_nodes_;
  bool recording_;
  bool consumed_ = false;
};

// Differentiable operations. All operands must live on the same tape.
Var matmul(Var a, Var b);    // a·b
Var matmul_t(Var a, Var b);  // a·bᵀ
// Same shapes, or b a single row broadcast over the rows of a.
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double factor);
Var concat(const std::vector<Var>& parts, std::size_t axis);
Var mul(Var a, Var b);
Var sigmoid(Var a);
Var tanh(Var a);
Var softmax(Var a, std::size_t axis);
Var log_sum_exp(Var a, std::size_t axis);
Var mean(Var a, std::size_t axis);
Var sum(Var a);
Var slice(Var a, std::size_t axis, std::size_t start, std::size_t length);
Var reshape(Var a, std::size_t rows, std::size_t cols);
Var embedding_lookup(Var table, const std::vector<std::size_t>& ids);
// Column-wise max over consecutive row segments; one output row per segment.
// An empty `segments` treats the whole input as one segment.
Var max_over_time(Var a, const std::vector<std::size_t>& segments = {});
// Multiplies by a fixed (already rescaled) mask.
Var dropout(Var a, const Tensor& mask);
// Row t becomes [a(t-1), a(t), a(t+1)] with zero rows beyond either end.
Var window3(Var a);
// Identity forward; scales the adjoint by `factor` on the way back.
// Used to plant faulty gradients in negative-control tests.
Var grad_scale(Var a, double factor);

// Backward over `seed`'s tape.
Gradients backward(Var seed, const ParameterStore& store);

}  // namespace cmnet::ad
