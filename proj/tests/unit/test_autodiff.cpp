#include <cmath>

#include "cmnet/autodiff/grad_check.hpp"
#include "cmnet/autodiff/tape.hpp"
#include "cmnet/errors.hpp"
#include "doctest.h"
#include "support.hpp"

using namespace cmnet;
using ad::Tensor;
using ad::Var;

namespace {

// Contracts op(inputs) with a fixed random weight so every output entry
// reaches the scalar loss, then compares backward() to central differences.
double op_gradient_error(const std::vector<Tensor>& inputs, const std::function<Var(std::vector<Var>&)>& op,
                         std::uint64_t seed = 11) {
  ad::ParameterStore store;
  for (std::size_t i = 0; i < inputs.size(); ++i) store.add("x" + std::to_string(i), inputs[i]);
  Tensor weight;
  {
    ad::Tape probe(false);
    std::vector<Var> xs;
    for (std::size_t i = 0; i < inputs.size(); ++i) xs.push_back(probe.parameter(store.get("x" + std::to_string(i))));
    const auto& out = op(xs).value();
    Rng rng(seed);
    weight = testing::random_tensor(out.rows(), out.cols(), rng);
  }
  auto build = [&](ad::Tape& tape) {
    std::vector<Var> xs;
    for (std::size_t i = 0; i < inputs.size(); ++i) xs.push_back(tape.parameter(store.get("x" + std::to_string(i))));
    return ad::sum(ad::mul(op(xs), tape.constant(weight)));
  };
  return ad::grad_check(build, store, 1e-6).max_rel_error;
}

Tensor rnd(std::size_t r, std::size_t c, std::uint64_t seed) {
  Rng rng(seed);
  return testing::random_tensor(r, c, rng);
}

}  // namespace

TEST_SUITE("tensor") {
  TEST_CASE("zero-sized and high-rank shapes are rejected") {
    CHECK_THROWS_AS(Tensor({0, 3}), DimensionError);
    CHECK_THROWS_AS(Tensor({2, 2, 2}), DimensionError);
    CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0, 3.0}), DimensionError);
  }

  TEST_CASE("rank-1 tensors read as one row") {
    Tensor t({3}, {1, 2, 3});
    CHECK(t.rows() == 1);
    CHECK(t.cols() == 3);
    CHECK(t(0, 2) == 3.0);
  }

  TEST_CASE("item needs exactly one element") {
    CHECK(Tensor::scalar(2.5).item() == 2.5);
    CHECK_THROWS_AS(Tensor::zeros(1, 2).item(), ContractError);
  }

  TEST_CASE("reshape keeps data and checks size") {
    auto t = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
    t.reshape({3, 2});
    CHECK(t(2, 1) == 6.0);
    CHECK_THROWS_AS(t.reshape({4, 2}), DimensionError);
  }
}

TEST_SUITE("tape forward values") {
  TEST_CASE("matmul and matmul_t by hand") {
    ad::Tape tape;
    auto a = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
    auto b = tape.constant(Tensor::matrix({{5, 6}, {7, 8}}));
    CHECK(ad::matmul(a, b).value() == Tensor::matrix({{19, 22}, {43, 50}}));
    CHECK(ad::matmul_t(a, b).value() == Tensor::matrix({{17, 23}, {39, 53}}));
    CHECK_THROWS_AS(ad::matmul(a, tape.constant(Tensor::zeros(3, 2))), DimensionError);
  }

  TEST_CASE("add broadcasts a single row") {
    ad::Tape tape;
    auto a = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
    auto b = tape.constant(Tensor::row({10, 20}));
    CHECK(ad::add(a, b).value() == Tensor::matrix({{11, 22}, {13, 24}}));
    CHECK_THROWS_AS(ad::add(a, tape.constant(Tensor::row({1, 2, 3}))), DimensionError);
  }

  TEST_CASE("sigmoid and tanh stay finite at extreme inputs") {
    ad::Tape tape;
    auto x = tape.constant(Tensor::row({-1000.0, 0.0, 1000.0}));
    const auto& s = ad::sigmoid(x).value();
    CHECK(s[0] == 0.0);
    CHECK(s[1] == 0.5);
    CHECK(s[2] == 1.0);
    const auto& t = ad::tanh(x).value();
    CHECK(t[0] == -1.0);
    CHECK(t[2] == 1.0);
  }

  TEST_CASE("softmax rows are simplices even for huge logits") {
    ad::Tape tape;
    auto x = tape.constant(Tensor::matrix({{1000.0, 1000.0}, {-5.0, 5.0}}));
    const auto& s = ad::softmax(x, 1).value();
    CHECK(s(0, 0) == doctest::Approx(0.5));
    CHECK(s(1, 0) + s(1, 1) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(s(1, 1) == doctest::Approx(1.0 / (1.0 + std::exp(-10.0))));
    const auto& c = ad::softmax(x, 0).value();
    CHECK(c(0, 0) == doctest::Approx(1.0));
  }

  TEST_CASE("log_sum_exp along both axes") {
    ad::Tape tape;
    auto x = tape.constant(Tensor::matrix({{0.0, std::log(3.0)}, {1000.0, 1000.0}}));
    const auto& rows = ad::log_sum_exp(x, 1).value();
    CHECK(rows.rows() == 2);
    CHECK(rows[0] == doctest::Approx(std::log(4.0)));
    CHECK(rows[1] == doctest::Approx(1000.0 + std::log(2.0)));
    const auto& cols = ad::log_sum_exp(x, 0).value();
    CHECK(cols.cols() == 2);
    CHECK(cols[0] == doctest::Approx(1000.0));
  }

  TEST_CASE("window3 pads with zeros at both ends") {
    ad::Tape tape;
    auto x = tape.constant(Tensor::matrix({{1, 2}, {3, 4}, {5, 6}}));
    CHECK(ad::window3(x).value() == Tensor::matrix({{0, 0, 1, 2, 3, 4}, {1, 2, 3, 4, 5, 6}, {3, 4, 5, 6, 0, 0}}));
  }

  TEST_CASE("max_over_time per segment") {
    ad::Tape tape;
    auto x = tape.constant(Tensor::matrix({{1, 9}, {4, 2}, {7, 0}, {3, 3}}));
    CHECK(ad::max_over_time(x, {3, 1}).value() == Tensor::matrix({{7, 9}, {3, 3}}));
    CHECK(ad::max_over_time(x).value() == Tensor::matrix({{7, 9}}));
    CHECK_THROWS_AS(ad::max_over_time(x, {2, 1}), DimensionError);
  }

  TEST_CASE("embedding_lookup copies rows and checks ids") {
    ad::Tape tape;
    auto table = tape.constant(Tensor::matrix({{1, 2}, {3, 4}, {5, 6}}));
    CHECK(ad::embedding_lookup(table, {2, 0, 2}).value() == Tensor::matrix({{5, 6}, {1, 2}, {5, 6}}));
    CHECK_THROWS_AS(ad::embedding_lookup(table, {3}), DimensionError);
  }

  TEST_CASE("concat, slice and reshape") {
    ad::Tape tape;
    auto a = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
    auto b = tape.constant(Tensor::matrix({{5}, {6}}));
    auto c = ad::concat({a, b}, 1);
    CHECK(c.value() == Tensor::matrix({{1, 2, 5}, {3, 4, 6}}));
    CHECK(ad::slice(c, 1, 1, 2).value() == Tensor::matrix({{2, 5}, {4, 6}}));
    CHECK(ad::slice(c, 0, 1, 1).value() == Tensor::matrix({{3, 4, 6}}));
    CHECK(ad::reshape(c, 3, 2).value() == Tensor::matrix({{1, 2}, {5, 3}, {4, 6}}));
    CHECK_THROWS_AS(ad::slice(c, 1, 2, 2), DimensionError);
    CHECK_THROWS_AS(ad::concat({a, b}, 0), DimensionError);
  }
}

TEST_SUITE("tape gradients against finite differences") {
  TEST_CASE("binary operations") {
    CHECK(op_gradient_error({rnd(3, 4, 1), rnd(4, 2, 2)}, [](auto& x) { return ad::matmul(x[0], x[1]); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 1), rnd(2, 4, 2)}, [](auto& x) { return ad::matmul_t(x[0], x[1]); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 1), rnd(3, 4, 2)}, [](auto& x) { return ad::add(x[0], x[1]); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 1), rnd(1, 4, 2)}, [](auto& x) { return ad::add(x[0], x[1]); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 1), rnd(3, 4, 2)}, [](auto& x) { return ad::sub(x[0], x[1]); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 1), rnd(3, 4, 2)}, [](auto& x) { return ad::mul(x[0], x[1]); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 1)}, [](auto& x) { return ad::mul(x[0], x[0]); }) < 1e-8);
  }

  TEST_CASE("elementwise and reductions") {
    CHECK(op_gradient_error({rnd(3, 4, 3)}, [](auto& x) { return ad::scale(x[0], -2.5); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 3)}, [](auto& x) { return ad::sigmoid(x[0]); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 3)}, [](auto& x) { return ad::tanh(x[0]); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 3)}, [](auto& x) { return ad::softmax(x[0], 1); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 3)}, [](auto& x) { return ad::softmax(x[0], 0); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 3)}, [](auto& x) { return ad::log_sum_exp(x[0], 1); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 3)}, [](auto& x) { return ad::log_sum_exp(x[0], 0); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 3)}, [](auto& x) { return ad::mean(x[0], 0); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 3)}, [](auto& x) { return ad::mean(x[0], 1); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 3)}, [](auto& x) { return ad::sum(x[0]); }) < 1e-8);
  }

  TEST_CASE("structural operations") {
    CHECK(op_gradient_error({rnd(3, 4, 4), rnd(3, 2, 5)}, [](auto& x) { return ad::concat({x[0], x[1]}, 1); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 4), rnd(2, 4, 5)}, [](auto& x) { return ad::concat({x[0], x[1]}, 0); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 4)}, [](auto& x) { return ad::slice(x[0], 1, 1, 2); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 4)}, [](auto& x) { return ad::slice(x[0], 0, 1, 2); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 4)}, [](auto& x) { return ad::reshape(x[0], 2, 6); }) < 1e-8);
    CHECK(op_gradient_error({rnd(3, 4, 4)}, [](auto& x) { return ad::window3(x[0]); }) < 1e-8);
    CHECK(op_gradient_error({rnd(5, 3, 4)}, [](auto& x) { return ad::embedding_lookup(x[0], {4, 0, 4, 2}); }) < 1e-8);
    CHECK(op_gradient_error({rnd(5, 3, 4)}, [](auto& x) { return ad::max_over_time(x[0], {2, 3}); }) < 1e-8);
  }

  TEST_CASE("dropout multiplies by its fixed mask") {
    Tensor mask = Tensor::matrix({{2, 0}, {0, 2}});
    CHECK(op_gradient_error({rnd(2, 2, 6)}, [&](auto& x) { return ad::dropout(x[0], mask); }) < 1e-8);
    ad::Tape tape;
    auto y = ad::dropout(tape.constant(Tensor::matrix({{1, 2}, {3, 4}})), mask);
    CHECK(y.value() == Tensor::matrix({{2, 0}, {0, 8}}));
  }

  TEST_CASE("grad_scale is the identity forward and scales backward") {
    ad::ParameterStore store;
    auto& p = store.add("x", Tensor::row({1.0, -2.0}));
    ad::Tape tape;
    auto x = tape.parameter(p);
    auto y = ad::grad_scale(x, 3.0);
    CHECK(y.value() == x.value());
    auto g = tape.backward(ad::sum(y), store);
    CHECK(g.at("x") == Tensor::row({3.0, 3.0}));
  }
}

TEST_SUITE("backward contract") {
  TEST_CASE("a reused parameter accumulates both paths") {
    ad::ParameterStore store;
    auto& p = store.add("x", Tensor::row({1.5, -2.0}));
    ad::Tape tape;
    auto x = tape.parameter(p);
    CHECK(tape.parameter(p).id() == x.id());
    auto g = tape.backward(ad::sum(ad::mul(x, x)), store);
    CHECK(g.at("x") == Tensor::row({3.0, -4.0}));
  }

  TEST_CASE("frozen parameters receive no gradient") {
    ad::ParameterStore store;
    store.add("frozen", Tensor::row({1.0}), false);
    store.add("w", Tensor::row({2.0}));
    ad::Tape tape;
    auto y = ad::mul(tape.parameter(store.get("frozen")), tape.parameter(store.get("w")));
    auto g = tape.backward(ad::sum(y), store);
    CHECK(g.count("frozen") == 0);
    CHECK(g.at("w")[0] == 1.0);
  }

  TEST_CASE("unreached parameters get zeros") {
    ad::ParameterStore store;
    store.add("used", Tensor::row({1.0}));
    store.add("unused", Tensor::row({1.0, 2.0}));
    ad::Tape tape;
    auto g = tape.backward(ad::sum(tape.parameter(store.get("used"))), store);
    CHECK(g.at("unused") == Tensor::row({0.0, 0.0}));
  }

  TEST_CASE("second backward, non-scalar seed and forward-only tapes are rejected") {
    ad::ParameterStore store;
    store.add("x", Tensor::row({1.0, 2.0}));
    ad::Tape tape;
    auto x = tape.parameter(store.get("x"));
    CHECK_THROWS_AS(tape.backward(x, store), ContractError);
    auto s = ad::sum(x);
    tape.backward(s, store);
    CHECK_THROWS_AS(tape.backward(s, store), ContractError);

    ad::Tape eval(false);
    auto e = ad::sum(eval.parameter(store.get("x")));
    CHECK(e.value().item() == 3.0);
    CHECK_THROWS_AS(eval.backward(e, store), ContractError);
  }

  TEST_CASE("operands from different tapes are rejected") {
    ad::Tape a, b;
    auto x = a.constant(Tensor::row({1.0}));
    auto y = b.constant(Tensor::row({1.0}));
    CHECK_THROWS_AS(ad::add(x, y), ContractError);
    CHECK_THROWS_AS(Var{}.value(), ContractError);
  }

  TEST_CASE("duplicate parameter names are rejected") {
    ad::ParameterStore store;
    store.add("w", Tensor::row({1.0}));
    CHECK_THROWS_AS(store.add("w", Tensor::row({1.0})), ContractError);
    CHECK_THROWS_AS(store.get("missing"), ContractError);
  }
}

TEST_SUITE("grad_check") {
  TEST_CASE("detects a nondeterministic builder") {
    ad::ParameterStore store;
    store.add("x", Tensor::row({1.0}));
    int calls = 0;
    auto build = [&](ad::Tape& tape) {
      ++calls;
      return ad::scale(ad::sum(tape.parameter(store.get("x"))), static_cast<double>(calls));
    };
    CHECK_THROWS_AS(ad::grad_check(build, store, 1e-5), DeterminismError);
  }

  TEST_CASE("flags a planted gradient error") {
    ad::ParameterStore store;
    store.add("x", Tensor::row({0.3, -0.7}));
    auto build = [&](ad::Tape& tape) {
      return ad::sum(ad::grad_scale(ad::tanh(tape.parameter(store.get("x"))), 1.5));
    };
    auto report = ad::grad_check(build, store, 1e-5);
    CHECK(report.max_rel_error == doctest::Approx(0.2).epsilon(1e-6));
  }

  TEST_CASE("relative error definition") {
    CHECK(ad::relative_error(1.0, 1.0) == 0.0);
    CHECK(ad::relative_error(1.0, 3.0) == doctest::Approx(0.5));
    CHECK(ad::relative_error(0.0, 0.0) == 0.0);
    CHECK(ad::relative_error(1e-9, 0.0) == doctest::Approx(0.1));
  }
}
