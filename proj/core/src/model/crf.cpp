#include "cmnet/model/crf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "cmnet/errors.hpp"

namespace cmnet::model {

namespace {

double log_add(double a, double b) {
  if (a == -std::numeric_limits<double>::infinity()) return b;
  if (b == -std::numeric_limits<double>::infinity()) return a;
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// alpha(t, j): log-sum of all prefixes ending in tag j at t (emission included).
ad::Tensor forward_scores(const ad::Tensor& p, const ad::Tensor& a, CrfShape s) {
  const std::size_t n = p.rows(), k = s.tags;
  ad::Tensor alpha = ad::Tensor::zeros(n, k);
  for (std::size_t j = 0; j < k; ++j) alpha(0, j) = a(s.bos(), j) + p(0, j);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      double acc = -std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < k; ++i) acc = log_add(acc, alpha(t - 1, i) + a(i, j));
      alpha(t, j) = acc + p(t, j);
    }
  }
  return alpha;
}

// beta(t, i): log-sum of all suffixes after tag i at t, end transition included.
ad::Tensor backward_scores(const ad::Tensor& p, const ad::Tensor& a, CrfShape s) {
  const std::size_t n = p.rows(), k = s.tags;
  ad::Tensor beta = ad::Tensor::zeros(n, k);
  for (std::size_t i = 0; i < k; ++i) beta(n - 1, i) = a(i, s.eos());
  for (std::size_t t = n - 1; t-- > 0;) {
    for (std::size_t i = 0; i < k; ++i) {
      double acc = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < k; ++j) acc = log_add(acc, a(i, j) + p(t + 1, j) + beta(t + 1, j));
      beta(t, i) = acc;
    }
  }
  return beta;
}

double log_partition_from(const ad::Tensor& alpha, const ad::Tensor& a, CrfShape s) {
  const std::size_t last = alpha.rows() - 1;
  double z = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < s.tags; ++j) z = log_add(z, alpha(last, j) + a(j, s.eos()));
  return z;
}

void check_tags(std::span<const std::size_t> tags, CrfShape s, std::size_t n) {
  if (tags.size() != n) {
    throw ContractError("crf: " + std::to_string(tags.size()) + " tags for " + std::to_string(n) + " positions");
  }
  for (auto y : tags) {
    if (y >= s.tags) throw ContractError("crf: tag id " + std::to_string(y) + " out of range");
  }
}

}  // namespace

CrfShape check_crf_shapes(const ad::Tensor& emissions, const ad::Tensor& transitions) {
  const std::size_t k = emissions.cols();
  if (emissions.rows() == 0 || transitions.rows() != k + 2 || transitions.cols() != k + 2) {
    throw DimensionError("crf: emissions " + ad::shape_string(emissions.shape()) + " and transitions " +
                         ad::shape_string(transitions.shape()) + " disagree");
  }
  return {k};
}

double crf_score(const ad::Tensor& emissions, const ad::Tensor& transitions,
                 std::span<const std::size_t> tags) {
  const auto s = check_crf_shapes(emissions, transitions);
  check_tags(tags, s, emissions.rows());
  double score = transitions(s.bos(), tags.front()) + transitions(tags.back(), s.eos());
  for (std::size_t t = 0; t < tags.size(); ++t) {
    score += emissions(t, tags[t]);
    if (t + 1 < tags.size()) score += transitions(tags[t], tags[t + 1]);
  }
  return score;
}

double crf_log_partition(const ad::Tensor& emissions, const ad::Tensor& transitions) {
  const auto s = check_crf_shapes(emissions, transitions);
  return log_partition_from(forward_scores(emissions, transitions, s), transitions, s);
}

ViterbiResult viterbi_decode(const ad::Tensor& emissions, const ad::Tensor& transitions) {
  const auto s = check_crf_shapes(emissions, transitions);
  const std::size_t n = emissions.rows(), k = s.tags;
  ad::Tensor best = ad::Tensor::zeros(n, k);
  std::vector<std::size_t> back(n * k, 0);
  for (std::size_t j = 0; j < k; ++j) best(0, j) = transitions(s.bos(), j) + emissions(0, j);
  for (std::size_t t = 1; t < n; ++t) {
    for (std::size_t j = 0; j < k; ++j) {
      std::size_t arg = 0;
      double top = best(t - 1, 0) + transitions(0, j);
      for (std::size_t i = 1; i < k; ++i) {
        const double v = best(t - 1, i) + transitions(i, j);
        if (v > top) {
          top = v;
          arg = i;
        }
      }
      best(t, j) = top + emissions(t, j);
      back[t * k + j] = arg;
    }
  }
  ViterbiResult out;
  out.tags.resize(n);
  std::size_t last = 0;
  double top = best(n - 1, 0) + transitions(0, s.eos());
  for (std::size_t j = 1; j < k; ++j) {
    const double v = best(n - 1, j) + transitions(j, s.eos());
    if (v > top) {
      top = v;
      last = j;
    }
  }
  out.score = top;
  out.tags[n - 1] = last;
  for (std::size_t t = n - 1; t > 0; --t) out.tags[t - 1] = back[t * k + out.tags[t]];
  return out;
}

ad::Var crf_nll(ad::Var emissions, ad::Var transitions, std::vector<std::size_t> gold) {
  if (&emissions.tape() != &transitions.tape()) throw ContractError("crf-nll: operands on different tapes");
  const auto& p = emissions.value();
  const auto& a = transitions.value();
  const auto s = check_crf_shapes(p, a);
  check_tags(gold, s, p.rows());
  const double nll = crf_log_partition(p, a) - crf_score(p, a, gold);
  return emissions.tape().record(
      ad::OpKind::kCrfNll, {emissions, transitions}, ad::Tensor::scalar(nll),
      [s, gold = std::move(gold)](ad::Tape& tape, std::size_t self) {
        const auto ip = tape.input(self, 0), ia = tape.input(self, 1);
        const auto& p = tape.value(ip);
        const auto& a = tape.value(ia);
        const double g = tape.adjoint(self)[0];
        const std::size_t n = p.rows(), k = s.tags;
        const auto alpha = forward_scores(p, a, s);
        const auto beta = backward_scores(p, a, s);
        const double z = log_partition_from(alpha, a, s);
        if (tape.needs_grad(ip)) {
          auto& dp = tape.adjoint(ip);
          for (std::size_t t = 0; t < n; ++t) {
            for (std::size_t j = 0; j < k; ++j) dp(t, j) += g * std::exp(alpha(t, j) + beta(t, j) - z);
            dp(t, gold[t]) -= g;
          }
        }
        if (tape.needs_grad(ia)) {
          auto& da = tape.adjoint(ia);
          for (std::size_t j = 0; j < k; ++j) {
            da(s.bos(), j) += g * std::exp(alpha(0, j) + beta(0, j) - z);
            da(j, s.eos()) += g * std::exp(alpha(n - 1, j) + beta(n - 1, j) - z);
          }
          for (std::size_t t = 0; t + 1 < n; ++t) {
            for (std::size_t i = 0; i < k; ++i) {
              for (std::size_t j = 0; j < k; ++j) {
                da(i, j) += g * std::exp(alpha(t, i) + a(i, j) + p(t + 1, j) + beta(t + 1, j) - z);
              }
            }
          }
          da(s.bos(), gold.front()) -= g;
          da(gold.back(), s.eos()) -= g;
          for (std::size_t t = 0; t + 1 < n; ++t) da(gold[t], gold[t + 1]) -= g;
        }
      });
}

}  // namespace cmnet::model
