#include "cmnet/model/dropout.hpp"

namespace cmnet::model {

ad::Tensor Dropout::mask(std::size_t rows, std::size_t cols) {
  ad::Tensor m = ad::Tensor::zeros(rows, cols);
  const double keep = 1.0 - rate_;
  for (auto& v : m.data()) v = rng_->bernoulli(keep) ? 1.0 / keep : 0.0;
  return m;
}

ad::Var Dropout::apply(ad::Var x) {
  if (rate_ <= 0.0) return x;
  return ad::dropout(x, mask(x.rows(), x.cols()));
}

ad::Var maybe_dropout(ad::Var x, Dropout* dropout) {
  return dropout ? dropout->apply(x) : x;
}

}  // namespace cmnet::model
