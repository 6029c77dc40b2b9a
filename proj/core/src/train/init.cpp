#include "cmnet/train/init.hpp"

#include <cmath>

namespace cmnet::train {

ad::Tensor init_param(const ad::Shape& shape, Rng& rng) {
  ad::Tensor t(shape);
  const double fan_out = static_cast<double>(t.rows());
  const double fan_in = static_cast<double>(t.cols());
  const double bound = std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& v : t.data()) v = rng.uniform(-bound, bound);
  return t;
}

ad::Tensor init_bias(std::size_t size) { return ad::Tensor::zeros(1, size); }

ad::Parameter& add_weight(ad::ParameterStore& store, const std::string& name, std::size_t rows,
                          std::size_t cols, std::uint64_t seed) {
  auto rng = Rng::for_name(seed, name);
  return store.add(name, init_param({rows, cols}, rng));
}

ad::Parameter& add_bias(ad::ParameterStore& store, const std::string& name, std::size_t size) {
  return store.add(name, init_bias(size));
}

}  // namespace cmnet::train
