#pragma once

#include <cstdint>
#include <string>

#include "cmnet/autodiff/parameter.hpp"
#include "cmnet/random.hpp"

namespace cmnet::train {

// Glorot/Xavier uniform: U[-b, b] with b = sqrt(6 / (fan_in + fan_out)),
// where fan_out = rows and fan_in = cols.
ad::Tensor init_param(const ad::Shape& shape, Rng& rng);
ad::Tensor init_bias(std::size_t size);

// Registers a Glorot-initialised matrix drawn from a stream keyed by name.
ad::Parameter& add_weight(ad::ParameterStore& store, const std::string& name, std::size_t rows,
                          std::size_t cols, std::uint64_t seed);
ad::Parameter& add_bias(ad::ParameterStore& store, const std::string& name, std::size_t size);

}  // namespace cmnet::train
