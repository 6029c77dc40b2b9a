#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cmnet/autodiff/tensor.hpp"

namespace cmnet::ad {

struct Parameter {
  std::string name;
  Tensor value;
  bool trainable = true;
};

// Gradients keyed by parameter name.
using Gradients = std::map<std::string, Tensor>;

// Owns the named parameters of a model. Addresses are stable for the
// lifetime of the store, so layers may keep Parameter pointers.
class ParameterStore {
 public:
  Parameter& add(std::string name, Tensor value, bool trainable = true);
  Parameter& get(const std::string& name);
  const Parameter& get(const std::string& name) const;
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) != 0; }

  std::size_t size() const noexcept { return params_.size(); }
  // Number of scalar entries in trainable parameters.
  std::size_t trainable_count() const;
  std::vector<std::string> names() const;

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::map<std::string, Parameter> params_;
};

Gradients zero_gradients(const ParameterStore& store);

}  // namespace cmnet::ad
