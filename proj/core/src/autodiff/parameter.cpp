#include "cmnet/autodiff/parameter.hpp"

#include "cmnet/errors.hpp"

namespace cmnet::ad {

Parameter& ParameterStore::add(std::string name, Tensor value, bool trainable) {
  if (params_.count(name)) throw ContractError("duplicate parameter name '" + name + "'");
  auto key = name;
  auto [it, _] = params_.emplace(std::move(key), Parameter{std::move(name), std::move(value), trainable});
  return it->second;
}

Parameter& ParameterStore::get(const std::string& name) {
  auto* p = find(name);
  if (!p) throw ContractError("unknown parameter '" + name + "'");
  return *p;
}

const Parameter& ParameterStore::get(const std::string& name) const {
  const auto* p = find(name);
  if (!p) throw ContractError("unknown parameter '" + name + "'");
  return *p;
}

Parameter* ParameterStore::find(const std::string& name) {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : &it->second;
}

const Parameter* ParameterStore::find(const std::string& name) const {
  auto it = params_.find(name);
  return it == params_.end() ? nullptr : &it->second;
}

std::size_t ParameterStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : params_) {
    if (p.trainable) n += p.value.size();
  }
  return n;
}

std::vector<std::string> ParameterStore::names() const {
  std::vector<std::string> out;
  out.reserve(params_.size());
  for (const auto& [name, _] : params_) out.push_back(name);
  return out;
}

Gradients zero_gradients(const ParameterStore& store) {
  Gradients grads;
  for (const auto& [name, p] : store) {
    if (p.trainable) grads.emplace(name, Tensor(p.value.shape()));
  }
  return grads;
}

}  // namespace cmnet::ad
