#pragma once

#include <map>
#include <string>
#include <vector>

#include "mwrn/tensor.hpp"

namespace mwrn {

struct AdamHyper {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// A named trainable array (or buffer) plus its optimizer state.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  std::vector<T> adam_m;
  std::vector<T> adam_v;
  std::int64_t step_count = 0;
  bool trainable = true;
};

// Name-keyed parameter container. Iteration order is lexicographic, which
// the checkpoint writer relies on for byte-stable output.
template <typename T>
class ParamStore {
 public:
  Parameter<T>& create(const std::string& name, const Shape& shape,
                       bool trainable = true) {
    if (map_.count(name))
      throw std::logic_error("duplicate parameter name: " + name);
    Parameter<T> p;
    p.name = name;
    p.value = Tensor<T>::zeros(shape, trainable);
    p.trainable = trainable;
    if (trainable) {
      p.adam_m.assign(static_cast<std::size_t>(shape.elems()), T(0));
      p.adam_v.assign(static_cast<std::size_t>(shape.elems()), T(0));
    }
    auto [it, ok] = map_.emplace(name, std::move(p));
    return it->second;
  }

  Parameter<T>* find(const std::string& name) {
    auto it = map_.find(name);
    return it == map_.end() ? nullptr : &it->second;
  }
  const Parameter<T>* find(const std::string& name) const {
    auto it = map_.find(name);
    return it == map_.end() ? nullptr : &it->second;
  }
  Parameter<T>& at(const std::string& name) {
    auto* p = find(name);
    if (!p) throw std::out_of_range("no parameter named " + name);
    return *p;
  }
  const Parameter<T>& at(const std::string& name) const {
    auto* p = find(name);
    if (!p) throw std::out_of_range("no parameter named " + name);
    return *p;
  }

  void erase(const std::string& name) { map_.erase(name); }
  std::size_t size() const { return map_.size(); }

  std::vector<Parameter<T>*> trainable() {
    std::vector<Parameter<T>*> out;
    for (auto& [k, v] : map_)
      if (v.trainable) out.push_back(&v);
    return out;
  }

  auto begin() { return map_.begin(); }
  auto end() { return map_.end(); }
  auto begin() const { return map_.begin(); }
  auto end() const { return map_.end(); }

 private:
  std::map<std::string, Parameter<T>> map_;
};

// One bias-corrected Adam update over `params`; every parameter must carry a
// gradient. Gradients are zeroed afterwards.
template <typename T>
void adam_step(const std::vector<Parameter<T>*>& params,
               const AdamHyper& hyper);

}  // namespace mwrn
