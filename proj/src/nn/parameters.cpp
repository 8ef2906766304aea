#include "melcond/nn/parameters.h"

#include "melcond/error.h"

namespace melcond::nn {

Parameter& ParameterStore::add(const std::string& path, std::vector<int> shape, bool trainable) {
  if (entries_.count(path)) fail(ErrorKind::InvalidArgument, "duplicate parameter path " + path);
  Parameter p;
  p.value = Tensor(shape);
  p.grad = Tensor(shape);
  p.trainable = trainable;
  return entries_.emplace(path, std::move(p)).first->second;
}

Parameter& ParameterStore::at(const std::string& path) {
  auto it = entries_.find(path);
  if (it == entries_.end()) fail(ErrorKind::InvalidArgument, "no parameter " + path);
  return it->second;
}

const Parameter& ParameterStore::at(const std::string& path) const {
  auto it = entries_.find(path);
  if (it == entries_.end()) fail(ErrorKind::InvalidArgument, "no parameter " + path);
  return it->second;
}

void ParameterStore::zero_grad() {
  for (auto& [_, p] : entries_) p.grad.fill(0.0f);
}

std::size_t ParameterStore::trainable_count() const {
  std::size_t n = 0;
  for (const auto& [_, p] : entries_) n += p.trainable ? p.value.size() : 0;
  return n;
}

bool ParameterStore::operator==(const ParameterStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (const auto& [path, p] : entries_) {
    auto it = other.entries_.find(path);
    if (it == other.entries_.end() || it->second.value != p.value || it->second.trainable != p.trainable) return false;
  }
  return true;
}

void init_uniform(Tensor& t, float bound, Rng& rng) {
  for (auto& v : t.values()) v = static_cast<float>(rng.uniform(-bound, bound));
}

}  // namespace melcond::nn
