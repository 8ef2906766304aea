#pragma once

#include <map>
#include <string>
#include <vector>

#include "melcond/nn/tensor.h"
#include "melcond/rng.h"

namespace melcond::nn {

struct Parameter {
  Tensor value;
  Tensor grad;
  bool trainable = true;  // false for batch-norm running statistics
};

// Path-addressed parameters. Entries live in a std::map so references stay
// valid while the store grows; shapes are fixed at creation.
class ParameterStore {
 public:
  Parameter& add(const std::string& path, std::vector<int> shape, bool trainable = true);
  Parameter& at(const std::string& path);
  const Parameter& at(const std::string& path) const;
  bool contains(const std::string& path) const { return entries_.count(path) != 0; }

  std::map<std::string, Parameter>& entries() { return entries_; }
  const std::map<std::string, Parameter>& entries() const { return entries_; }

  void zero_grad();
  std::size_t trainable_count() const;

  bool operator==(const ParameterStore& other) const;

 private:
  std::map<std::string, Parameter> entries_;
};

// Uniform in [-bound, bound].
void init_uniform(Tensor& t, float bound, Rng& rng);

}  // namespace melcond::nn
