#include "melcond/nn/tensor.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

#include "melcond/error.h"

namespace melcond::nn {

std::size_t shape_size(const std::vector<int>& shape) {
  std::size_t n = 1;
  for (int d : shape) {
    if (d < 0) fail(ErrorKind::ShapeMismatch, "negative dimension");
    n *= static_cast<std::size_t>(d);
  }
  return n;
}

Tensor::Tensor(std::vector<int> shape, float fill) : shape_(std::move(shape)), data_(shape_size(shape_), fill) {}

Tensor::Tensor(std::vector<int> shape, std::vector<float> data) : shape_(std::move(shape)), data_(std::move(data)) {
  if (data_.size() != shape_size(shape_)) {
    fail(ErrorKind::ShapeMismatch, "data length " + std::to_string(data_.size()) + " does not match shape " + shape_string());
  }
}

int Tensor::rows() const {
  if (shape_.empty()) return 1;
  return static_cast<int>(shape_size(std::vector<int>(shape_.begin(), shape_.end() - 1)));
}

int Tensor::cols() const { return shape_.empty() ? 1 : shape_.back(); }

void Tensor::fill(float v) { std::fill(data_.begin(), data_.end(), v); }

Tensor Tensor::reshaped(std::vector<int> shape) const {
  if (shape_size(shape) != data_.size()) fail(ErrorKind::ShapeMismatch, "cannot reshape " + shape_string());
  return Tensor(std::move(shape), data_);
}

bool Tensor::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](float v) { return std::isfinite(v); });
}

std::string Tensor::shape_string() const {
  std::string s = "[";
  for (std::size_t i = 0; i < shape_.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape_[i]);
  }
  return s + "]";
}

MatrixMap as_matrix(Tensor& t) { return MatrixMap(t.data(), t.rows(), t.cols()); }
ConstMatrixMap as_matrix(const Tensor& t) { return ConstMatrixMap(t.data(), t.rows(), t.cols()); }

}  // namespace melcond::nn
