#include "melcond/nn/layers.h"

#include <algorithm>
#include <cmath>

#include "melcond/error.h"

namespace melcond::nn {

namespace {

void expect(bool ok, const std::string& what) {
  if (!ok) fail(ErrorKind::ShapeMismatch, what);
}

}  // namespace

Tensor embedding_forward(const Tensor& table, std::span<const int> indices) {
  expect(table.rank() == 2, "embedding table must be 2-D");
  const int vocab = table.dim(0), width = table.dim(1);
  Tensor y({static_cast<int>(indices.size()), width});
  for (std::size_t r = 0; r < indices.size(); ++r) {
    const int idx = indices[r];
    if (idx < 0 || idx >= vocab) {
      fail(ErrorKind::IndexOutOfRange, "embedding index " + std::to_string(idx) + " outside [0," + std::to_string(vocab) + ")");
    }
    std::copy_n(table.data() + static_cast<std::size_t>(idx) * width, width, y.data() + r * width);
  }
  return y;
}

void embedding_backward(const Tensor& dy, std::span<const int> indices, Tensor& dtable) {
  const int width = dtable.dim(1);
  expect(dy.rows() == static_cast<int>(indices.size()) && dy.cols() == width, "embedding gradient shape");
  for (std::size_t r = 0; r < indices.size(); ++r) {
    float* dst = dtable.data() + static_cast<std::size_t>(indices[r]) * width;
    const float* src = dy.data() + r * width;
    for (int c = 0; c < width; ++c) dst[c] += src[c];
  }
}

Tensor linear_forward(const Tensor& w, const Tensor& b, const Tensor& x) {
  expect(w.rank() == 2 && b.size() == static_cast<std::size_t>(w.dim(0)), "linear parameters " + w.shape_string());
  expect(x.cols() == w.dim(1), "linear input " + x.shape_string() + " vs weight " + w.shape_string());
  Tensor y({x.rows(), w.dim(0)});
  auto ym = as_matrix(y);
  ym.noalias() = as_matrix(x) * as_matrix(w).transpose();
  ym.rowwise() += Eigen::Map<const Eigen::RowVectorXf>(b.data(), w.dim(0));
  return y;
}

Tensor linear_backward(const Tensor& w, const Tensor& x, const Tensor& dy, Tensor& dw, Tensor& db) {
  expect(dy.rows() == x.rows() && dy.cols() == w.dim(0), "linear output gradient " + dy.shape_string());
  const auto dym = as_matrix(dy);
  as_matrix(dw).noalias() += dym.transpose() * as_matrix(x);
  Eigen::Map<Eigen::RowVectorXf>(db.data(), w.dim(0)) += dym.colwise().sum();
  Tensor dx({x.rows(), x.cols()});
  as_matrix(dx).noalias() = dym * as_matrix(w);
  return dx;
}

Tensor batchnorm_forward(const Tensor& x, const Tensor& scale, const Tensor& shift, Tensor& running_mean,
                         Tensor& running_var, Mode mode, BatchNormCache* cache) {
  const int n = x.rows(), f = x.cols();
  expect(scale.size() == static_cast<std::size_t>(f) && shift.size() == scale.size(), "batch-norm parameters");
  Tensor y({n, f});
  std::vector<float> mean(static_cast<std::size_t>(f)), inv_std(static_cast<std::size_t>(f));
  if (mode == Mode::Train) {
    if (n < 2) fail(ErrorKind::DegenerateBatch, "train-mode batch norm needs at least 2 rows, got " + std::to_string(n));
    const auto xm = as_matrix(x);
    for (int j = 0; j < f; ++j) {
      double s = 0.0;
      for (int i = 0; i < n; ++i) s += xm(i, j);
      const double mu = s / n;
      double v = 0.0;
      for (int i = 0; i < n; ++i) v += (xm(i, j) - mu) * (xm(i, j) - mu);
      const double var = v / n;
      mean[j] = static_cast<float>(mu);
      inv_std[j] = static_cast<float>(1.0 / std::sqrt(var + kBatchNormEps));
      running_mean[j] = (1.0f - kBatchNormMomentum) * running_mean[j] + kBatchNormMomentum * static_cast<float>(mu);
      running_var[j] = (1.0f - kBatchNormMomentum) * running_var[j] +
                       kBatchNormMomentum * static_cast<float>(v / (n - 1));
    }
  } else {
    for (int j = 0; j < f; ++j) {
      mean[j] = running_mean[j];
      inv_std[j] = 1.0f / std::sqrt(running_var[j] + kBatchNormEps);
    }
  }
  Tensor x_hat({n, f});
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < f; ++j) {
      const float xh = (x.at(i, j) - mean[j]) * inv_std[j];
      x_hat.at(i, j) = xh;
      y.at(i, j) = scale[j] * xh + shift[j];
    }
  }
  if (cache) {
    cache->mode = mode;
    cache->x_hat = std::move(x_hat);
    cache->inv_std = std::move(inv_std);
  }
  return y;
}

Tensor batchnorm_backward(const Tensor& dy, const Tensor& scale, const BatchNormCache& cache, Tensor& dscale,
                          Tensor& dshift) {
  const int n = dy.rows(), f = dy.cols();
  expect(cache.x_hat.rows() == n && cache.x_hat.cols() == f, "batch-norm gradient shape");
  Tensor dx({n, f});
  for (int j = 0; j < f; ++j) {
    double sum_dy = 0.0, sum_dy_xh = 0.0;
    for (int i = 0; i < n; ++i) {
      sum_dy += dy.at(i, j);
      sum_dy_xh += dy.at(i, j) * cache.x_hat.at(i, j);
    }
    dscale[j] += static_cast<float>(sum_dy_xh);
    dshift[j] += static_cast<float>(sum_dy);
    const float g = scale[j] * cache.inv_std[j];
    if (cache.mode == Mode::Train) {
      const double mean_dy = sum_dy / n, mean_dy_xh = sum_dy_xh / n;
      for (int i = 0; i < n; ++i) {
        dx.at(i, j) = g * static_cast<float>(dy.at(i, j) - mean_dy - cache.x_hat.at(i, j) * mean_dy_xh);
      }
    } else {
      for (int i = 0; i < n; ++i) dx.at(i, j) = g * dy.at(i, j);
    }
  }
  return dx;
}

Tensor relu_forward(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.values()) v = v > 0.0f ? v : 0.0f;
  return y;
}

Tensor relu_backward(const Tensor& y, const Tensor& dy) {
  expect(y.size() == dy.size(), "relu gradient shape");
  Tensor dx = dy;
  for (std::size_t i = 0; i < dx.size(); ++i) {
    if (y[i] <= 0.0f) dx[i] = 0.0f;
  }
  return dx;
}

Tensor log_softmax_forward(const Tensor& x) {
  const int n = x.rows(), c = x.cols();
  Tensor y(x.shape());
  for (int i = 0; i < n; ++i) {
    const float* row = x.data() + static_cast<std::size_t>(i) * c;
    float* out = y.data() + static_cast<std::size_t>(i) * c;
    const float m = *std::max_element(row, row + c);
    double s = 0.0;
    for (int j = 0; j < c; ++j) s += std::exp(static_cast<double>(row[j] - m));
    const float lse = m + static_cast<float>(std::log(s));
    for (int j = 0; j < c; ++j) out[j] = row[j] - lse;
  }
  return y;
}

Tensor log_softmax_backward(const Tensor& y, const Tensor& dy) {
  expect(y.size() == dy.size(), "log-softmax gradient shape");
  const int n = y.rows(), c = y.cols();
  Tensor dx(y.shape());
  for (int i = 0; i < n; ++i) {
    const float* yr = y.data() + static_cast<std::size_t>(i) * c;
    const float* dr = dy.data() + static_cast<std::size_t>(i) * c;
    float* out = dx.data() + static_cast<std::size_t>(i) * c;
    double s = 0.0;
    for (int j = 0; j < c; ++j) s += dr[j];
    for (int j = 0; j < c; ++j) out[j] = dr[j] - std::exp(yr[j]) * static_cast<float>(s);
  }
  return dx;
}

Tensor dropout_mask(const std::vector<int>& shape, float p, Rng& rng) {
  if (p < 0.0f || p >= 1.0f) fail(ErrorKind::InvalidArgument, "dropout rate must be in [0,1)");
  Tensor mask(shape, 1.0f);
  if (p == 0.0f) return mask;
  const float keep_scale = 1.0f / (1.0f - p);
  for (auto& v : mask.values()) v = rng.uniform() < p ? 0.0f : keep_scale;
  return mask;
}

Tensor dropout_forward(const Tensor& x, const Tensor& mask) {
  expect(x.size() == mask.size(), "dropout mask shape");
  Tensor y = x;
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= mask[i];
  return y;
}

Tensor dropout_backward(const Tensor& dy, const Tensor& mask) { return dropout_forward(dy, mask); }

NllResult nll_loss(const Tensor& log_probs, std::span<const int> targets, std::span<const std::uint8_t> mask) {
  const int n = log_probs.rows(), c = log_probs.cols();
  expect(targets.size() == static_cast<std::size_t>(n) && mask.size() == targets.size(), "nll targets/mask length");
  NllResult r;
  r.grad = Tensor(log_probs.shape());
  for (int i = 0; i < n; ++i) r.count += mask[static_cast<std::size_t>(i)] ? 1 : 0;
  if (r.count == 0) fail(ErrorKind::AllMasked, "every position is masked");
  const float inv = 1.0f / static_cast<float>(r.count);
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const int t = targets[static_cast<std::size_t>(i)];
    if (t < 0 || t >= c) fail(ErrorKind::IndexOutOfRange, "target " + std::to_string(t));
    total -= log_probs.at(i, t);
    r.grad.at(i, t) = -inv;
  }
  r.loss = total / static_cast<double>(r.count);
  return r;
}

Tensor concat_columns(std::span<const Tensor* const> parts) {
  expect(!parts.empty(), "nothing to concatenate");
  const int n = parts[0]->rows();
  int width = 0;
  for (const Tensor* p : parts) {
    expect(p->rows() == n, "concat row mismatch");
    width += p->cols();
  }
  Tensor y({n, width});
  int offset = 0;
  for (const Tensor* p : parts) {
    as_matrix(y).middleCols(offset, p->cols()) = as_matrix(*p);
    offset += p->cols();
  }
  return y;
}

std::vector<Tensor> split_columns(const Tensor& x, std::span<const int> widths) {
  std::vector<Tensor> out;
  int offset = 0;
  for (int w : widths) {
    Tensor part({x.rows(), w});
    as_matrix(part) = as_matrix(x).middleCols(offset, w);
    out.push_back(std::move(part));
    offset += w;
  }
  expect(offset == x.cols(), "split widths do not cover the input");
  return out;
}

void add_inplace(Tensor& dst, const Tensor& src) {
  expect(dst.size() == src.size(), "add shape mismatch");
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
}

}  // namespace melcond::nn
