#include <gtest/gtest.h>

#include <cmath>

#include "../support/gradient_cases.h"
#include "melcond/error.h"
#include "melcond/nn/checkpoint.h"
#include "melcond/nn/layers.h"
#include "melcond/nn/lstm.h"
#include "melcond/nn/optim.h"
#include "melcond/nn/parameters.h"

using namespace melcond;
using nn::Tensor;

namespace {

Tensor random_tensor(std::vector<int> shape, Rng& rng) {
  Tensor t(std::move(shape));
  for (auto& v : t.values()) v = static_cast<float>(rng.uniform(-1.0, 1.0));
  return t;
}

double sigmoid(double v) { return 1.0 / (1.0 + std::exp(-v)); }

}  // namespace

TEST(Embedding, LookupAndDuplicateAccumulation) {
  Tensor eye({3, 3});
  for (int i = 0; i < 3; ++i) eye.at(i, i) = 1.0f;
  const std::vector<int> two = {2};
  EXPECT_EQ(nn::embedding_forward(eye, two).values()[2], 1.0f);
  EXPECT_EQ(nn::embedding_forward(eye, two).values()[0], 0.0f);

  Tensor dy({2, 3}, std::vector<float>{1, 2, 3, 10, 20, 30});
  Tensor grad({3, 3});
  const std::vector<int> dup = {1, 1};
  nn::embedding_backward(dy, dup, grad);
  EXPECT_EQ(grad.at(1, 0), 11.0f);
  EXPECT_EQ(grad.at(1, 2), 33.0f);
  EXPECT_EQ(grad.at(0, 0), 0.0f);

  const std::vector<int> bad = {3};
  EXPECT_THROW(nn::embedding_forward(eye, bad), Error);
}

TEST(Linear, IdentityAndBias) {
  Rng rng(1);
  Tensor w({3, 3});
  for (int i = 0; i < 3; ++i) w.at(i, i) = 1.0f;
  Tensor x = random_tensor({4, 3}, rng);
  EXPECT_EQ(nn::linear_forward(w, Tensor({3}), x), x);

  Tensor b({3}, std::vector<float>{1, 2, 3});
  const Tensor y = nn::linear_forward(random_tensor({3, 3}, rng), b, Tensor({2, 3}));
  EXPECT_EQ(y.at(1, 2), 3.0f);
  EXPECT_THROW(nn::linear_forward(w, b, Tensor({2, 4})), Error);
}

TEST(BatchNorm, TrainStatisticsAndEval) {
  Rng rng(2);
  Tensor x = random_tensor({16, 3}, rng);
  Tensor scale({3}, 1.0f), shift({3}), rm({3}), rv({3}, 1.0f);
  const Tensor y = nn::batchnorm_forward(x, scale, shift, rm, rv, nn::Mode::Train, nullptr);
  for (int f = 0; f < 3; ++f) {
    double mean = 0, var = 0;
    for (int n = 0; n < 16; ++n) mean += y.at(n, f);
    mean /= 16;
    for (int n = 0; n < 16; ++n) var += (y.at(n, f) - mean) * (y.at(n, f) - mean);
    var /= 16;
    EXPECT_NEAR(mean, 0.0, 1e-5);
    EXPECT_NEAR(var, 1.0, 1e-3);  // eps shrinks the variance slightly
  }
  EXPECT_NE(rm[0], 0.0f);

  Tensor rm0({3}), rv1({3}, 1.0f);
  const Tensor e = nn::batchnorm_forward(x, scale, shift, rm0, rv1, nn::Mode::Eval, nullptr);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(e[i], x[i] / std::sqrt(1.0f + 1e-5f), 1e-6);

  Tensor one = random_tensor({1, 3}, rng);
  try {
    nn::batchnorm_forward(one, scale, shift, rm, rv, nn::Mode::Train, nullptr);
    FAIL();
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::DegenerateBatch);
  }
}

TEST(LogSoftmax, UniformOver89) {
  const Tensor y = nn::log_softmax_forward(Tensor({2, 89}, 0.7f));
  for (float v : y.values()) EXPECT_NEAR(v, -4.48863637, 1e-5);
}

TEST(Dropout, ZeroRateIsIdentity) {
  Rng rng(3);
  Tensor x = random_tensor({4, 4}, rng);
  EXPECT_EQ(nn::dropout_forward(x, nn::dropout_mask({4, 4}, 0.0f, rng)), x);
  const Tensor m = nn::dropout_mask({100, 10}, 0.5f, rng);
  for (float v : m.values()) EXPECT_TRUE(v == 0.0f || v == 2.0f);
  EXPECT_THROW(nn::dropout_mask({1}, 1.0f, rng), Error);
}

TEST(Nll, PerfectUniformAndMasked) {
  Tensor perfect({2, 3}, -1e4f);
  perfect.at(0, 1) = 0.0f;
  perfect.at(1, 2) = 0.0f;
  const std::vector<int> targets = {1, 2};
  const std::vector<std::uint8_t> all = {1, 1};
  EXPECT_EQ(nn::nll_loss(perfect, targets, all).loss, 0.0);

  const Tensor uniform = nn::log_softmax_forward(Tensor({2, 89}));
  const std::vector<int> t89 = {0, 88};
  EXPECT_NEAR(nn::nll_loss(uniform, t89, all).loss, std::log(89.0), 1e-5);

  Rng rng(4);
  const Tensor lp = nn::log_softmax_forward(random_tensor({4, 5}, rng));
  const std::vector<int> t4 = {0, 1, 2, 3};
  const std::vector<std::uint8_t> half = {1, 0, 1, 0};
  const auto r = nn::nll_loss(lp, t4, half);
  EXPECT_NEAR(r.loss, -(static_cast<double>(lp.at(0, 0)) + lp.at(2, 2)) / 2.0, 1e-6);
  EXPECT_EQ(r.count, 2u);
  EXPECT_EQ(r.grad.at(1, 1), 0.0f);

  const std::vector<std::uint8_t> none = {0, 0, 0, 0};
  try {
    nn::nll_loss(lp, t4, none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::AllMasked);
  }
}

TEST(Lstm, ZeroWeightsGiveZeroOutput) {
  constexpr int H = 3;
  Tensor w_ih({4 * H, 2}), w_hh({4 * H, H}), b({4 * H});
  const nn::LstmLayerWeights layers[] = {{&w_ih, &w_hh, &b}};
  Rng rng(5);
  const auto out = nn::lstm_forward(layers, random_tensor({4, 2, 2}, rng), nn::LstmState::zeros(1, 2, H), 0.0f,
                                    nn::Mode::Eval, nullptr, nullptr);
  for (float v : out.y.values()) EXPECT_EQ(v, 0.0f);
}

TEST(Lstm, SingleStepMatchesCellOracle) {
  constexpr int I = 3, H = 4, N = 2;
  Rng rng(6);
  Tensor w_ih = random_tensor({4 * H, I}, rng), w_hh = random_tensor({4 * H, H}, rng), b = random_tensor({4 * H}, rng);
  Tensor x = random_tensor({1, N, I}, rng);
  nn::LstmState init{random_tensor({1, N, H}, rng), random_tensor({1, N, H}, rng)};
  const nn::LstmLayerWeights layers[] = {{&w_ih, &w_hh, &b}};
  const auto out = nn::lstm_forward(layers, x, init, 0.0f, nn::Mode::Eval, nullptr, nullptr);

  for (int n = 0; n < N; ++n) {
    double pre[4 * H];
    for (int r = 0; r < 4 * H; ++r) {
      pre[r] = b[static_cast<std::size_t>(r)];
      for (int k = 0; k < I; ++k) pre[r] += static_cast<double>(w_ih.at(r, k)) * x[static_cast<std::size_t>(n * I + k)];
      for (int k = 0; k < H; ++k) pre[r] += static_cast<double>(w_hh.at(r, k)) * init.h[static_cast<std::size_t>(n * H + k)];
    }
    for (int k = 0; k < H; ++k) {
      const double i = sigmoid(pre[k]), f = sigmoid(pre[H + k]), g = std::tanh(pre[2 * H + k]), o = sigmoid(pre[3 * H + k]);
      const double c = f * init.c[static_cast<std::size_t>(n * H + k)] + i * g;
      const double h = o * std::tanh(c);
      EXPECT_NEAR(out.y[static_cast<std::size_t>(n * H + k)], h, 1e-6);
      EXPECT_NEAR(out.final_state.c[static_cast<std::size_t>(n * H + k)], c, 1e-6);
    }
  }
}

TEST(Lstm, DropoutOnlyInTrainMode) {
  constexpr int H = 4;
  Rng rng(7);
  Tensor a = random_tensor({4 * H, 2}, rng), b = random_tensor({4 * H, H}, rng), c = random_tensor({4 * H}, rng);
  Tensor d = random_tensor({4 * H, H}, rng), e = random_tensor({4 * H, H}, rng), f = random_tensor({4 * H}, rng);
  const nn::LstmLayerWeights layers[] = {{&a, &b, &c}, {&d, &e, &f}};
  const Tensor x = random_tensor({3, 2, 2}, rng);
  const auto init = nn::LstmState::zeros(2, 2, H);
  const auto eval1 = nn::lstm_forward(layers, x, init, 0.5f, nn::Mode::Eval, nullptr, nullptr);
  const auto eval0 = nn::lstm_forward(layers, x, init, 0.0f, nn::Mode::Train, nullptr, nullptr);
  EXPECT_EQ(eval1.y, eval0.y);
  Rng r1(9), r2(9);
  const auto t1 = nn::lstm_forward(layers, x, init, 0.5f, nn::Mode::Train, &r1, nullptr);
  const auto t2 = nn::lstm_forward(layers, x, init, 0.5f, nn::Mode::Train, &r2, nullptr);
  EXPECT_EQ(t1.y, t2.y);
  EXPECT_NE(t1.y, eval1.y);
}

class GradientCases : public ::testing::TestWithParam<std::size_t> {};

TEST_P(GradientCases, FiniteDifferencesAgree) {
  const auto& c = fixtures::gradient_cases()[GetParam()];
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    const auto r = c.run(seed);
    EXPECT_LT(r.max_rel_error, c.tolerance)
        << c.name << " seed " << seed << " worst " << r.worst_slot << "[" << r.worst_index << "] analytic "
        << r.worst_analytic << " numeric " << r.worst_numeric;
    EXPECT_GT(r.checked, 0u);
    EXPECT_LT(r.skipped, r.checked / 4 + 1) << c.name << " seed " << seed;
  }
}

INSTANTIATE_TEST_SUITE_P(Layers, GradientCases, ::testing::Range<std::size_t>(0, 10));

TEST(AmsGrad, ZeroGradientLeavesParameters) {
  nn::ParameterStore store;
  Rng rng(8);
  auto& p = store.add("w", {3});
  nn::init_uniform(p.value, 1.0f, rng);
  const Tensor before = p.value;
  nn::OptimizerState state;
  nn::amsgrad_step(store, state);
  EXPECT_EQ(store.at("w").value, before);
  EXPECT_EQ(state.step, 1);
}

TEST(AmsGrad, FirstStepIsSignScaledLr) {
  nn::ParameterStore store;
  auto& p = store.add("w", {3});
  p.grad = Tensor({3}, std::vector<float>{0.5f, -2.0f, 1e-3f});
  nn::OptimizerState state;
  nn::amsgrad_step(store, state);
  EXPECT_NEAR(store.at("w").value[0], -1e-3, 1e-7);
  EXPECT_NEAR(store.at("w").value[1], 1e-3, 1e-7);
  EXPECT_NEAR(store.at("w").value[2], -1e-3, 1e-6);
}

TEST(AmsGrad, VmaxIsMonotone) {
  nn::ParameterStore store;
  store.add("w", {2});
  store.add("stat", {2}, false);
  nn::OptimizerState state;
  float peak = 0.0f;
  for (float g : {3.0f, 2.0f, 1.0f, 0.5f, 0.1f}) {
    store.at("w").grad.fill(g);
    const float prev = state.moments.count("w") ? state.moments["w"].v_max[0] : 0.0f;
    nn::amsgrad_step(store, state);
    const float now = state.moments["w"].v_max[0];
    EXPECT_GE(now, prev);
    peak = std::max(peak, state.moments["w"].v[0]);
    EXPECT_EQ(now, peak);
  }
  EXPECT_EQ(state.moments.count("stat"), 0u);
  state.moments["w"].m = Tensor({5});
  EXPECT_THROW(nn::amsgrad_step(store, state), Error);
}

TEST(Checkpoint, RoundTripBytes) {
  nn::Checkpoint ck;
  ck.fingerprint = "P|D:CNIB";
  ck.epoch = 4;
  ck.metrics = {{"val_nll", 1.25}};
  ck.model = {{"hidden", 8}};
  Rng rng(10);
  nn::init_uniform(ck.params.add("a/W", {3, 2}).value, 1.0f, rng);
  ck.params.add("a/bn.running_mean", {2}, false).value.fill(0.5f);
  ck.optimizer.step = 7;
  ck.optimizer.moments["a/W"] = {Tensor({3, 2}, 0.1f), Tensor({3, 2}, 0.2f), Tensor({3, 2}, 0.3f)};

  const std::string bytes = nn::encode_checkpoint(ck);
  EXPECT_EQ(bytes.substr(0, 8), "MCKPT001");
  const nn::Checkpoint back = nn::decode_checkpoint(bytes);
  EXPECT_EQ(back.fingerprint, ck.fingerprint);
  EXPECT_EQ(back.epoch, 4);
  EXPECT_EQ(back.params, ck.params);
  EXPECT_FALSE(back.params.at("a/bn.running_mean").trainable);
  EXPECT_EQ(back.optimizer.step, 7);
  EXPECT_EQ(back.optimizer.moments.at("a/W").v_max, ck.optimizer.moments.at("a/W").v_max);
  EXPECT_EQ(nn::encode_checkpoint(back), bytes);

  std::string tampered = bytes;
  tampered.replace(tampered.find("P|D:CNIB"), 8, "P|D:CNIX");
  try {
    nn::decode_checkpoint(tampered);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::FingerprintMismatch);
  }
  EXPECT_THROW(nn::decode_checkpoint("garbage"), Error);
}
