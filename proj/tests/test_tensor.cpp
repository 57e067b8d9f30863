#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <set>

#include "test_util.hpp"
#include "ufcnn/gradcheck.hpp"
#include "ufcnn/loss.hpp"
#include "ufcnn/ops.hpp"

using namespace ufcnn;
using testutil::naive_conv;
using testutil::random_layer;
using testutil::random_tensor;

TEST_CASE("causal conv: identity kernel") {
  SeqTensor x = SeqTensor::from_rows({{1, 2, 3, 4}});
  ConvLayer layer(1, 1, 1, 1);
  layer.w(0, 0, 0) = 1.0;
  SeqTensor y = causal_conv_forward(x, layer);
  REQUIRE(y.length == 4);
  for (int t = 0; t < 4; ++t) CHECK(y.at(0, t) == x.at(0, t));
}

TEST_CASE("causal conv: two-tap sum with zero left padding") {
  SeqTensor x = SeqTensor::from_rows({{1, 2, 3, 4}});
  ConvLayer layer(1, 1, 2, 1);
  layer.w(0, 0, 0) = 1.0;
  layer.w(0, 0, 1) = 1.0;
  SeqTensor y = causal_conv_forward(x, layer);
  const double expected[4] = {1, 3, 5, 7};
  for (int t = 0; t < 4; ++t) CHECK(y.at(0, t) == expected[t]);
}

TEST_CASE("causal conv: dilation 2 reaches two steps back") {
  SeqTensor x = SeqTensor::from_rows({{1, 2, 3, 4}});
  ConvLayer layer(1, 1, 2, 2);
  layer.w(0, 0, 0) = 1.0;
  layer.w(0, 0, 1) = 1.0;
  SeqTensor y = causal_conv_forward(x, layer);
  const double expected[4] = {1, 2, 4, 6};  // y[t] = x[t] + x[t-2]
  for (int t = 0; t < 4; ++t) CHECK(y.at(0, t) == expected[t]);
}

TEST_CASE("causal conv matches the definition-level reference on random cases") {
  Rng rng(42);
  for (int rep = 0; rep < 25; ++rep) {
    const int in_ch = 1 + rng.uniform_int(4);
    const int out_ch = 1 + rng.uniform_int(4);
    const int kernel = 1 + rng.uniform_int(5);
    const int dilation = 1 << rng.uniform_int(4);
    const int length = 1 + rng.uniform_int(40);
    ConvLayer layer = random_layer(in_ch, out_ch, kernel, dilation, rng);
    SeqTensor x = random_tensor(in_ch, length, rng);
    SeqTensor fast = causal_conv_forward(x, layer);
    SeqTensor ref = naive_conv(x, layer);
    REQUIRE(fast.same_shape(ref));
    for (size_t i = 0; i < fast.data.size(); ++i)
      CHECK(std::fabs(fast.data[i] - ref.data[i]) < 1e-10);
  }
}

TEST_CASE("causal conv: channel mismatch is a configuration error") {
  SeqTensor x(2, 5);
  ConvLayer layer(3, 1, 1, 1);
  CHECK_THROWS_AS(causal_conv_forward(x, layer), ConfigError);
  SeqTensor dy(1, 5);
  CHECK_THROWS_AS(causal_conv_backward(x, layer, dy), ConfigError);
}

TEST_CASE("causal conv backward: zero upstream gradient") {
  Rng rng(7);
  ConvLayer layer = random_layer(2, 3, 2, 1, rng);
  SeqTensor x = random_tensor(2, 9, rng);
  SeqTensor dy(3, 9);
  SeqTensor dx = causal_conv_backward(x, layer, dy);
  for (double v : dx.data) CHECK(v == 0.0);
  for (double g : layer.grad_weights) CHECK(g == 0.0);
  for (double g : layer.grad_bias) CHECK(g == 0.0);
}

TEST_CASE("causal conv backward: K=1 adjoint by hand") {
  ConvLayer layer(1, 1, 1, 1);
  layer.w(0, 0, 0) = 2.0;
  SeqTensor x = SeqTensor::from_rows({{3, 5}});
  SeqTensor dy = SeqTensor::from_rows({{1, 1}});
  SeqTensor dx = causal_conv_backward(x, layer, dy);
  CHECK(dx.at(0, 0) == 2.0);
  CHECK(dx.at(0, 1) == 2.0);
  CHECK(layer.grad_weights[0] == 8.0);  // 1*3 + 1*5
  CHECK(layer.grad_bias[0] == 2.0);
}

TEST_CASE("causal conv backward shape mismatch") {
  ConvLayer layer(1, 1, 1, 1);
  SeqTensor x(1, 5);
  SeqTensor dy(1, 4);
  CHECK_THROWS_AS(causal_conv_backward(x, layer, dy), ConfigError);
}

TEST_CASE("relu forward and backward") {
  SeqTensor x = SeqTensor::from_rows({{-1, 0, 2}});
  SeqTensor y = relu(x);
  CHECK(y.at(0, 0) == 0.0);
  CHECK(y.at(0, 1) == 0.0);
  CHECK(y.at(0, 2) == 2.0);

  SeqTensor pos = SeqTensor::from_rows({{0.5, 1, 7}});
  SeqTensor same = relu(pos);
  for (size_t i = 0; i < pos.data.size(); ++i) CHECK(same.data[i] == pos.data[i]);

  SeqTensor xb = SeqTensor::from_rows({{-1, 2}});
  SeqTensor dy = SeqTensor::from_rows({{5, 5}});
  SeqTensor dx = relu_backward(xb, dy);
  CHECK(dx.at(0, 0) == 0.0);
  CHECK(dx.at(0, 1) == 5.0);

  // the subgradient at exactly 0 is 0
  SeqTensor xz = SeqTensor::from_rows({{0.0}});
  SeqTensor dz = SeqTensor::from_rows({{5.0}});
  CHECK(relu_backward(xz, dz).at(0, 0) == 0.0);
}

TEST_CASE("concat keeps a's channels first and round-trips") {
  SeqTensor a = SeqTensor::from_rows({{1, 2}, {3, 4}});
  SeqTensor b = SeqTensor::from_rows({{5, 6}, {7, 8}, {9, 10}});
  SeqTensor joined = concat_channels(a, b);
  REQUIRE(joined.channels == 5);
  CHECK(joined.at(0, 0) == 1);
  CHECK(joined.at(1, 1) == 4);
  CHECK(joined.at(2, 0) == 5);
  CHECK(joined.at(4, 1) == 10);

  auto [a2, b2] = split_channels(joined, 2);
  CHECK(a2.data == a.data);
  CHECK(b2.data == b.data);

  SeqTensor c(1, 3);
  CHECK_THROWS_AS(concat_channels(a, c), ConfigError);
}

TEST_CASE("maxpool2 examples") {
  SeqTensor x = SeqTensor::from_rows({{1, 3, 2, 2}});
  MaxPool2Result r = maxpool2(x);
  REQUIRE(r.values.length == 2);
  CHECK(r.values.at(0, 0) == 3);
  CHECK(r.values.at(0, 1) == 2);
  CHECK(r.argmax[0] == 1);
  CHECK(r.argmax[1] == 2);  // tie keeps the earlier index

  SeqTensor constant = SeqTensor::from_rows({{4, 4, 4, 4, 4, 4}});
  MaxPool2Result rc = maxpool2(constant);
  REQUIRE(rc.values.length == 3);
  for (int i = 0; i < 3; ++i) CHECK(rc.values.at(0, i) == 4);

  SeqTensor odd = SeqTensor::from_rows({{5, 1, 4}});
  MaxPool2Result ro = maxpool2(odd);
  REQUIRE(ro.values.length == 2);
  CHECK(ro.values.at(0, 0) == 5);
  CHECK(ro.values.at(0, 1) == 4);  // lone tail passes through
  CHECK(ro.argmax[1] == 2);
}

TEST_CASE("maxpool2 backward routes gradient to the winner") {
  SeqTensor x = SeqTensor::from_rows({{1, 3, 2, 2}});
  MaxPool2Result r = maxpool2(x);
  SeqTensor dy = SeqTensor::from_rows({{10, 20}});
  SeqTensor dx = maxpool2_backward(dy, r.argmax, 4);
  CHECK(dx.at(0, 0) == 0);
  CHECK(dx.at(0, 1) == 10);
  CHECK(dx.at(0, 2) == 20);
  CHECK(dx.at(0, 3) == 0);
}

TEST_CASE("upsample2_zeros examples") {
  SeqTensor x = SeqTensor::from_rows({{1, 2}});
  SeqTensor y4 = upsample2_zeros(x, 4);
  const double e4[4] = {1, 0, 2, 0};
  for (int t = 0; t < 4; ++t) CHECK(y4.at(0, t) == e4[t]);

  SeqTensor y3 = upsample2_zeros(x, 3);
  const double e3[3] = {1, 0, 2};
  for (int t = 0; t < 3; ++t) CHECK(y3.at(0, t) == e3[t]);

  CHECK_THROWS_AS(upsample2_zeros(x, 5), ConfigError);
  CHECK_THROWS_AS(upsample2_zeros(x, 2), ConfigError);
}

TEST_CASE("delay1 shifts right and its backward shifts left") {
  SeqTensor x = SeqTensor::from_rows({{1, 2, 3}});
  SeqTensor y = delay1(x);
  CHECK(y.at(0, 0) == 0);
  CHECK(y.at(0, 1) == 1);
  CHECK(y.at(0, 2) == 2);

  // adjoint identity: <delay(x), r> == <x, delay_backward(r)>
  Rng rng(3);
  SeqTensor xr = random_tensor(2, 11, rng);
  SeqTensor r = random_tensor(2, 11, rng);
  SeqTensor fwd = delay1(xr);
  SeqTensor bwd = delay1_backward(r);
  double lhs = 0, rhs = 0;
  for (size_t i = 0; i < xr.data.size(); ++i) {
    lhs += fwd.data[i] * r.data[i];
    rhs += xr.data[i] * bwd.data[i];
  }
  CHECK(std::fabs(lhs - rhs) < 1e-12);
}

TEST_CASE("squared error loss") {
  SeqTensor y = SeqTensor::from_rows({{1, 2}, {3, 4}});
  LossTarget target;
  target.values = y;
  LossResult r = loss_eval(LossKind::SquaredError, y, target);
  CHECK(r.loss == 0.0);
  for (double g : r.grad.data) CHECK(g == 0.0);

  target.values = SeqTensor::from_rows({{0, 2}, {3, 4}});
  LossResult r2 = loss_eval(LossKind::SquaredError, y, target);
  CHECK(testutil::close(r2.loss, 0.5));  // (1-0)^2 over 2 steps
  CHECK(testutil::close(r2.grad.at(0, 0), 1.0));

  LossTarget bad;
  bad.values = SeqTensor(2, 3);
  CHECK_THROWS_AS(loss_eval(LossKind::SquaredError, y, bad), ConfigError);
}

TEST_CASE("softmax cross entropy: two equal logits give ln 2") {
  SeqTensor y(2, 1);
  LossTarget target;
  target.labels = {0};
  LossResult r = loss_eval(LossKind::SoftmaxCrossEntropy, y, target);
  CHECK(testutil::close(r.loss, std::log(2.0)));
  CHECK(testutil::close(r.grad.at(0, 0), -0.5));
  CHECK(testutil::close(r.grad.at(1, 0), 0.5));

  target.labels = {2};
  CHECK_THROWS_AS(loss_eval(LossKind::SoftmaxCrossEntropy, y, target), DataError);
  target.labels = {-1};
  CHECK_THROWS_AS(loss_eval(LossKind::SoftmaxCrossEntropy, y, target), DataError);
}

TEST_CASE("sigmoid cross entropy: zero logit against target 1 is ln 2") {
  SeqTensor y(1, 1);
  LossTarget target;
  target.values = SeqTensor::from_rows({{1.0}});
  LossResult r = loss_eval(LossKind::SigmoidCrossEntropy, y, target);
  CHECK(testutil::close(r.loss, std::log(2.0)));
  CHECK(testutil::close(r.grad.at(0, 0), -0.5));
}

TEST_CASE("rate preservation and finiteness of forward ops") {
  Rng rng(11);
  SeqTensor x = random_tensor(3, 57, rng);
  ConvLayer layer = random_layer(3, 4, 5, 4, rng);
  SeqTensor y = causal_conv_forward(x, layer);
  CHECK(y.length == x.length);
  CHECK(relu(x).length == x.length);
  CHECK(concat_channels(x, x).length == x.length);
  for (double v : y.data) CHECK(std::isfinite(v));
}

TEST_CASE("determinism: identical inputs produce bit-identical outputs") {
  Rng rng(13);
  ConvLayer layer = random_layer(2, 2, 3, 2, rng);
  SeqTensor x = random_tensor(2, 33, rng);
  SeqTensor y1 = causal_conv_forward(x, layer);
  SeqTensor y2 = causal_conv_forward(x, layer);
  CHECK(y1.data == y2.data);
}

TEST_CASE("finite-difference suites pass for every primitive") {
  auto reports = run_gradient_suites(1);
  REQUIRE(!reports.empty());
  for (const auto& r : reports) {
    INFO(r.name, ": max rel err ", r.max_rel_err, " over ", r.coords, " coords");
    CHECK(r.coords >= 100);
    CHECK(r.max_rel_err < kGradCheckTol);
    CHECK(r.pass);
  }
  CHECK(all_pass(reports));
}
