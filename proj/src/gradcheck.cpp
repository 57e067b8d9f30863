#include "ufcnn/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "ufcnn/network.hpp"
#include "ufcnn/rng.hpp"

namespace ufcnn {

namespace {

double rel_err(double analytic, double numeric) {
  const double denom = std::max({1.0, std::fabs(analytic), std::fabs(numeric)});
  return std::fabs(analytic - numeric) / denom;
}

SeqTensor random_tensor(int channels, int length, Rng& rng, double scale = 1.0) {
  SeqTensor t(channels, length);
  for (double& v : t.data) v = scale * rng.normal();
  return t;
}

// Probe functional L(y) = sum_i r_i * y_i; its gradient wrt y is r.
double probe(const SeqTensor& y, const SeqTensor& r) {
  double s = 0.0;
  for (size_t i = 0; i < y.data.size(); ++i) s += y.data[i] * r.data[i];
  return s;
}

struct Suite {
  GradCheckReport report;

  explicit Suite(std::string name) { report.name = std::move(name); }

  void record(double analytic, double numeric) {
    report.max_rel_err = std::max(report.max_rel_err, rel_err(analytic, numeric));
    ++report.coords;
  }

  GradCheckReport finish() {
    report.pass = report.coords >= 100 && report.max_rel_err < kGradCheckTol;
    return report;
  }
};

// Central difference of a scalar function along one coordinate.
double central_diff(std::vector<double>& storage, size_t idx,
                    const std::function<double()>& eval) {
  const double saved = storage[idx];
  storage[idx] = saved + kGradCheckStep;
  const double up = eval();
  storage[idx] = saved - kGradCheckStep;
  const double down = eval();
  storage[idx] = saved;
  return (up - down) / (2.0 * kGradCheckStep);
}

GradCheckReport conv_suite(uint64_t seed) {
  Suite suite("causal-conv");
  Rng rng(seed);
  struct Case {
    int in, out, k, d, t;
  };
  const Case cases[] = {{1, 1, 1, 1, 8}, {2, 3, 2, 1, 16}, {3, 2, 3, 2, 17},
                        {2, 2, 5, 4, 33}, {1, 4, 2, 8, 20}};
  for (const Case& cs : cases) {
    ConvLayer layer(cs.in, cs.out, cs.k, cs.d);
    for (double& w : layer.weights) w = rng.normal();
    for (double& b : layer.bias) b = rng.normal();
    SeqTensor x = random_tensor(cs.in, cs.t, rng);
    SeqTensor r = random_tensor(cs.out, cs.t, rng);

    ConvLayer work = layer;
    SeqTensor dx = causal_conv_backward(x, work, r);

    auto eval = [&] { return probe(causal_conv_forward(x, layer), r); };
    for (size_t i = 0; i < x.data.size(); ++i)
      suite.record(dx.data[i], central_diff(x.data, i, eval));
    for (size_t i = 0; i < layer.weights.size(); ++i)
      suite.record(work.grad_weights[i], central_diff(layer.weights, i, eval));
    for (size_t i = 0; i < layer.bias.size(); ++i)
      suite.record(work.grad_bias[i], central_diff(layer.bias, i, eval));
  }
  return suite.finish();
}

GradCheckReport relu_suite(uint64_t seed) {
  Suite suite("relu");
  Rng rng(seed);
  for (int rep = 0; rep < 3; ++rep) {
    SeqTensor x(4, 16);
    // keep samples away from the kink at 0 so the difference quotient is exact
    for (double& v : x.data) {
      const double u = rng.normal();
      v = (u >= 0 ? 1.0 : -1.0) * (0.05 + std::fabs(u));
    }
    SeqTensor r = random_tensor(4, 16, rng);
    SeqTensor dx = relu_backward(x, r);
    auto eval = [&] { return probe(relu(x), r); };
    for (size_t i = 0; i < x.data.size(); ++i)
      suite.record(dx.data[i], central_diff(x.data, i, eval));
  }
  return suite.finish();
}

// Two convolution branches joined by concat and read through a third layer:
// checks that concat's backward routes rows to the correct operand.
GradCheckReport concat_suite(uint64_t seed) {
  Suite suite("concat-split");
  Rng rng(seed);
  const int t = 24;
  ConvLayer conv_a(2, 3, 2, 1), conv_b(1, 2, 3, 2), conv_c(5, 2, 1, 1);
  for (ConvLayer* l : {&conv_a, &conv_b, &conv_c}) {
    for (double& w : l->weights) w = rng.normal();
    for (double& b : l->bias) b = rng.normal();
  }
  SeqTensor x1 = random_tensor(2, t, rng);
  SeqTensor x2 = random_tensor(1, t, rng);
  SeqTensor r = random_tensor(2, t, rng);

  auto eval = [&] {
    SeqTensor joined = concat_channels(causal_conv_forward(x1, conv_a),
                                       causal_conv_forward(x2, conv_b));
    return probe(causal_conv_forward(joined, conv_c), r);
  };

  ConvLayer wa = conv_a, wb = conv_b, wc = conv_c;
  SeqTensor a = causal_conv_forward(x1, conv_a);
  SeqTensor b = causal_conv_forward(x2, conv_b);
  SeqTensor joined = concat_channels(a, b);
  SeqTensor d_joined = causal_conv_backward(joined, wc, r);
  auto [da, db] = split_channels(d_joined, a.channels);
  SeqTensor dx1 = causal_conv_backward(x1, wa, da);
  SeqTensor dx2 = causal_conv_backward(x2, wb, db);

  for (size_t i = 0; i < x1.data.size(); ++i)
    suite.record(dx1.data[i], central_diff(x1.data, i, eval));
  for (size_t i = 0; i < x2.data.size(); ++i)
    suite.record(dx2.data[i], central_diff(x2.data, i, eval));
  for (size_t i = 0; i < conv_a.weights.size(); ++i)
    suite.record(wa.grad_weights[i], central_diff(conv_a.weights, i, eval));
  for (size_t i = 0; i < conv_b.weights.size(); ++i)
    suite.record(wb.grad_weights[i], central_diff(conv_b.weights, i, eval));
  for (size_t i = 0; i < conv_c.weights.size(); ++i)
    suite.record(wc.grad_weights[i], central_diff(conv_c.weights, i, eval));
  for (size_t i = 0; i < conv_a.bias.size(); ++i)
    suite.record(wa.grad_bias[i], central_diff(conv_a.bias, i, eval));
  for (size_t i = 0; i < conv_b.bias.size(); ++i)
    suite.record(wb.grad_bias[i], central_diff(conv_b.bias, i, eval));
  for (size_t i = 0; i < conv_c.bias.size(); ++i)
    suite.record(wc.grad_bias[i], central_diff(conv_c.bias, i, eval));
  return suite.finish();
}

// Pool inputs get a minimum pairwise gap so the argmax is stable under +-h.
SeqTensor pool_safe_tensor(int channels, int length, Rng& rng) {
  SeqTensor x = random_tensor(channels, length, rng);
  for (int c = 0; c < channels; ++c) {
    double* row = x.row(c);
    for (int i = 0; 2 * i + 1 < length; ++i) {
      if (std::fabs(row[2 * i] - row[2 * i + 1]) < 1e-3) row[2 * i] += 0.01;
    }
  }
  return x;
}

GradCheckReport maxpool_suite(uint64_t seed) {
  Suite suite("maxpool2");
  Rng rng(seed);
  for (int length : {16, 17, 31}) {
    SeqTensor x = pool_safe_tensor(3, length, rng);
    SeqTensor r = random_tensor(3, (length + 1) / 2, rng);
    MaxPool2Result pooled = maxpool2(x);
    SeqTensor dx = maxpool2_backward(r, pooled.argmax, length);
    auto eval = [&] { return probe(maxpool2(x).values, r); };
    for (size_t i = 0; i < x.data.size(); ++i)
      suite.record(dx.data[i], central_diff(x.data, i, eval));
  }
  return suite.finish();
}

GradCheckReport upsample_suite(uint64_t seed) {
  Suite suite("upsample2-zeros");
  Rng rng(seed);
  for (int source : {8, 9, 16}) {
    for (int target : {2 * source, 2 * source - 1}) {
      SeqTensor x = random_tensor(2, source, rng);
      SeqTensor r = random_tensor(2, target, rng);
      SeqTensor dx = upsample2_zeros_backward(r, source);
      auto eval = [&] { return probe(upsample2_zeros(x, target), r); };
      for (size_t i = 0; i < x.data.size(); ++i)
        suite.record(dx.data[i], central_diff(x.data, i, eval));
    }
  }
  // pool followed by upsample back to the original rate
  for (int length : {12, 13}) {
    SeqTensor x = pool_safe_tensor(2, length, rng);
    SeqTensor r = random_tensor(2, length, rng);
    MaxPool2Result pooled = maxpool2(x);
    SeqTensor dx = maxpool2_backward(upsample2_zeros_backward(r, pooled.values.length),
                                     pooled.argmax, length);
    auto eval = [&] { return probe(upsample2_zeros(maxpool2(x).values, length), r); };
    for (size_t i = 0; i < x.data.size(); ++i)
      suite.record(dx.data[i], central_diff(x.data, i, eval));
  }
  return suite.finish();
}

GradCheckReport delay_suite(uint64_t seed) {
  Suite suite("delay1");
  Rng rng(seed);
  for (int length : {16, 25}) {
    SeqTensor x = random_tensor(4, length, rng);
    SeqTensor r = random_tensor(4, length, rng);
    SeqTensor dx = delay1_backward(r);
    auto eval = [&] { return probe(delay1(x), r); };
    for (size_t i = 0; i < x.data.size(); ++i)
      suite.record(dx.data[i], central_diff(x.data, i, eval));
  }
  return suite.finish();
}

GradCheckReport loss_suite(uint64_t seed) {
  Suite suite("losses");
  Rng rng(seed);
  const int channels = 5, length = 9;

  {
    SeqTensor y = random_tensor(channels, length, rng);
    LossTarget target;
    target.values = random_tensor(channels, length, rng);
    LossResult res = loss_eval(LossKind::SquaredError, y, target);
    auto eval = [&] { return loss_eval(LossKind::SquaredError, y, target).loss; };
    for (size_t i = 0; i < y.data.size(); ++i)
      suite.record(res.grad.data[i], central_diff(y.data, i, eval));
  }
  {
    SeqTensor y = random_tensor(channels, length, rng);
    LossTarget target;
    target.labels.resize(length);
    for (int& cls : target.labels) cls = rng.uniform_int(channels);
    LossResult res = loss_eval(LossKind::SoftmaxCrossEntropy, y, target);
    auto eval = [&] { return loss_eval(LossKind::SoftmaxCrossEntropy, y, target).loss; };
    for (size_t i = 0; i < y.data.size(); ++i)
      suite.record(res.grad.data[i], central_diff(y.data, i, eval));
  }
  {
    SeqTensor y = random_tensor(channels, length, rng);
    LossTarget target;
    target.values = SeqTensor(channels, length);
    for (double& v : target.values.data) v = rng.uniform() < 0.5 ? 0.0 : 1.0;
    LossResult res = loss_eval(LossKind::SigmoidCrossEntropy, y, target);
    auto eval = [&] { return loss_eval(LossKind::SigmoidCrossEntropy, y, target).loss; };
    for (size_t i = 0; i < y.data.size(); ++i)
      suite.record(res.grad.data[i], central_diff(y.data, i, eval));
  }
  return suite.finish();
}

GradCheckReport network_suite(Variant variant, uint64_t seed) {
  Suite suite(variant == Variant::Ufcnn ? "network-ufcnn" : "network-fcn");
  NetworkConfig cfg;
  cfg.variant = variant;
  cfg.levels = 2;
  cfg.filters = 3;
  cfg.kernel_len = 2;
  cfg.in_channels = 2;
  cfg.out_channels = 2;
  const int length = 12;

  // pick a test point whose pre-activations clear the rectifier kinks
  Network net;
  SeqTensor x(1, 1), target_values(1, 1);
  for (uint64_t attempt = 0;; ++attempt) {
    Rng rng(mix_seed(seed, attempt));
    net = build_network(cfg, rng.next_u64());
    x = random_tensor(cfg.in_channels, length, rng);
    target_values = random_tensor(cfg.out_channels, length, rng);
    net.forward(x);
    if (net.min_abs_preactivation() > 1e-3 || attempt > 32) break;
  }
  LossTarget target;
  target.values = target_values;

  auto eval = [&] {
    return loss_eval(cfg.loss, net.forward(x), target).loss;
  };

  net.zero_grad();
  LossResult res = loss_eval(cfg.loss, net.forward(x), target);
  net.backward(res.grad);

  for (auto& ref : net.layers()) {
    for (size_t i = 0; i < ref.layer->weights.size(); ++i)
      suite.record(ref.layer->grad_weights[i], central_diff(ref.layer->weights, i, eval));
    for (size_t i = 0; i < ref.layer->bias.size(); ++i)
      suite.record(ref.layer->grad_bias[i], central_diff(ref.layer->bias, i, eval));
  }
  return suite.finish();
}

}  // namespace

std::vector<GradCheckReport> run_gradient_suites(uint64_t seed) {
  std::vector<GradCheckReport> reports;
  reports.push_back(conv_suite(mix_seed(seed, 1)));
  reports.push_back(relu_suite(mix_seed(seed, 2)));
  reports.push_back(concat_suite(mix_seed(seed, 3)));
  reports.push_back(maxpool_suite(mix_seed(seed, 4)));
  reports.push_back(upsample_suite(mix_seed(seed, 5)));
  reports.push_back(delay_suite(mix_seed(seed, 6)));
  reports.push_back(loss_suite(mix_seed(seed, 7)));
  reports.push_back(network_suite(Variant::Ufcnn, mix_seed(seed, 8)));
  reports.push_back(network_suite(Variant::Fcn, mix_seed(seed, 9)));
  return reports;
}

bool all_pass(const std::vector<GradCheckReport>& reports) {
  for (const auto& r : reports)
    if (!r.pass) return false;
  return !reports.empty();
}

}  // namespace ufcnn
