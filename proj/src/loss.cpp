#include "ufcnn/loss.hpp"

#include <cmath>

#include "ufcnn/errors.hpp"

namespace ufcnn {

const char* to_string(LossKind kind) {
  switch (kind) {
    case LossKind::SquaredError: return "squared_error";
    case LossKind::SoftmaxCrossEntropy: return "softmax_cross_entropy";
    case LossKind::SigmoidCrossEntropy: return "sigmoid_cross_entropy";
  }
  return "?";
}

LossKind loss_kind_from_string(const std::string& name) {
  if (name == "squared_error") return LossKind::SquaredError;
  if (name == "softmax_cross_entropy") return LossKind::SoftmaxCrossEntropy;
  if (name == "sigmoid_cross_entropy") return LossKind::SigmoidCrossEntropy;
  throw ConfigError("unknown loss kind: " + name);
}

namespace {

LossResult squared_error(const SeqTensor& y, const LossTarget& target) {
  if (!target.values.same_shape(y))
    throw ConfigError("squared_error: target shape mismatch");
  LossResult r;
  r.grad = SeqTensor(y.channels, y.length);
  const double inv_t = 1.0 / y.length;
  double acc = 0.0;
  for (size_t i = 0; i < y.data.size(); ++i) {
    const double d = y.data[i] - target.values.data[i];
    acc += d * d;
    r.grad.data[i] = 2.0 * d * inv_t;
  }
  r.loss = acc * inv_t;
  return r;
}

LossResult softmax_cross_entropy(const SeqTensor& y, const LossTarget& target) {
  if (int(target.labels.size()) != y.length)
    throw ConfigError("softmax_cross_entropy: one class index per time-step required");
  LossResult r;
  r.grad = SeqTensor(y.channels, y.length);
  const double inv_t = 1.0 / y.length;
  double acc = 0.0;
  std::vector<double> p(y.channels);
  for (int t = 0; t < y.length; ++t) {
    const int cls = target.labels[t];
    if (cls < 0 || cls >= y.channels)
      throw DataError("softmax_cross_entropy: class index " + std::to_string(cls) +
                      " out of range at step " + std::to_string(t));
    double mx = y.at(0, t);
    for (int c = 1; c < y.channels; ++c) mx = std::max(mx, y.at(c, t));
    double z = 0.0;
    for (int c = 0; c < y.channels; ++c) {
      p[c] = std::exp(y.at(c, t) - mx);
      z += p[c];
    }
    acc += -(y.at(cls, t) - mx - std::log(z));
    for (int c = 0; c < y.channels; ++c)
      r.grad.at(c, t) = (p[c] / z - (c == cls ? 1.0 : 0.0)) * inv_t;
  }
  r.loss = acc * inv_t;
  return r;
}

LossResult sigmoid_cross_entropy(const SeqTensor& y, const LossTarget& target) {
  if (!target.values.same_shape(y))
    throw ConfigError("sigmoid_cross_entropy: target shape mismatch");
  LossResult r;
  r.grad = SeqTensor(y.channels, y.length);
  const double inv_t = 1.0 / y.length;
  double acc = 0.0;
  for (size_t i = 0; i < y.data.size(); ++i) {
    const double v = y.data[i];
    const double tau = target.values.data[i];
    // max(v,0) - v*tau + log(1 + e^-|v|): stable for both logit signs
    acc += std::max(v, 0.0) - v * tau + std::log1p(std::exp(-std::fabs(v)));
    const double sig = 1.0 / (1.0 + std::exp(-v));
    r.grad.data[i] = (sig - tau) * inv_t;
  }
  r.loss = acc * inv_t;
  return r;
}

}  // namespace

LossResult loss_eval(LossKind kind, const SeqTensor& y, const LossTarget& target) {
  switch (kind) {
    case LossKind::SquaredError: return squared_error(y, target);
    case LossKind::SoftmaxCrossEntropy: return softmax_cross_entropy(y, target);
    case LossKind::SigmoidCrossEntropy: return sigmoid_cross_entropy(y, target);
  }
  throw ConfigError("loss_eval: unknown loss kind");
}

}  // namespace ufcnn
