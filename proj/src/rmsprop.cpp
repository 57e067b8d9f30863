#include "ufcnn/rmsprop.hpp"

#include <cmath>

#include "ufcnn/errors.hpp"

namespace ufcnn {

RmsState::RmsState(const Network& net) {
  for (const auto& ref : net.layers()) {
    cache.emplace_back(ref.layer->weights.size(), 0.0);
    cache.emplace_back(ref.layer->bias.size(), 0.0);
  }
}

void rmsprop_step(std::span<double> params, std::span<const double> grads,
                  std::span<double> cache, double lr, double rho, double eps) {
  if (params.size() != grads.size() || params.size() != cache.size())
    throw ConfigError("rmsprop_step: array size mismatch");
  for (size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    cache[i] = rho * cache[i] + (1.0 - rho) * g * g;
    params[i] -= lr * g / std::sqrt(cache[i] + eps);
  }
}

void rmsprop_update(Network& net, RmsState& state, double lr, double rho, double eps) {
  auto refs = net.layers();
  if (state.cache.size() != refs.size() * 2)
    throw ConfigError("rmsprop_update: state does not match network");
  size_t idx = 0;
  for (auto& ref : refs) {
    rmsprop_step(ref.layer->weights, ref.layer->grad_weights, state.cache[idx++], lr, rho, eps);
    rmsprop_step(ref.layer->bias, ref.layer->grad_bias, state.cache[idx++], lr, rho, eps);
  }
}

}  // namespace ufcnn
