#pragma once

#include <span>
#include <vector>

#include "ufcnn/network.hpp"

namespace ufcnn {

// Running mean of squared gradients, one vector per parameter array in
// Network::layers() order (weights then bias per layer), zero-initialized.
// Entries are nonnegative by construction.
struct RmsState {
  std::vector<std::vector<double>> cache;

  RmsState() = default;
  explicit RmsState(const Network& net);
};

// cache <- rho*cache + (1-rho)*g^2; param <- param - lr*g/sqrt(cache + eps).
void rmsprop_step(std::span<double> params, std::span<const double> grads,
                  std::span<double> cache, double lr, double rho, double eps);

// Applies rmsprop_step to every parameter array of the network.
void rmsprop_update(Network& net, RmsState& state, double lr, double rho, double eps);

}  // namespace ufcnn
