#pragma once

#include <cmath>

#include "ufcnn/ops.hpp"
#include "ufcnn/rng.hpp"

namespace testutil {

// Definition-level reference convolution: y[o,t] = b[o] + sum_c sum_k
// w[o,c,k] * x[c, t-k*d], written as the plain quadruple loop so it shares
// no code path with the optimized kernel it checks.
inline ufcnn::SeqTensor naive_conv(const ufcnn::SeqTensor& x, const ufcnn::ConvLayer& layer) {
  ufcnn::SeqTensor y(layer.out_channels, x.length);
  for (int o = 0; o < layer.out_channels; ++o) {
    for (int t = 0; t < x.length; ++t) {
      double acc = layer.bias[o];
      for (int c = 0; c < layer.in_channels; ++c) {
        for (int k = 0; k < layer.kernel_len; ++k) {
          const int tau = t - k * layer.dilation;
          if (tau >= 0) acc += layer.w(o, c, k) * x.at(c, tau);
        }
      }
      y.at(o, t) = acc;
    }
  }
  return y;
}

inline ufcnn::SeqTensor random_tensor(int channels, int length, ufcnn::Rng& rng,
                                      double scale = 1.0) {
  ufcnn::SeqTensor t(channels, length);
  for (double& v : t.data) v = scale * rng.normal();
  return t;
}

inline ufcnn::ConvLayer random_layer(int in_ch, int out_ch, int kernel, int dilation,
                                     ufcnn::Rng& rng) {
  ufcnn::ConvLayer layer(in_ch, out_ch, kernel, dilation);
  for (double& w : layer.weights) w = rng.normal();
  for (double& b : layer.bias) b = rng.normal();
  return layer;
}

inline bool close(double a, double b, double tol = 1e-12) { return std::fabs(a - b) <= tol; }

}  // namespace testutil
