#pragma once

#include <utility>
#include <vector>

#include "ufcnn/seq_tensor.hpp"

namespace ufcnn {

// Causal dilated convolution parameters plus gradient accumulators.
// weights are indexed [out][in][k]; tap k reads k*dilation steps into the
// past, so the forward output at time t never touches inputs after t.
struct ConvLayer {
  int in_channels = 0;
  int out_channels = 0;
  int kernel_len = 0;
  int dilation = 1;
  std::vector<double> weights;  // out_channels * in_channels * kernel_len
  std::vector<double> bias;     // out_channels
  std::vector<double> grad_weights;
  std::vector<double> grad_bias;

  ConvLayer() = default;
  ConvLayer(int in_ch, int out_ch, int kernel, int dilation_);

  double& w(int o, int c, int k) {
    return weights[(size_t(o) * in_channels + c) * kernel_len + k];
  }
  double w(int o, int c, int k) const {
    return weights[(size_t(o) * in_channels + c) * kernel_len + k];
  }
  double& gw(int o, int c, int k) {
    return grad_weights[(size_t(o) * in_channels + c) * kernel_len + k];
  }

  size_t parameter_count() const { return weights.size() + bias.size(); }
  void zero_grad();
};

// y[o,t] = bias[o] + sum_c sum_k w[o,c,k] * x[c, t - k*dilation],
// with x[c, tau] = 0 for tau < 0. Output length equals input length.
SeqTensor causal_conv_forward(const SeqTensor& x, const ConvLayer& layer);

// Returns dL/dx and accumulates dL/dw, dL/db into the layer's grad buffers.
SeqTensor causal_conv_backward(const SeqTensor& x, ConvLayer& layer,
                               const SeqTensor& dL_dy);

SeqTensor relu(const SeqTensor& x);
// Gate on the forward input: passes dL_dy where x > 0, zero elsewhere
// (including at x == 0 exactly).
SeqTensor relu_backward(const SeqTensor& x, const SeqTensor& dL_dy);

// a's channels first. Lengths must match.
SeqTensor concat_channels(const SeqTensor& a, const SeqTensor& b);
// Inverse of concat_channels; also the backward of concat.
std::pair<SeqTensor, SeqTensor> split_channels(const SeqTensor& t, int first_channels);

struct MaxPool2Result {
  SeqTensor values;         // length ceil(input/2); a lone final sample passes through
  std::vector<int> argmax;  // winning input time per (channel, pooled index)
};
// Window max over (2i, 2i+1); ties keep the earlier index.
MaxPool2Result maxpool2(const SeqTensor& x);
SeqTensor maxpool2_backward(const SeqTensor& dL_dy, const std::vector<int>& argmax,
                            int input_length);

// y[c,2i] = x[c,i], odd positions zero. target_len must be 2*len or 2*len-1.
SeqTensor upsample2_zeros(const SeqTensor& x, int target_len);
SeqTensor upsample2_zeros_backward(const SeqTensor& dL_dy, int source_len);

// One-step delay with zero fill at t = 0. A pooled sample summarizes two
// input steps; reinjecting it at the earlier of the two would let the
// decoder read one step ahead, so the decimated decoder delays the
// upsampled stream by one sample.
SeqTensor delay1(const SeqTensor& x);
SeqTensor delay1_backward(const SeqTensor& dL_dy);

}  // namespace ufcnn
