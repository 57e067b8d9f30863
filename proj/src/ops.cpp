#include "ufcnn/ops.hpp"

#include <algorithm>
#include <string>

namespace ufcnn {

ConvLayer::ConvLayer(int in_ch, int out_ch, int kernel, int dilation_)
    : in_channels(in_ch), out_channels(out_ch), kernel_len(kernel), dilation(dilation_) {
  if (in_ch <= 0 || out_ch <= 0 || kernel <= 0 || dilation_ <= 0)
    throw ConfigError("ConvLayer dimensions must be positive");
  weights.assign(size_t(out_ch) * in_ch * kernel, 0.0);
  bias.assign(size_t(out_ch), 0.0);
  grad_weights.assign(weights.size(), 0.0);
  grad_bias.assign(bias.size(), 0.0);
}

void ConvLayer::zero_grad() {
  std::fill(grad_weights.begin(), grad_weights.end(), 0.0);
  std::fill(grad_bias.begin(), grad_bias.end(), 0.0);
}

SeqTensor causal_conv_forward(const SeqTensor& x, const ConvLayer& layer) {
  if (x.channels != layer.in_channels)
    throw ConfigError("causal_conv_forward: input has " + std::to_string(x.channels) +
                      " channels, layer expects " + std::to_string(layer.in_channels));
  const int T = x.length;
  SeqTensor y(layer.out_channels, T);
  for (int o = 0; o < layer.out_channels; ++o) {
    double* __restrict yo = y.row(o);
    std::fill(yo, yo + T, layer.bias[o]);
    for (int c = 0; c < layer.in_channels; ++c) {
      const double* __restrict xc = x.row(c);
      const double* wp = &layer.weights[(size_t(o) * layer.in_channels + c) * layer.kernel_len];
      for (int k = 0; k < layer.kernel_len; ++k) {
        const int shift = k * layer.dilation;
        if (shift >= T) break;
        const double wk = wp[k];
        double* __restrict yp = yo + shift;
        const int n = T - shift;
        for (int i = 0; i < n; ++i) yp[i] += wk * xc[i];
      }
    }
  }
  return y;
}

namespace {

// Fixed-order multi-accumulator reductions: they vectorize well and keep the
// summation order independent of the optimizer's reassociation choices.
inline double dot8(const double* __restrict a, const double* __restrict b, int n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0, s4 = 0, s5 = 0, s6 = 0, s7 = 0;
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    s0 += a[i] * b[i];
    s1 += a[i + 1] * b[i + 1];
    s2 += a[i + 2] * b[i + 2];
    s3 += a[i + 3] * b[i + 3];
    s4 += a[i + 4] * b[i + 4];
    s5 += a[i + 5] * b[i + 5];
    s6 += a[i + 6] * b[i + 6];
    s7 += a[i + 7] * b[i + 7];
  }
  double s = ((s0 + s1) + (s2 + s3)) + ((s4 + s5) + (s6 + s7));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

inline double sum8(const double* __restrict a, int n) {
  double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
  int i = 0;
  for (; i + 4 <= n; i += 4) {
    s0 += a[i];
    s1 += a[i + 1];
    s2 += a[i + 2];
    s3 += a[i + 3];
  }
  double s = (s0 + s1) + (s2 + s3);
  for (; i < n; ++i) s += a[i];
  return s;
}

}  // namespace

SeqTensor causal_conv_backward(const SeqTensor& x, ConvLayer& layer, const SeqTensor& dL_dy) {
  if (x.channels != layer.in_channels)
    throw ConfigError("causal_conv_backward: input channel mismatch");
  if (dL_dy.channels != layer.out_channels || dL_dy.length != x.length)
    throw ConfigError("causal_conv_backward: upstream gradient shape mismatch");
  const int T = x.length;
  SeqTensor dx(layer.in_channels, T);
  for (int o = 0; o < layer.out_channels; ++o) {
    const double* __restrict dyo = dL_dy.row(o);
    layer.grad_bias[o] += sum8(dyo, T);
    for (int c = 0; c < layer.in_channels; ++c) {
      double* __restrict dxc = dx.row(c);
      const double* __restrict xc = x.row(c);
      const size_t base = (size_t(o) * layer.in_channels + c) * layer.kernel_len;
      const double* wp = &layer.weights[base];
      double* gw = &layer.grad_weights[base];
      for (int k = 0; k < layer.kernel_len; ++k) {
        const int shift = k * layer.dilation;
        if (shift >= T) break;
        const int n = T - shift;
        const double* __restrict dys = dyo + shift;
        gw[k] += dot8(dys, xc, n);
        const double wk = wp[k];
        for (int i = 0; i < n; ++i) dxc[i] += wk * dys[i];
      }
    }
  }
  return dx;
}

SeqTensor relu(const SeqTensor& x) {
  SeqTensor y(x.channels, x.length);
  const size_t n = x.data.size();
  for (size_t i = 0; i < n; ++i) y.data[i] = x.data[i] > 0.0 ? x.data[i] : 0.0;
  return y;
}

SeqTensor relu_backward(const SeqTensor& x, const SeqTensor& dL_dy) {
  if (!x.same_shape(dL_dy)) throw ConfigError("relu_backward: shape mismatch");
  SeqTensor dx(x.channels, x.length);
  const size_t n = x.data.size();
  for (size_t i = 0; i < n; ++i) dx.data[i] = x.data[i] > 0.0 ? dL_dy.data[i] : 0.0;
  return dx;
}

SeqTensor concat_channels(const SeqTensor& a, const SeqTensor& b) {
  if (a.length != b.length) throw ConfigError("concat_channels: length mismatch");
  SeqTensor y(a.channels + b.channels, a.length);
  std::copy(a.data.begin(), a.data.end(), y.data.begin());
  std::copy(b.data.begin(), b.data.end(), y.data.begin() + a.data.size());
  return y;
}

std::pair<SeqTensor, SeqTensor> split_channels(const SeqTensor& t, int first_channels) {
  if (first_channels <= 0 || first_channels >= t.channels)
    throw ConfigError("split_channels: bad partition");
  SeqTensor a(first_channels, t.length);
  SeqTensor b(t.channels - first_channels, t.length);
  std::copy(t.data.begin(), t.data.begin() + a.data.size(), a.data.begin());
  std::copy(t.data.begin() + a.data.size(), t.data.end(), b.data.begin());
  return {std::move(a), std::move(b)};
}

MaxPool2Result maxpool2(const SeqTensor& x) {
  const int out_len = (x.length + 1) / 2;
  MaxPool2Result r{SeqTensor(x.channels, out_len),
                   std::vector<int>(size_t(x.channels) * out_len)};
  for (int c = 0; c < x.channels; ++c) {
    const double* xc = x.row(c);
    double* yc = r.values.row(c);
    int* am = r.argmax.data() + size_t(c) * out_len;
    for (int i = 0; i < out_len; ++i) {
      const int t0 = 2 * i;
      const int t1 = t0 + 1;
      if (t1 < x.length && xc[t1] > xc[t0]) {
        yc[i] = xc[t1];
        am[i] = t1;
      } else {  // ties keep the earlier sample; a lone tail passes through
        yc[i] = xc[t0];
        am[i] = t0;
      }
    }
  }
  return r;
}

SeqTensor maxpool2_backward(const SeqTensor& dL_dy, const std::vector<int>& argmax,
                            int input_length) {
  if (dL_dy.length != (input_length + 1) / 2)
    throw ConfigError("maxpool2_backward: pooled length mismatch");
  if (argmax.size() != dL_dy.data.size())
    throw ConfigError("maxpool2_backward: argmax size mismatch");
  SeqTensor dx(dL_dy.channels, input_length);
  for (int c = 0; c < dL_dy.channels; ++c) {
    const double* gy = dL_dy.row(c);
    const int* am = argmax.data() + size_t(c) * dL_dy.length;
    double* gx = dx.row(c);
    for (int i = 0; i < dL_dy.length; ++i) gx[am[i]] += gy[i];
  }
  return dx;
}

SeqTensor upsample2_zeros(const SeqTensor& x, int target_len) {
  if (target_len != 2 * x.length && target_len != 2 * x.length - 1)
    throw ConfigError("upsample2_zeros: target length must be 2*len or 2*len-1");
  SeqTensor y(x.channels, target_len);
  for (int c = 0; c < x.channels; ++c) {
    const double* xc = x.row(c);
    double* yc = y.row(c);
    for (int i = 0; i < x.length; ++i) {
      const int t = 2 * i;
      if (t < target_len) yc[t] = xc[i];
    }
  }
  return y;
}

SeqTensor upsample2_zeros_backward(const SeqTensor& dL_dy, int source_len) {
  if (dL_dy.length != 2 * source_len && dL_dy.length != 2 * source_len - 1)
    throw ConfigError("upsample2_zeros_backward: length mismatch");
  SeqTensor dx(dL_dy.channels, source_len);
  for (int c = 0; c < dL_dy.channels; ++c) {
    const double* gy = dL_dy.row(c);
    double* gx = dx.row(c);
    for (int i = 0; i < source_len; ++i) {
      const int t = 2 * i;
      gx[i] = t < dL_dy.length ? gy[t] : 0.0;
    }
  }
  return dx;
}

SeqTensor delay1(const SeqTensor& x) {
  SeqTensor y(x.channels, x.length);
  for (int c = 0; c < x.channels; ++c) {
    const double* xc = x.row(c);
    double* yc = y.row(c);
    yc[0] = 0.0;
    std::copy(xc, xc + x.length - 1, yc + 1);
  }
  return y;
}

SeqTensor delay1_backward(const SeqTensor& dL_dy) {
  SeqTensor dx(dL_dy.channels, dL_dy.length);
  for (int c = 0; c < dL_dy.channels; ++c) {
    const double* gy = dL_dy.row(c);
    double* gx = dx.row(c);
    std::copy(gy + 1, gy + dL_dy.length, gx);
    gx[dL_dy.length - 1] = 0.0;
  }
  return dx;
}

}  // namespace ufcnn
