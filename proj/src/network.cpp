#include "ufcnn/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>

#include "ufcnn/rng.hpp"

namespace ufcnn {

const char* to_string(Variant v) {
  return v == Variant::Ufcnn ? "ufcnn" : "fcn";
}

Variant variant_from_string(const std::string& name) {
  if (name == "ufcnn") return Variant::Ufcnn;
  if (name == "fcn") return Variant::Fcn;
  throw ConfigError("unknown variant: " + name);
}

void NetworkConfig::validate() const {
  if (levels < 1) throw ConfigError("NetworkConfig: levels must be >= 1");
  if (levels > 24) throw ConfigError("NetworkConfig: levels out of range");
  if (filters < 1) throw ConfigError("NetworkConfig: filters must be >= 1");
  if (kernel_len < 1) throw ConfigError("NetworkConfig: kernel_len must be >= 1");
  if (in_channels < 1 || out_channels < 1)
    throw ConfigError("NetworkConfig: channel counts must be >= 1");
}

namespace {

ConvLayer init_layer(int in_ch, int out_ch, int kernel, int dilation, Rng& rng) {
  ConvLayer layer(in_ch, out_ch, kernel, dilation);
  const double sigma = std::sqrt(2.0 / (double(in_ch) * kernel));
  for (double& w : layer.weights) w = sigma * rng.normal();
  return layer;  // biases stay zero
}

}  // namespace

Network build_network(const NetworkConfig& cfg, uint64_t seed) {
  cfg.validate();
  Network net;
  net.cfg_ = cfg;
  Rng rng(seed);
  const int L = cfg.levels;
  const int F = cfg.filters;
  const int K = cfg.kernel_len;
  auto dilation = [&](int level) {
    return cfg.variant == Variant::Ufcnn ? (1 << (level - 1)) : 1;
  };
  net.enc_.reserve(L);
  net.dec_.reserve(L);
  net.enc_.push_back(init_layer(cfg.in_channels, F, K, dilation(1), rng));
  for (int l = 2; l <= L; ++l) net.enc_.push_back(init_layer(F, F, K, dilation(l), rng));
  for (int l = L; l >= 1; --l) {
    const int in_ch = (l == L) ? F : 2 * F;
    net.dec_.push_back(init_layer(in_ch, F, K, dilation(l), rng));
  }
  net.out_ = init_layer(F, cfg.out_channels, 1, 1, rng);
  return net;
}

long long receptive_field(const NetworkConfig& cfg) {
  cfg.validate();
  if (cfg.variant != Variant::Ufcnn)
    throw ConfigError("receptive_field is defined for the ufcnn variant");
  // Each level contributes (K-1)*2^(l-1) past samples twice (encoder and
  // decoder); the 1x1 output layer adds none.
  long long span = 0;
  for (int l = 1; l <= cfg.levels; ++l)
    span += 2LL * (cfg.kernel_len - 1) * (1LL << (l - 1));
  return 1 + span;
}

long long parameter_count(const NetworkConfig& cfg) {
  cfg.validate();
  const long long F = cfg.filters;
  const long long K = cfg.kernel_len;
  long long total = cfg.in_channels * F * K + F;  // H1
  total += F * F * K + F;                         // GL
  total += (cfg.levels - 1) * (F * F * K + F);    // H2..HL
  total += (cfg.levels - 1) * (2 * F * F * K + F);  // G(L-1)..G1
  total += F * cfg.out_channels + cfg.out_channels;  // G0
  return total;
}

std::vector<Network::LayerRef> Network::layers() {
  std::vector<LayerRef> refs;
  refs.reserve(enc_.size() + dec_.size() + 1);
  for (size_t i = 0; i < enc_.size(); ++i)
    refs.push_back({"H" + std::to_string(i + 1), &enc_[i]});
  for (size_t i = 0; i < dec_.size(); ++i)
    refs.push_back({"G" + std::to_string(cfg_.levels - int(i)), &dec_[i]});
  refs.push_back({"G0", &out_});
  return refs;
}

std::vector<Network::ConstLayerRef> Network::layers() const {
  std::vector<ConstLayerRef> refs;
  refs.reserve(enc_.size() + dec_.size() + 1);
  for (size_t i = 0; i < enc_.size(); ++i)
    refs.push_back({"H" + std::to_string(i + 1), &enc_[i]});
  for (size_t i = 0; i < dec_.size(); ++i)
    refs.push_back({"G" + std::to_string(cfg_.levels - int(i)), &dec_[i]});
  refs.push_back({"G0", &out_});
  return refs;
}

ConvLayer& Network::encoder_layer(int level) {
  if (level < 1 || level > int(enc_.size())) throw ConfigError("encoder_layer: bad level");
  return enc_[level - 1];
}

ConvLayer& Network::decoder_layer(int level) {
  if (level < 1 || level > int(dec_.size())) throw ConfigError("decoder_layer: bad level");
  return dec_[cfg_.levels - level];
}

long long Network::parameter_count() const {
  long long total = 0;
  for (const auto& ref : layers()) total += (long long)ref.layer->parameter_count();
  return total;
}

double Network::min_abs_preactivation() const {
  if (!traced_) throw StateError("min_abs_preactivation: no forward pass recorded");
  double m = std::numeric_limits<double>::infinity();
  for (const auto& block : {trace_.enc_pre, trace_.dec_pre})
    for (const SeqTensor& t : block)
      for (double v : t.data) m = std::min(m, std::fabs(v));
  return m;
}

const SeqTensor& Network::conv_input_for_encoder(int level) const {
  if (level == 1) return trace_.input;
  if (cfg_.variant == Variant::Fcn) return trace_.pooled[level - 1];
  return trace_.enc_out[level - 2];
}

SeqTensor Network::forward(const SeqTensor& x) {
  if (x.channels != cfg_.in_channels)
    throw ConfigError("Network::forward: input channel mismatch");
  const int L = cfg_.levels;
  const bool fcn = cfg_.variant == Variant::Fcn;
  if (fcn && x.length < (1 << (L - 1)))
    throw ConfigError("Network::forward: input length " + std::to_string(x.length) +
                      " too short for pooling depth " + std::to_string(L));
  for (int l = 1; l <= L; ++l) {
    const int expected = fcn ? 1 : (1 << (l - 1));
    if (enc_[l - 1].dilation != expected || dec_[L - l].dilation != expected)
      throw ConfigError("Network::forward: level " + std::to_string(l) +
                        " dilation does not match the variant's schedule");
  }

  trace_ = Trace{};
  trace_.input = x;
  trace_.pooled.resize(L);
  trace_.pool_argmax.resize(L);
  trace_.pool_in_len.assign(L, 0);
  trace_.enc_pre.resize(L);
  trace_.enc_out.resize(L);
  trace_.dec_in.resize(L);
  trace_.dec_pre.resize(L);
  trace_.dec_out.resize(L);

  // encoder
  for (int l = 1; l <= L; ++l) {
    if (fcn && l > 1) {
      const SeqTensor& prev = trace_.enc_out[l - 2];
      MaxPool2Result pooled = maxpool2(prev);
      trace_.pool_in_len[l - 1] = prev.length;
      trace_.pool_argmax[l - 1] = std::move(pooled.argmax);
      trace_.pooled[l - 1] = std::move(pooled.values);
    }
    trace_.enc_pre[l - 1] = causal_conv_forward(conv_input_for_encoder(l), enc_[l - 1]);
    trace_.enc_out[l - 1] = relu(trace_.enc_pre[l - 1]);
  }

  // decoder, deepest level first
  for (int l = L; l >= 1; --l) {
    ConvLayer& g = dec_[L - l];
    if (l == L) {
      trace_.dec_pre[l - 1] = causal_conv_forward(trace_.enc_out[L - 1], g);
    } else {
      const SeqTensor& skip = trace_.enc_out[l - 1];
      SeqTensor up = fcn ? delay1(upsample2_zeros(trace_.dec_out[l], skip.length))
                         : trace_.dec_out[l];
      trace_.dec_in[l - 1] = concat_channels(skip, up);
      trace_.dec_pre[l - 1] = causal_conv_forward(trace_.dec_in[l - 1], g);
    }
    trace_.dec_out[l - 1] = relu(trace_.dec_pre[l - 1]);
  }

  traced_ = true;
  return causal_conv_forward(trace_.dec_out[0], out_);  // linear output
}

namespace {

void add_into(SeqTensor& dst, SeqTensor&& src) {
  if (dst.channels == 0) {
    dst = std::move(src);
    return;
  }
  for (size_t i = 0; i < dst.data.size(); ++i) dst.data[i] += src.data[i];
}

}  // namespace

void Network::backward(const SeqTensor& dL_dy) {
  if (!traced_) throw StateError("Network::backward called before forward");
  if (dL_dy.channels != cfg_.out_channels || dL_dy.length != trace_.dec_out[0].length)
    throw ConfigError("Network::backward: upstream gradient shape mismatch");
  const int L = cfg_.levels;
  const bool fcn = cfg_.variant == Variant::Fcn;

  SeqTensor g_d = causal_conv_backward(trace_.dec_out[0], out_, dL_dy);

  std::vector<SeqTensor> grad_e(L);

  // decoder, shallow to deep: g_d holds dLoss/d(d_l) entering iteration l
  for (int l = 1; l <= L; ++l) {
    SeqTensor g_pre = relu_backward(trace_.dec_pre[l - 1], g_d);
    ConvLayer& g = dec_[L - l];
    if (l == L) {
      add_into(grad_e[L - 1], causal_conv_backward(trace_.enc_out[L - 1], g, g_pre));
    } else {
      SeqTensor g_in = causal_conv_backward(trace_.dec_in[l - 1], g, g_pre);
      auto [g_skip, g_up] = split_channels(g_in, cfg_.filters);
      add_into(grad_e[l - 1], std::move(g_skip));
      g_d = fcn ? upsample2_zeros_backward(delay1_backward(g_up), trace_.dec_out[l].length)
                : std::move(g_up);
    }
  }

  // encoder, deep to shallow
  for (int l = L; l >= 1; --l) {
    SeqTensor g_pre = relu_backward(trace_.enc_pre[l - 1], grad_e[l - 1]);
    SeqTensor g_in = causal_conv_backward(conv_input_for_encoder(l), enc_[l - 1], g_pre);
    if (l > 1) {
      if (fcn)
        g_in = maxpool2_backward(g_in, trace_.pool_argmax[l - 1], trace_.pool_in_len[l - 1]);
      add_into(grad_e[l - 2], std::move(g_in));
    }
    // at l == 1, g_in is dLoss/dx; parameters do not need it
  }
}

void Network::zero_grad() {
  for (auto& ref : layers()) ref.layer->zero_grad();
}

void Network::copy_params_from(const Network& other) {
  auto dst = layers();
  auto src = other.layers();
  if (dst.size() != src.size()) throw ConfigError("copy_params_from: structure mismatch");
  for (size_t i = 0; i < dst.size(); ++i) {
    dst[i].layer->weights = src[i].layer->weights;
    dst[i].layer->bias = src[i].layer->bias;
  }
}

void Network::add_grads_from(const Network& other) {
  auto dst = layers();
  auto src = other.layers();
  if (dst.size() != src.size()) throw ConfigError("add_grads_from: structure mismatch");
  for (size_t i = 0; i < dst.size(); ++i) {
    auto& dw = dst[i].layer->grad_weights;
    auto& db = dst[i].layer->grad_bias;
    const auto& sw = src[i].layer->grad_weights;
    const auto& sb = src[i].layer->grad_bias;
    for (size_t j = 0; j < dw.size(); ++j) dw[j] += sw[j];
    for (size_t j = 0; j < db.size(); ++j) db[j] += sb[j];
  }
}

void Network::scale_grads(double factor) {
  for (auto& ref : layers()) {
    for (double& g : ref.layer->grad_weights) g *= factor;
    for (double& g : ref.layer->grad_bias) g *= factor;
  }
}

std::vector<std::vector<double>> Network::snapshot_params() const {
  std::vector<std::vector<double>> snap;
  for (const auto& ref : layers()) {
    snap.push_back(ref.layer->weights);
    snap.push_back(ref.layer->bias);
  }
  return snap;
}

void Network::restore_params(const std::vector<std::vector<double>>& snapshot) {
  auto refs = layers();
  if (snapshot.size() != refs.size() * 2)
    throw ConfigError("restore_params: snapshot shape mismatch");
  size_t idx = 0;
  for (auto& ref : refs) {
    ref.layer->weights = snapshot[idx++];
    ref.layer->bias = snapshot[idx++];
  }
}

}  // namespace ufcnn
