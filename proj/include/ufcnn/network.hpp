#pragma once

#include <string>
#include <vector>

#include "ufcnn/loss.hpp"
#include "ufcnn/ops.hpp"

namespace ufcnn {

// Ufcnn: every level runs at the input rate and level l uses dilation
// 2^(l-1). Fcn: all dilations are 1, levels below the first are entered
// through a 2x max-pool and rejoined through zero-insertion upsampling.
enum class Variant { Ufcnn, Fcn };

const char* to_string(Variant v);
Variant variant_from_string(const std::string& name);

struct NetworkConfig {
  Variant variant = Variant::Ufcnn;
  int levels = 1;
  int filters = 16;
  int kernel_len = 5;
  int in_channels = 1;
  int out_channels = 1;
  LossKind loss = LossKind::SquaredError;

  void validate() const;
};

// Multiresolution encoder/decoder of causal convolutions. Encoder layers
// H1..HL feed decoder layers GL..G1; each decoder level below the deepest
// consumes the concatenation of the same-level encoder activation and the
// deeper decoder output. The 1x1 output layer G0 is linear so the network
// can produce negative values.
class Network {
 public:
  Network() = default;

  const NetworkConfig& config() const { return cfg_; }

  // Caches activations for backward; output length equals input length.
  SeqTensor forward(const SeqTensor& x);

  // Accumulates dLoss/dparam into every layer's grad buffers. Requires a
  // prior forward; repeated calls keep accumulating.
  void backward(const SeqTensor& dL_dy);

  void zero_grad();

  struct LayerRef {
    std::string name;
    ConvLayer* layer;
  };
  struct ConstLayerRef {
    std::string name;
    const ConvLayer* layer;
  };
  // H1..HL, GL..G1, G0 in graph order.
  std::vector<LayerRef> layers();
  std::vector<ConstLayerRef> layers() const;

  ConvLayer& encoder_layer(int level);  // 1-based
  ConvLayer& decoder_layer(int level);
  ConvLayer& output_layer() { return out_; }

  long long parameter_count() const;

  // Smallest |pre-activation| seen by the last forward pass. Finite
  // difference probes use it to keep test points away from rectifier kinks.
  double min_abs_preactivation() const;

  // Parameter plumbing for the optimizer and for batch replicas.
  void copy_params_from(const Network& other);
  void add_grads_from(const Network& other);
  void scale_grads(double factor);
  std::vector<std::vector<double>> snapshot_params() const;
  void restore_params(const std::vector<std::vector<double>>& snapshot);

 private:
  friend Network build_network(const NetworkConfig& cfg, uint64_t seed);

  struct Trace {
    SeqTensor input;
    std::vector<SeqTensor> pooled;  // fcn: input to H_l for l >= 2
    std::vector<std::vector<int>> pool_argmax;
    std::vector<int> pool_in_len;
    std::vector<SeqTensor> enc_pre, enc_out;
    std::vector<SeqTensor> dec_in;  // concat feeding G_l for l < L
    std::vector<SeqTensor> dec_pre, dec_out;
  };

  const SeqTensor& conv_input_for_encoder(int level) const;

  NetworkConfig cfg_;
  std::vector<ConvLayer> enc_;  // H1..HL
  std::vector<ConvLayer> dec_;  // GL..G1 (dec_[0] is the deepest)
  ConvLayer out_;               // G0

  Trace trace_;
  bool traced_ = false;
};

// Weights ~ N(0, 2 / (fan_in * kernel_len)), biases zero; deterministic for
// a fixed seed.
Network build_network(const NetworkConfig& cfg, uint64_t seed);

// Number of past input samples that can influence one output sample:
// 1 + 2*(K-1)*(2^L - 1). Defined for the ufcnn variant.
long long receptive_field(const NetworkConfig& cfg);

// Closed-form parameter count; affine in the number of levels.
long long parameter_count(const NetworkConfig& cfg);

}  // namespace ufcnn
