#pragma once

#include <string>
#include <vector>

#include "ufcnn/seq_tensor.hpp"

namespace ufcnn {

enum class LossKind { SquaredError, SoftmaxCrossEntropy, SigmoidCrossEntropy };

const char* to_string(LossKind kind);
LossKind loss_kind_from_string(const std::string& name);

// Which field is read depends on the loss kind: `values` for SquaredError
// (unconstrained reals) and SigmoidCrossEntropy (per-channel binaries),
// `labels` for SoftmaxCrossEntropy (one class index per time-step).
struct LossTarget {
  SeqTensor values;
  std::vector<int> labels;
};

struct LossResult {
  double loss = 0.0;
  SeqTensor grad;  // dL/dy, same shape as y
};

// All three losses average over time-steps, so the reported scalar is a
// per-time-step figure regardless of sequence length.
LossResult loss_eval(LossKind kind, const SeqTensor& y, const LossTarget& target);

}  // namespace ufcnn
