#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ufcnn/dataset.hpp"
#include "ufcnn/network.hpp"

namespace ufcnn {

enum class Metric { MsePerStep, LoglikPerStep, Accuracy };

const char* to_string(Metric m);
Metric metric_from_string(const std::string& name);
Metric default_metric(LossKind kind);
bool metric_higher_is_better(Metric m);

struct TrainConfig {
  double base_lr = 1e-3;
  long long lr_halve_at = -1;  // iteration after which the rate is halved; -1: total_iters/2
  long long total_iters = 0;
  double rms_rho = 0.9;
  double rms_eps = 1e-6;
  int batch_size = 4;
  long long eval_every = 100;
  uint64_t seed = 0;
  int threads = 1;  // batch replicas run in parallel; results do not depend on this
};

struct EvalPoint {
  long long iteration = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
};

struct TrainResult {
  Network net;  // best-validation parameters
  std::vector<EvalPoint> history;
  double best_val = 0.0;
  long long best_iteration = 0;
};

// Mean metric over sequences, each sequence contributing its per-time-step
// average. The metric must match the network's loss kind.
double evaluate(const Network& net, const std::vector<Sequence>& seqs, Metric metric,
                int threads = 1);

// Seeded mini-batch SGD with RMSProp: sample batch with replacement, forward,
// loss, backward, step; the learning rate halves once. Aborts with
// DivergenceError on a non-finite loss. Bit-reproducible for a fixed seed.
TrainResult train(Network net, const Dataset& data, const TrainConfig& cfg);

void write_history_csv(const std::string& path, const std::vector<EvalPoint>& history);
std::vector<EvalPoint> load_history_csv(const std::string& path);

}  // namespace ufcnn
