#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "ufcnn/market.hpp"
#include "ufcnn/tracking.hpp"
#include "ufcnn/trainer.hpp"

namespace ufcnn {

// Reduced-scale preset: keeps the level/filter contrast visible while a full
// grid stays within a desktop-CPU budget.
struct DeskScale {
  static constexpr int kTrainSequences = 100;
  static constexpr int kValSequences = 20;
  static constexpr int kSequenceLength = 1000;
  static constexpr long long kIterations = 5000;
  static constexpr int kFilters[2] = {16, 32};
};

// Validation MSE over the (levels x filters) grid for one or both variants,
// all runs sharing one generated tracking dataset and variant-independent
// run seeds (the level-1 rows of the two variants are architecturally the
// same network, and come out bit-identical).
struct AblationConfig {
  std::vector<int> levels{1, 2, 3};
  std::vector<int> filters{DeskScale::kFilters[0], DeskScale::kFilters[1]};
  bool include_ufcnn = true;
  bool include_fcn = true;
  int kernel_len = 5;
  uint64_t seed = 1;
  int n_train = DeskScale::kTrainSequences;
  int n_val = DeskScale::kValSequences;
  int seq_length = DeskScale::kSequenceLength;
  long long iters = DeskScale::kIterations;
  int batch_size = 4;
  long long eval_every = 250;
  int threads = 0;  // 0: hardware concurrency
  tracking::TrackingParams tracking_params{};
};

struct AblationCell {
  Variant variant = Variant::Ufcnn;
  int levels = 0;
  int filters = 0;
  double val_mse = 0.0;  // +inf when training diverged
  bool diverged = false;
  long long best_iteration = 0;
  std::vector<EvalPoint> history;
};

struct AblationResult {
  AblationConfig config;
  std::vector<AblationCell> cells;
  double seconds = 0.0;

  const AblationCell* find(Variant v, int levels, int filters) const;
};

AblationResult run_ablation(const AblationConfig& cfg, std::ostream* progress = nullptr);

std::string format_ablation_tables(const AblationResult& result);
void write_ablation_csv(const AblationResult& result, const std::string& dir);

// Synthetic-quote trading run: label with the optimal-action oracle, train a
// softmax classifier on the training split, then compare model / oracle /
// uniform on the validation split.
struct TradingExperimentConfig {
  int n_train = 24;
  int n_val = 6;
  int seq_length = 1000;
  double vol = 0.01;
  double spread = 0.1;
  market::SimParams sim{};
  Variant variant = Variant::Ufcnn;
  int levels = 2;
  int filters = 16;
  int kernel_len = 5;
  long long iters = 1500;
  int batch_size = 4;
  long long eval_every = 100;
  double base_lr = 1e-3;
  uint64_t seed = 7;
  bool standardize = true;
  int threads = 0;
};

struct TradingExperimentReport {
  market::PnlReportRow model;
  market::PnlReportRow viterbi;
  market::PnlReportRow uniform;
  Network net;
  ChannelStats stats;
  std::vector<EvalPoint> history;
};

TradingExperimentReport run_trading_experiment(const TradingExperimentConfig& cfg,
                                               std::ostream* progress = nullptr);

}  // namespace ufcnn
