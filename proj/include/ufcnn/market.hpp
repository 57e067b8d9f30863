#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ufcnn/dataset.hpp"
#include "ufcnn/rng.hpp"

namespace ufcnn::market {

// One market observation: best quotes and their sizes, plus any number of
// extra indicator channels.
struct Tick {
  double bidpx = 0, bidsz = 0, askpx = 0, asksz = 0;
  std::vector<double> indicators;
};

// Class indices are fixed; classifier logits use the same order.
enum class Action : int {
  BuyAtBid = 0,
  SellAtBid = 1,
  DoNothing = 2,
  BuyAtAsk = 3,
  SellAtAsk = 4,
};
inline constexpr int kNumActions = 5;

const char* to_string(Action a);

struct SimParams {
  int max_position = 3;
  double cost_per_trade = 0.02;
};

// Volume-weighted market price; midpoint when both sizes are zero.
double mktpx(const Tick& t);

// Profit of an action sequence: per step, mark the running position to the
// next market price, then execute the step's action if the position bound
// allows (violations are silently skipped). The action at the final step is
// never executed and nothing is force-liquidated.
double simulate_pnl(std::span<const Tick> ticks, std::span<const Action> actions,
                    const SimParams& p);

struct OptimalActions {
  std::vector<Action> actions;  // final step fixed to DoNothing
  double pnl = 0.0;
};

// Dynamic program over position states; returns an action sequence whose
// replay through simulate_pnl reproduces pnl exactly, and no action sequence
// can earn more. Ties prefer DoNothing, then the smaller resulting
// |position|, then the smaller action index.
OptimalActions optimal_actions(std::span<const Tick> ticks, const SimParams& p);

// i.i.d. uniform over the five actions.
std::vector<Action> uniform_strategy(int T, uint64_t seed);

// Seeded Gaussian random walk of the mid price (step std = vol) with a fixed
// spread and sizes uniform on [1, 10].
std::vector<Tick> synth_quotes(int T, uint64_t seed, double vol, double spread);

// CSV with header bidpx,bidsz,askpx,asksz[,...]; extra columns load as
// indicator channels.
std::vector<Tick> load_ticks(const std::string& path);
void save_ticks(const std::string& path, std::span<const Tick> ticks);

// Same CSV plus a trailing integer `action` column.
void save_labeled_ticks(const std::string& path, std::span<const Tick> ticks,
                        std::span<const Action> actions);
std::pair<std::vector<Tick>, std::vector<Action>> load_labeled_ticks(const std::string& path);

// Classifier features: channels bidpx, bidsz, askpx, asksz, indicators.
SeqTensor tick_features(std::span<const Tick> ticks);
std::vector<Action> actions_from_logits(const SeqTensor& logits);

struct PnlReportRow {
  std::string strategy;
  double profit_per_step = 0.0;
  double accuracy = 0.0;
};
void write_pnl_report(const std::string& path, const std::vector<PnlReportRow>& rows);

}  // namespace ufcnn::market
