#include "ufcnn/experiments.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

namespace ufcnn {

const AblationCell* AblationResult::find(Variant v, int levels, int filters) const {
  for (const AblationCell& cell : cells)
    if (cell.variant == v && cell.levels == levels && cell.filters == filters)
      return &cell;
  return nullptr;
}

AblationResult run_ablation(const AblationConfig& cfg, std::ostream* progress) {
  const auto started = std::chrono::steady_clock::now();
  AblationResult result;
  result.config = cfg;

  if (progress)
    *progress << "generating tracking data: " << cfg.n_train << " train / " << cfg.n_val
              << " val sequences of length " << cfg.seq_length << "\n";
  tracking::TrackingDataset ds = tracking::generate_dataset(
      cfg.tracking_params, cfg.n_train, cfg.n_val, 0, cfg.seq_length, cfg.seed);

  std::vector<Variant> variants;
  if (cfg.include_ufcnn) variants.push_back(Variant::Ufcnn);
  if (cfg.include_fcn) variants.push_back(Variant::Fcn);

  for (Variant variant : variants) {
    for (int filters : cfg.filters) {
      for (int levels : cfg.levels) {
        NetworkConfig nc;
        nc.variant = variant;
        nc.levels = levels;
        nc.filters = filters;
        nc.kernel_len = cfg.kernel_len;
        nc.in_channels = 1;
        nc.out_channels = 2;
        nc.loss = LossKind::SquaredError;

        // seed depends on (levels, filters) only, not the variant
        const uint64_t run_seed = mix_seed(cfg.seed, mix_seed(uint64_t(levels), uint64_t(filters)));

        TrainConfig tc;
        tc.total_iters = cfg.iters;
        tc.batch_size = cfg.batch_size;
        tc.eval_every = cfg.eval_every;
        tc.seed = run_seed;
        tc.threads = cfg.threads;

        AblationCell cell;
        cell.variant = variant;
        cell.levels = levels;
        cell.filters = filters;
        const auto cell_start = std::chrono::steady_clock::now();
        try {
          TrainResult tr = train(build_network(nc, run_seed), ds.data, tc);
          cell.val_mse = tr.best_val;
          cell.best_iteration = tr.best_iteration;
          cell.history = std::move(tr.history);
        } catch (const DivergenceError&) {
          cell.diverged = true;
          cell.val_mse = std::numeric_limits<double>::infinity();
        }
        if (progress) {
          const double secs =
              std::chrono::duration<double>(std::chrono::steady_clock::now() - cell_start)
                  .count();
          char line[160];
          std::snprintf(line, sizeof(line), "%-5s L=%d F=%-3d  val mse %-12.6g  (%.1fs)%s\n",
                        to_string(variant), levels, filters, cell.val_mse, secs,
                        cell.diverged ? "  [diverged]" : "");
          *progress << line << std::flush;
        }
        result.cells.push_back(std::move(cell));
      }
    }
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

std::string format_ablation_tables(const AblationResult& result) {
  std::ostringstream out;
  const AblationConfig& cfg = result.config;
  for (Variant variant : {Variant::Ufcnn, Variant::Fcn}) {
    if (variant == Variant::Ufcnn && !cfg.include_ufcnn) continue;
    if (variant == Variant::Fcn && !cfg.include_fcn) continue;
    out << (variant == Variant::Ufcnn ? "UFCNN" : "FCN")
        << " validation MSE per time-step\n";
    out << "levels\\filters";
    for (int f : cfg.filters) {
      char h[24];
      std::snprintf(h, sizeof(h), " %12d", f);
      out << h;
    }
    out << "\n";
    for (int l : cfg.levels) {
      char cellbuf[32];
      std::snprintf(cellbuf, sizeof(cellbuf), "%-14d", l);
      out << cellbuf;
      for (int f : cfg.filters) {
        const AblationCell* cell = result.find(variant, l, f);
        if (cell)
          std::snprintf(cellbuf, sizeof(cellbuf), " %12.6g", cell->val_mse);
        else
          std::snprintf(cellbuf, sizeof(cellbuf), " %12s", "-");
        out << cellbuf;
      }
      out << "\n";
    }
    out << "\n";
  }
  return out.str();
}

void write_ablation_csv(const AblationResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const AblationConfig& cfg = result.config;
  for (Variant variant : {Variant::Ufcnn, Variant::Fcn}) {
    if (variant == Variant::Ufcnn && !cfg.include_ufcnn) continue;
    if (variant == Variant::Fcn && !cfg.include_fcn) continue;
    const std::string path = dir + "/ablation_" + to_string(variant) + ".csv";
    std::ofstream out(path);
    if (!out) throw DataError("cannot open ablation csv for writing: " + path);
    out << "levels";
    for (int f : cfg.filters) out << "," << f;
    out << "\n";
    char buf[32];
    for (int l : cfg.levels) {
      out << l;
      for (int f : cfg.filters) {
        const AblationCell* cell = result.find(variant, l, f);
        if (cell) {
          std::snprintf(buf, sizeof(buf), "%.17g", cell->val_mse);
          out << "," << buf;
        } else {
          out << ",";
        }
      }
      out << "\n";
    }
  }
}

TradingExperimentReport run_trading_experiment(const TradingExperimentConfig& cfg,
                                               std::ostream* progress) {
  if (cfg.n_train < 1 || cfg.n_val < 1)
    throw ConfigError("run_trading_experiment: needs train and val sequences");

  // synthesize and label
  std::vector<std::vector<market::Tick>> train_ticks(cfg.n_train), val_ticks(cfg.n_val);
  std::vector<std::vector<market::Action>> train_labels(cfg.n_train), val_labels(cfg.n_val);
  std::vector<double> val_oracle_pnl(cfg.n_val);
  for (int i = 0; i < cfg.n_train; ++i) {
    train_ticks[i] = market::synth_quotes(cfg.seq_length, mix_seed(cfg.seed, 100 + i),
                                          cfg.vol, cfg.spread);
    train_labels[i] = market::optimal_actions(train_ticks[i], cfg.sim).actions;
  }
  for (int i = 0; i < cfg.n_val; ++i) {
    val_ticks[i] = market::synth_quotes(cfg.seq_length, mix_seed(cfg.seed, 10000 + i),
                                        cfg.vol, cfg.spread);
    market::OptimalActions oracle = market::optimal_actions(val_ticks[i], cfg.sim);
    val_labels[i] = std::move(oracle.actions);
    val_oracle_pnl[i] = oracle.pnl;
  }
  if (progress)
    *progress << "labeled " << cfg.n_train << "+" << cfg.n_val << " synthetic sequences\n";

  auto make_sequence = [](const std::vector<market::Tick>& ticks,
                          const std::vector<market::Action>& labels) {
    Sequence s;
    s.input = market::tick_features(ticks);
    s.target.labels.reserve(labels.size());
    for (market::Action a : labels) s.target.labels.push_back(int(a));
    return s;
  };

  Dataset data;
  for (int i = 0; i < cfg.n_train; ++i)
    data.train.push_back(make_sequence(train_ticks[i], train_labels[i]));
  for (int i = 0; i < cfg.n_val; ++i)
    data.val.push_back(make_sequence(val_ticks[i], val_labels[i]));

  TradingExperimentReport report;
  report.stats = compute_channel_stats(data.train);
  apply_channel_stats(data, report.stats, cfg.standardize);

  NetworkConfig nc;
  nc.variant = cfg.variant;
  nc.levels = cfg.levels;
  nc.filters = cfg.filters;
  nc.kernel_len = cfg.kernel_len;
  nc.in_channels = data.train.front().input.channels;
  nc.out_channels = market::kNumActions;
  nc.loss = LossKind::SoftmaxCrossEntropy;

  TrainConfig tc;
  tc.base_lr = cfg.base_lr;
  tc.total_iters = cfg.iters;
  tc.batch_size = cfg.batch_size;
  tc.eval_every = cfg.eval_every;
  tc.seed = mix_seed(cfg.seed, 0x6d6f64656cull);
  tc.threads = cfg.threads;

  TrainResult tr = train(build_network(nc, tc.seed), data, tc);
  if (progress)
    *progress << "trained classifier: best val accuracy " << tr.best_val << " at iteration "
              << tr.best_iteration << "\n";
  report.history = tr.history;
  report.net = std::move(tr.net);

  // compare strategies on the validation split
  double model_pnl = 0, uniform_pnl = 0, viterbi_pnl = 0;
  long long model_hits = 0, uniform_hits = 0, steps = 0;
  for (int i = 0; i < cfg.n_val; ++i) {
    const std::vector<market::Tick>& ticks = val_ticks[i];
    const int T = int(ticks.size());

    SeqTensor logits = report.net.forward(data.val[i].input);
    std::vector<market::Action> model_actions = market::actions_from_logits(logits);
    model_pnl += market::simulate_pnl(ticks, model_actions, cfg.sim);

    std::vector<market::Action> uniform_actions =
        market::uniform_strategy(T, mix_seed(cfg.seed, 20000 + i));
    uniform_pnl += market::simulate_pnl(ticks, uniform_actions, cfg.sim);

    viterbi_pnl += val_oracle_pnl[i];

    for (int t = 0; t < T; ++t) {
      model_hits += model_actions[t] == val_labels[i][t];
      uniform_hits += uniform_actions[t] == val_labels[i][t];
      ++steps;
    }
  }
  report.model = {"model", model_pnl / double(steps), double(model_hits) / double(steps)};
  report.uniform = {"uniform", uniform_pnl / double(steps),
                    double(uniform_hits) / double(steps)};
  report.viterbi = {"viterbi", viterbi_pnl / double(steps), 1.0};
  return report;
}

}  // namespace ufcnn
