// ufcnn: data generation, training, evaluation, gradient checking, trade
// labeling, backtesting, and the levels-by-filters ablation grid.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ufcnn/checkpoint.hpp"
#include "ufcnn/experiments.hpp"
#include "ufcnn/gradcheck.hpp"
#include "ufcnn/market.hpp"
#include "ufcnn/tracking.hpp"
#include "ufcnn/trainer.hpp"

namespace fs = std::filesystem;
using namespace ufcnn;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr int kExitDivergence = 3;

struct NetFlags {
  std::string variant = "ufcnn";
  int levels = 3;
  int filters = 16;
  int kernel_len = 5;
};

struct TrainFlags {
  long long iters = 5000;
  int batch = 4;
  double base_lr = 1e-3;
  long long lr_halve_at = -1;
  double rms_rho = 0.9;
  double rms_eps = 1e-6;
  long long eval_every = 100;
  int threads = 0;
};

void add_net_flags(CLI::App* cmd, NetFlags& flags) {
  cmd->add_option("--variant", flags.variant, "Architecture variant")
      ->check(CLI::IsMember({"ufcnn", "fcn"}));
  cmd->add_option("--levels", flags.levels, "Resolution levels");
  cmd->add_option("--filters", flags.filters, "Filters per convolution stage");
  cmd->add_option("--kernel-len", flags.kernel_len, "Filter length");
}

void add_train_flags(CLI::App* cmd, TrainFlags& flags) {
  cmd->add_option("--iters", flags.iters, "Training iterations");
  cmd->add_option("--batch", flags.batch, "Sequences per batch");
  cmd->add_option("--base-lr", flags.base_lr, "Base learning rate");
  cmd->add_option("--lr-halve-at", flags.lr_halve_at,
                  "Iteration after which the rate is halved (-1: half of --iters)");
  cmd->add_option("--rms-rho", flags.rms_rho, "RMSProp decay");
  cmd->add_option("--rms-eps", flags.rms_eps, "RMSProp epsilon");
  cmd->add_option("--eval-every", flags.eval_every, "Validation cadence in iterations");
  cmd->add_option("--threads", flags.threads, "Worker threads (0: hardware)");
}

TrainConfig to_train_config(const TrainFlags& flags, uint64_t seed) {
  TrainConfig cfg;
  cfg.base_lr = flags.base_lr;
  cfg.lr_halve_at = flags.lr_halve_at;
  cfg.total_iters = flags.iters;
  cfg.rms_rho = flags.rms_rho;
  cfg.rms_eps = flags.rms_eps;
  cfg.batch_size = flags.batch;
  cfg.eval_every = flags.eval_every;
  cfg.seed = seed;
  cfg.threads = flags.threads;
  return cfg;
}

// Piano-roll directory: one CSV per sequence, one time-step per row, one
// binary channel per column, no header. Each step predicts the next row.
std::vector<Sequence> load_pianoroll_dir(const std::string& dir) {
  if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
  std::vector<std::string> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".csv")
      files.push_back(entry.path().string());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw DataError("no .csv sequences in " + dir);

  std::vector<Sequence> seqs;
  for (const std::string& path : files) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    long long line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string field;
      while (std::getline(ss, field, ',')) {
        try {
          row.push_back(std::stod(field));
        } catch (const std::exception&) {
          throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
        }
      }
      if (!rows.empty() && row.size() != rows.front().size())
        throw ParseError(path + ":" + std::to_string(line_no) + ": ragged row");
      rows.push_back(std::move(row));
    }
    if (rows.size() < 2) throw DataError(path + ": need at least two time-steps");
    const int channels = int(rows.front().size());
    const int steps = int(rows.size()) - 1;
    Sequence s;
    s.input = SeqTensor(channels, steps);
    s.target.values = SeqTensor(channels, steps);
    for (int t = 0; t < steps; ++t)
      for (int c = 0; c < channels; ++c) {
        s.input.at(c, t) = rows[t][c];
        s.target.values.at(c, t) = rows[t + 1][c];
      }
    seqs.push_back(std::move(s));
  }
  return seqs;
}

std::vector<Sequence> load_labeled_sequences(const std::vector<std::string>& paths) {
  std::vector<Sequence> seqs;
  for (const std::string& path : paths) {
    auto [ticks, actions] = market::load_labeled_ticks(path);
    Sequence s;
    s.input = market::tick_features(ticks);
    s.target.labels.reserve(actions.size());
    for (market::Action a : actions) s.target.labels.push_back(int(a));
    seqs.push_back(std::move(s));
  }
  return seqs;
}

void write_outputs(const std::string& out_dir, const Network& net,
                   const std::vector<EvalPoint>& history) {
  fs::create_directories(out_dir);
  save_checkpoint(net, out_dir + "/model.ckpt.json");
  write_history_csv(out_dir + "/history.csv", history);
}

int cmd_gradcheck(uint64_t seed) {
  auto reports = run_gradient_suites(seed);
  std::printf("%-16s %8s %14s  %s\n", "suite", "coords", "max_rel_err", "status");
  for (const auto& r : reports)
    std::printf("%-16s %8d %14.3e  %s\n", r.name.c_str(), r.coords, r.max_rel_err,
                r.pass ? "PASS" : "FAIL");
  if (!all_pass(reports)) {
    std::fprintf(stderr, "gradient check failed (tolerance %.1e)\n", kGradCheckTol);
    return kExitData;
  }
  return kExitOk;
}

struct BacktestInputs {
  std::vector<market::Tick> ticks;
  std::string checkpoint;
  std::string stats_path;
  market::SimParams sim;
  uint64_t seed = 0;
  std::string out_path;
};

int cmd_backtest(const BacktestInputs& in) {
  const int length = int(in.ticks.size());
  market::OptimalActions oracle = market::optimal_actions(in.ticks, in.sim);

  std::vector<market::PnlReportRow> rows;
  if (!in.checkpoint.empty()) {
    Network net = load_checkpoint(in.checkpoint);
    std::vector<Sequence> wrap(1);
    wrap[0].input = market::tick_features(in.ticks);
    if (!in.stats_path.empty()) {
      auto [stats, scale] = load_channel_stats(in.stats_path);
      apply_channel_stats(wrap, stats, scale);
    }
    SeqTensor logits = net.forward(wrap[0].input);
    std::vector<market::Action> actions = market::actions_from_logits(logits);
    long long hits = 0;
    for (int t = 0; t < length; ++t) hits += actions[t] == oracle.actions[t];
    rows.push_back({"model", market::simulate_pnl(in.ticks, actions, in.sim) / length,
                    double(hits) / length});
  }
  rows.push_back({"viterbi", oracle.pnl / length, 1.0});
  std::vector<market::Action> uniform = market::uniform_strategy(length, in.seed);
  long long uniform_hits = 0;
  for (int t = 0; t < length; ++t) uniform_hits += uniform[t] == oracle.actions[t];
  rows.push_back({"uniform", market::simulate_pnl(in.ticks, uniform, in.sim) / length,
                  double(uniform_hits) / length});

  std::printf("strategy,profit_per_step,accuracy\n");
  for (const auto& row : rows)
    std::printf("%s,%.6g,%.4f\n", row.strategy.c_str(), row.profit_per_step, row.accuracy);
  if (!in.out_path.empty()) market::write_pnl_report(in.out_path, rows);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UFCNN time-series toolkit"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand name

  uint64_t seed = 1;
  app.add_option("--seed", seed, "Global random seed")->capture_default_str();
  app.set_config("--config", "", "Read options from an INI/TOML file");

  // gen-tracking
  auto* gen = app.add_subcommand("gen-tracking", "Generate a bearing-only tracking dataset");
  std::string gen_out;
  int gen_train = 100, gen_val = 20, gen_test = 20, gen_len = 1000;
  bool gen_desk = false, gen_full = false;
  tracking::TrackingParams gen_params;
  gen->add_option("--out-dir", gen_out, "Output directory")->required();
  gen->add_option("--n-train", gen_train, "Training sequences");
  gen->add_option("--n-val", gen_val, "Validation sequences");
  gen->add_option("--n-test", gen_test, "Test sequences");
  gen->add_option("--T", gen_len, "Time-steps per sequence");
  gen->add_flag("--desk-scale", gen_desk, "Preset: 100/20/20 sequences of length 1000");
  gen->add_flag("--full-scale", gen_full, "Preset: 2000/50/50 sequences of length 5000");
  gen->add_option("--D", gen_params.half_side, "Arena half side");
  gen->add_option("--delta", gen_params.target_radius, "Target radius");
  gen->add_option("--sigma-w", gen_params.sigma_w, "Process noise scale");
  gen->add_option("--sigma-nu", gen_params.sigma_nu, "Bearing noise scale");

  // synth-quotes
  auto* synth = app.add_subcommand("synth-quotes", "Generate synthetic quote ticks");
  std::string synth_out;
  int synth_len = 1000;
  double synth_vol = 0.01, synth_spread = 0.1;
  synth->add_option("--out", synth_out, "Output CSV")->required();
  synth->add_option("--T", synth_len, "Number of ticks");
  synth->add_option("--vol", synth_vol, "Mid-price step standard deviation");
  synth->add_option("--spread", synth_spread, "Quoted spread");

  // label-trades
  auto* label = app.add_subcommand("label-trades", "Label ticks with optimal actions");
  std::string label_in, label_out;
  market::SimParams label_sim;
  label->add_option("--ticks", label_in, "Input tick CSV")->required();
  label->add_option("--out", label_out, "Output labeled CSV")->required();
  label->add_option("--cost-per-trade", label_sim.cost_per_trade, "Per-trade cost");
  label->add_option("--max-position", label_sim.max_position, "Position bound");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a network");
  std::string train_task, train_out_dir, train_data_dir;
  std::vector<std::string> train_data, train_val_data;
  bool train_desk = false, train_standardize = false;
  double train_val_fraction = 0.2;
  NetFlags train_net;
  TrainFlags train_flags;
  market::SimParams train_sim;
  double train_vol = 0.01, train_spread = 0.1;
  train_cmd->add_option("--task", train_task, "tracking, trading, or pianoroll")
      ->required()
      ->check(CLI::IsMember({"tracking", "trading", "pianoroll"}));
  train_cmd->add_option("--out-dir", train_out_dir, "Output directory")->required();
  train_cmd->add_option("--data-dir", train_data_dir,
                        "Dataset directory (tracking/pianoroll)");
  train_cmd->add_option("--data", train_data, "Labeled tick CSVs (trading)");
  train_cmd->add_option("--val-data", train_val_data, "Validation tick CSVs (trading)");
  train_cmd->add_flag("--desk-scale", train_desk,
                      "Generate a desk-scale dataset in memory instead of loading");
  train_cmd->add_flag("--standardize", train_standardize,
                      "Scale trading features by the training-split standard deviation");
  train_cmd->add_option("--val-fraction", train_val_fraction,
                        "Validation fraction for pianoroll directories");
  train_cmd->add_option("--synth-vol", train_vol, "Synthetic mid volatility (--desk-scale trading)");
  train_cmd->add_option("--synth-spread", train_spread, "Synthetic spread (--desk-scale trading)");
  train_cmd->add_option("--cost-per-trade", train_sim.cost_per_trade, "Per-trade cost");
  train_cmd->add_option("--max-position", train_sim.max_position, "Position bound");
  add_net_flags(train_cmd, train_net);
  add_train_flags(train_cmd, train_flags);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a checkpoint");
  std::string eval_task, eval_ckpt, eval_data_dir, eval_split = "val", eval_metric, eval_stats;
  std::vector<std::string> eval_data;
  eval_cmd->add_option("--task", eval_task, "tracking, trading, or pianoroll")
      ->required()
      ->check(CLI::IsMember({"tracking", "trading", "pianoroll"}));
  eval_cmd->add_option("--checkpoint", eval_ckpt, "Checkpoint path")->required();
  eval_cmd->add_option("--data-dir", eval_data_dir, "Dataset directory");
  eval_cmd->add_option("--data", eval_data, "Labeled tick CSVs (trading)");
  eval_cmd->add_option("--stats", eval_stats, "Feature stats sidecar (trading)");
  eval_cmd->add_option("--split", eval_split, "Dataset split (tracking)")
      ->check(CLI::IsMember({"train", "val", "test"}));
  eval_cmd->add_option("--metric", eval_metric,
                       "mse_per_step, loglik_per_step, or accuracy (default: by loss)");

  // gradcheck
  auto* grad = app.add_subcommand("gradcheck", "Finite-difference gradient report");

  // backtest
  auto* back = app.add_subcommand("backtest", "Compare model, oracle, and uniform strategies");
  std::string back_ticks, back_ckpt, back_stats, back_out;
  bool back_synth = false;
  int back_len = 1000;
  double back_vol = 0.01, back_spread = 0.1;
  market::SimParams back_sim;
  back->add_option("--ticks", back_ticks, "Tick CSV to replay");
  back->add_flag("--synth", back_synth, "Replay synthetic quotes instead of a file");
  back->add_option("--T", back_len, "Synthetic tick count");
  back->add_option("--vol", back_vol, "Synthetic mid volatility");
  back->add_option("--spread", back_spread, "Synthetic spread");
  back->add_option("--checkpoint", back_ckpt, "Classifier checkpoint (optional)");
  back->add_option("--stats", back_stats, "Feature stats sidecar for the checkpoint");
  back->add_option("--cost-per-trade", back_sim.cost_per_trade, "Per-trade cost");
  back->add_option("--max-position", back_sim.max_position, "Position bound");
  back->add_option("--out", back_out, "Also write the report CSV here");

  // ablation
  auto* abl = app.add_subcommand("ablation", "Validation MSE over the levels x filters grid");
  AblationConfig abl_cfg;
  std::string abl_variant = "both", abl_out_dir;
  bool abl_desk = false;
  abl->add_option("--levels", abl_cfg.levels, "Resolution levels to sweep")->delimiter(',');
  abl->add_option("--filters", abl_cfg.filters, "Filter counts to sweep")->delimiter(',');
  abl->add_option("--variant", abl_variant, "ufcnn, fcn, or both")
      ->check(CLI::IsMember({"ufcnn", "fcn", "both"}));
  abl->add_flag("--desk-scale", abl_desk, "Use the desk-scale preset (default sizes)");
  abl->add_option("--n-train", abl_cfg.n_train, "Training sequences");
  abl->add_option("--n-val", abl_cfg.n_val, "Validation sequences");
  abl->add_option("--T", abl_cfg.seq_length, "Time-steps per sequence");
  abl->add_option("--iters", abl_cfg.iters, "Training iterations per cell");
  abl->add_option("--batch", abl_cfg.batch_size, "Sequences per batch");
  abl->add_option("--eval-every", abl_cfg.eval_every, "Validation cadence");
  abl->add_option("--kernel-len", abl_cfg.kernel_len, "Filter length");
  abl->add_option("--threads", abl_cfg.threads, "Worker threads (0: hardware)");
  abl->add_option("--out-dir", abl_out_dir, "Directory for the result CSVs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (gen->parsed()) {
      if (gen_desk) { gen_train = 100; gen_val = 20; gen_test = 20; gen_len = 1000; }
      if (gen_full) { gen_train = 2000; gen_val = 50; gen_test = 50; gen_len = 5000; }
      tracking::TrackingDataset ds =
          tracking::generate_dataset(gen_params, gen_train, gen_val, gen_test, gen_len, seed);
      tracking::save_dataset(ds, gen_out);
      std::printf("wrote %d/%d/%d sequences of length %d to %s (input mean %.6g)\n",
                  gen_train, gen_val, gen_test, gen_len, gen_out.c_str(), ds.input_mean);
      return kExitOk;
    }

    if (synth->parsed()) {
      std::vector<market::Tick> ticks =
          market::synth_quotes(synth_len, seed, synth_vol, synth_spread);
      market::save_ticks(synth_out, ticks);
      std::printf("wrote %d ticks to %s\n", synth_len, synth_out.c_str());
      return kExitOk;
    }

    if (label->parsed()) {
      std::vector<market::Tick> ticks = market::load_ticks(label_in);
      market::OptimalActions oracle = market::optimal_actions(ticks, label_sim);
      market::save_labeled_ticks(label_out, ticks, oracle.actions);
      std::printf("labeled %zu ticks; oracle pnl %.6g (%.6g per step)\n", ticks.size(),
                  oracle.pnl, oracle.pnl / double(ticks.size()));
      return kExitOk;
    }

    if (grad->parsed()) return cmd_gradcheck(seed);

    if (train_cmd->parsed()) {
      NetworkConfig nc;
      nc.variant = variant_from_string(train_net.variant);
      nc.levels = train_net.levels;
      nc.filters = train_net.filters;
      nc.kernel_len = train_net.kernel_len;

      if (train_task == "tracking") {
        tracking::TrackingDataset ds;
        if (!train_data_dir.empty()) {
          ds = tracking::load_dataset(train_data_dir);
        } else if (train_desk) {
          ds = tracking::generate_dataset(tracking::TrackingParams{}, 100, 20, 0, 1000, seed);
        } else {
          throw ConfigError("train --task tracking needs --data-dir or --desk-scale");
        }
        nc.in_channels = 1;
        nc.out_channels = 2;
        nc.loss = LossKind::SquaredError;
        TrainResult result =
            train(build_network(nc, seed), ds.data, to_train_config(train_flags, seed));
        write_outputs(train_out_dir, result.net, result.history);
        if (result.history.empty())
          std::printf("wrote initial checkpoint to %s\n",
                      (train_out_dir + "/model.ckpt.json").c_str());
        else
          std::printf("best val mse %.6g at iteration %lld; wrote %s\n", result.best_val,
                      result.best_iteration, (train_out_dir + "/model.ckpt.json").c_str());
        return kExitOk;
      }

      if (train_task == "trading") {
        if (train_desk) {
          TradingExperimentConfig tcfg;
          tcfg.vol = train_vol;
          tcfg.spread = train_spread;
          tcfg.sim = train_sim;
          tcfg.variant = nc.variant;
          tcfg.levels = nc.levels;
          tcfg.filters = nc.filters;
          tcfg.kernel_len = nc.kernel_len;
          tcfg.iters = train_flags.iters;
          tcfg.batch_size = train_flags.batch;
          tcfg.eval_every = train_flags.eval_every;
          tcfg.base_lr = train_flags.base_lr;
          tcfg.seed = seed;
          tcfg.standardize = train_standardize;
          tcfg.threads = train_flags.threads;
          TradingExperimentReport report = run_trading_experiment(tcfg, &std::cout);
          fs::create_directories(train_out_dir);
          save_checkpoint(report.net, train_out_dir + "/model.ckpt.json");
          write_history_csv(train_out_dir + "/history.csv", report.history);
          save_channel_stats(train_out_dir + "/feature_stats.json", report.stats,
                             train_standardize);
          market::write_pnl_report(train_out_dir + "/pnl_report.csv",
                                   {report.model, report.viterbi, report.uniform});
          std::printf("model %.6g, viterbi %.6g, uniform %.6g profit per step\n",
                      report.model.profit_per_step, report.viterbi.profit_per_step,
                      report.uniform.profit_per_step);
          return kExitOk;
        }
        if (train_data.empty())
          throw ConfigError("train --task trading needs --data files or --desk-scale");
        Dataset data;
        data.train = load_labeled_sequences(train_data);
        data.val = load_labeled_sequences(train_val_data);
        ChannelStats stats = compute_channel_stats(data.train);
        apply_channel_stats(data, stats, train_standardize);
        nc.in_channels = data.train.front().input.channels;
        nc.out_channels = market::kNumActions;
        nc.loss = LossKind::SoftmaxCrossEntropy;
        TrainResult result =
            train(build_network(nc, seed), data, to_train_config(train_flags, seed));
        write_outputs(train_out_dir, result.net, result.history);
        save_channel_stats(train_out_dir + "/feature_stats.json", stats, train_standardize);
        std::printf("best val accuracy %.4f at iteration %lld; wrote %s\n", result.best_val,
                    result.best_iteration, (train_out_dir + "/model.ckpt.json").c_str());
        return kExitOk;
      }

      // pianoroll
      if (train_data_dir.empty())
        throw ConfigError("train --task pianoroll needs --data-dir");
      std::vector<Sequence> seqs = load_pianoroll_dir(train_data_dir);
      Dataset data;
      const int n_val = std::max(0, int(train_val_fraction * double(seqs.size())));
      for (size_t i = 0; i < seqs.size(); ++i) {
        if (int(i) < int(seqs.size()) - n_val)
          data.train.push_back(std::move(seqs[i]));
        else
          data.val.push_back(std::move(seqs[i]));
      }
      nc.in_channels = data.train.front().input.channels;
      nc.out_channels = nc.in_channels;
      nc.loss = LossKind::SigmoidCrossEntropy;
      TrainResult result =
          train(build_network(nc, seed), data, to_train_config(train_flags, seed));
      write_outputs(train_out_dir, result.net, result.history);
      std::printf("best val log-likelihood %.6g at iteration %lld; wrote %s\n",
                  result.best_val, result.best_iteration,
                  (train_out_dir + "/model.ckpt.json").c_str());
      return kExitOk;
    }

    if (eval_cmd->parsed()) {
      Network net = load_checkpoint(eval_ckpt);
      const Metric metric = eval_metric.empty() ? default_metric(net.config().loss)
                                                : metric_from_string(eval_metric);
      std::vector<Sequence> seqs;
      if (eval_task == "tracking") {
        if (eval_data_dir.empty()) throw ConfigError("eval --task tracking needs --data-dir");
        tracking::TrackingDataset ds = tracking::load_dataset(eval_data_dir);
        Dataset& d = ds.data;
        seqs = eval_split == "train" ? std::move(d.train)
             : eval_split == "test" ? std::move(d.test)
                                    : std::move(d.val);
      } else if (eval_task == "trading") {
        if (eval_data.empty()) throw ConfigError("eval --task trading needs --data files");
        seqs = load_labeled_sequences(eval_data);
        if (!eval_stats.empty()) {
          auto [stats, scale] = load_channel_stats(eval_stats);
          apply_channel_stats(seqs, stats, scale);
        }
      } else {
        if (eval_data_dir.empty()) throw ConfigError("eval --task pianoroll needs --data-dir");
        seqs = load_pianoroll_dir(eval_data_dir);
      }
      if (seqs.empty()) throw DataError("eval: selected split is empty");
      const double value = evaluate(net, seqs, metric, 0);
      std::printf("%s,%.17g\n", to_string(metric), value);
      return kExitOk;
    }

    if (back->parsed()) {
      BacktestInputs in;
      if (back_synth) {
        in.ticks = market::synth_quotes(back_len, seed, back_vol, back_spread);
      } else if (!back_ticks.empty()) {
        in.ticks = market::load_ticks(back_ticks);
      } else {
        throw ConfigError("backtest needs --ticks or --synth");
      }
      in.checkpoint = back_ckpt;
      in.stats_path = back_stats;
      in.sim = back_sim;
      in.seed = mix_seed(seed, 0x756e69666f726dull);
      in.out_path = back_out;
      return cmd_backtest(in);
    }

    if (abl->parsed()) {
      if (abl_desk) {
        abl_cfg.n_train = DeskScale::kTrainSequences;
        abl_cfg.n_val = DeskScale::kValSequences;
        abl_cfg.seq_length = DeskScale::kSequenceLength;
        abl_cfg.iters = DeskScale::kIterations;
      }
      abl_cfg.include_ufcnn = abl_variant != "fcn";
      abl_cfg.include_fcn = abl_variant != "ufcnn";
      abl_cfg.seed = seed;
      AblationResult result = run_ablation(abl_cfg, &std::cout);
      std::printf("\n%s", format_ablation_tables(result).c_str());
      std::printf("total %.1f s\n", result.seconds);
      if (!abl_out_dir.empty()) write_ablation_csv(result, abl_out_dir);
      return kExitOk;
    }
  } catch (const DivergenceError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitDivergence;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const StateError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const DataError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitData;
  }
  return kExitUsage;
}
