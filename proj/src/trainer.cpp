#include "ufcnn/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "ufcnn/parallel.hpp"
#include "ufcnn/rmsprop.hpp"
#include "ufcnn/rng.hpp"

namespace ufcnn {

const char* to_string(Metric m) {
  switch (m) {
    case Metric::MsePerStep: return "mse_per_step";
    case Metric::LoglikPerStep: return "loglik_per_step";
    case Metric::Accuracy: return "accuracy";
  }
  return "?";
}

Metric metric_from_string(const std::string& name) {
  if (name == "mse_per_step") return Metric::MsePerStep;
  if (name == "loglik_per_step") return Metric::LoglikPerStep;
  if (name == "accuracy") return Metric::Accuracy;
  throw ConfigError("unknown metric: " + name);
}

Metric default_metric(LossKind kind) {
  switch (kind) {
    case LossKind::SquaredError: return Metric::MsePerStep;
    case LossKind::SigmoidCrossEntropy: return Metric::LoglikPerStep;
    case LossKind::SoftmaxCrossEntropy: return Metric::Accuracy;
  }
  throw ConfigError("default_metric: unknown loss kind");
}

bool metric_higher_is_better(Metric m) { return m != Metric::MsePerStep; }

namespace {

void check_metric_compatible(Metric metric, LossKind loss) {
  const bool ok = (metric == Metric::MsePerStep && loss == LossKind::SquaredError) ||
                  (metric == Metric::LoglikPerStep && loss == LossKind::SigmoidCrossEntropy) ||
                  (metric == Metric::Accuracy && loss == LossKind::SoftmaxCrossEntropy);
  if (!ok)
    throw ConfigError(std::string("metric ") + to_string(metric) +
                      " does not match loss " + to_string(loss));
}

double sequence_metric(Network& net, const Sequence& seq, Metric metric) {
  SeqTensor y = net.forward(seq.input);
  switch (metric) {
    case Metric::MsePerStep:
      return loss_eval(LossKind::SquaredError, y, seq.target).loss;
    case Metric::LoglikPerStep:
      return -loss_eval(LossKind::SigmoidCrossEntropy, y, seq.target).loss;
    case Metric::Accuracy: {
      if (int(seq.target.labels.size()) != y.length)
        throw ConfigError("accuracy: one label per time-step required");
      long long hits = 0;
      for (int t = 0; t < y.length; ++t) {
        int arg = 0;
        for (int c = 1; c < y.channels; ++c)
          if (y.at(c, t) > y.at(arg, t)) arg = c;
        if (arg == seq.target.labels[t]) ++hits;
      }
      return double(hits) / y.length;
    }
  }
  throw ConfigError("sequence_metric: unknown metric");
}

}  // namespace

double evaluate(const Network& net, const std::vector<Sequence>& seqs, Metric metric,
                int threads) {
  if (seqs.empty()) throw ConfigError("evaluate: no sequences");
  check_metric_compatible(metric, net.config().loss);
  const int n = int(seqs.size());
  std::vector<double> values(n);
  const int workers = std::min(resolve_threads(threads), n);
  if (workers <= 1) {
    Network local = net;
    for (int i = 0; i < n; ++i) values[i] = sequence_metric(local, seqs[i], metric);
  } else {
    std::atomic<int> cursor{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        Network local = net;
        try {
          for (int i; (i = cursor.fetch_add(1)) < n;)
            values[i] = sequence_metric(local, seqs[i], metric);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          cursor.store(n);
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }
  double sum = 0.0;
  for (double v : values) sum += v;  // fixed order: result is thread-count invariant
  return sum / n;
}

TrainResult train(Network net, const Dataset& data, const TrainConfig& cfg) {
  if (cfg.total_iters < 0) throw ConfigError("train: total_iters must be >= 0");
  if (cfg.batch_size < 1) throw ConfigError("train: batch_size must be >= 1");
  if (!(cfg.base_lr > 0)) throw ConfigError("train: base_lr must be positive");
  if (!(cfg.rms_rho > 0 && cfg.rms_rho < 1)) throw ConfigError("train: rms_rho must be in (0,1)");
  if (cfg.eval_every < 1) throw ConfigError("train: eval_every must be >= 1");

  TrainResult result;
  if (cfg.total_iters == 0) {
    result.net = std::move(net);
    return result;
  }
  if (data.train.empty()) throw ConfigError("train: empty training split");
  for (const Sequence& s : data.train)
    if (s.input.channels != net.config().in_channels)
      throw ConfigError("train: dataset input channels do not match network");

  const Metric metric = default_metric(net.config().loss);
  const bool higher_better = metric_higher_is_better(metric);
  const long long halve_at =
      cfg.lr_halve_at >= 0 ? cfg.lr_halve_at : cfg.total_iters / 2;
  const std::vector<Sequence>& val_set = data.val.empty() ? data.train : data.val;

  RmsState rms(net);
  Rng batch_rng(cfg.seed);

  const int batch = cfg.batch_size;
  std::vector<Network> replicas(batch, net);
  std::vector<double> slot_loss(batch, 0.0);
  std::vector<int> batch_idx(batch, 0);

  double best = higher_better ? -std::numeric_limits<double>::infinity()
                              : std::numeric_limits<double>::infinity();
  long long best_iteration = 0;
  std::vector<std::vector<double>> best_params;

  for (long long iter = 1; iter <= cfg.total_iters; ++iter) {
    const double lr = iter > halve_at ? cfg.base_lr * 0.5 : cfg.base_lr;
    for (int b = 0; b < batch; ++b)
      batch_idx[b] = batch_rng.uniform_int(int(data.train.size()));

    parallel_for(batch, cfg.threads, [&](int b) {
      Network& replica = replicas[b];
      replica.copy_params_from(net);
      replica.zero_grad();
      const Sequence& seq = data.train[batch_idx[b]];
      SeqTensor y = replica.forward(seq.input);
      LossResult res = loss_eval(net.config().loss, y, seq.target);
      slot_loss[b] = res.loss;
      replica.backward(res.grad);
    });

    double mean_loss = 0.0;
    for (int b = 0; b < batch; ++b) mean_loss += slot_loss[b];
    mean_loss /= batch;
    if (!std::isfinite(mean_loss))
      throw DivergenceError("training diverged: non-finite loss at iteration " +
                            std::to_string(iter));

    net.zero_grad();
    for (int b = 0; b < batch; ++b) net.add_grads_from(replicas[b]);  // fixed order
    net.scale_grads(1.0 / batch);
    rmsprop_update(net, rms, lr, cfg.rms_rho, cfg.rms_eps);

    if (iter % cfg.eval_every == 0 || iter == cfg.total_iters) {
      const double vm = evaluate(net, val_set, metric, cfg.threads);
      result.history.push_back({iter, mean_loss, vm});
      const bool better = higher_better ? vm > best : vm < best;
      if (better) {
        best = vm;
        best_iteration = iter;
        best_params = net.snapshot_params();
      }
    }
  }

  net.restore_params(best_params);
  result.net = std::move(net);
  result.best_val = best;
  result.best_iteration = best_iteration;
  return result;
}

void write_history_csv(const std::string& path, const std::vector<EvalPoint>& history) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open history file for writing: " + path);
  out << "iteration,train_loss,val_metric\n";
  char line[128];
  for (const EvalPoint& p : history) {
    std::snprintf(line, sizeof(line), "%lld,%.17g,%.17g\n", p.iteration, p.train_loss,
                  p.val_metric);
    out << line;
  }
}

std::vector<EvalPoint> load_history_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open history file: " + path);
  std::string line;
  if (!std::getline(in, line) || line != "iteration,train_loss,val_metric")
    throw ParseError("history file " + path + ": bad header");
  std::vector<EvalPoint> history;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    EvalPoint p;
    char extra;
    if (std::sscanf(line.c_str(), "%lld,%lg,%lg%c", &p.iteration, &p.train_loss,
                    &p.val_metric, &extra) != 3)
      throw ParseError("history file " + path + ": bad row: " + line);
    history.push_back(p);
  }
  return history;
}

}  // namespace ufcnn
