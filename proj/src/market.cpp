#include "ufcnn/market.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>

namespace ufcnn::market {

const char* to_string(Action a) {
  switch (a) {
    case Action::BuyAtBid: return "buy_at_bid";
    case Action::SellAtBid: return "sell_at_bid";
    case Action::DoNothing: return "do_nothing";
    case Action::BuyAtAsk: return "buy_at_ask";
    case Action::SellAtAsk: return "sell_at_ask";
  }
  return "?";
}

double mktpx(const Tick& t) {
  const double total = t.bidsz + t.asksz;
  if (total > 0.0) return (t.bidpx * t.asksz + t.askpx * t.bidsz) / total;
  return (t.bidpx + t.askpx) / 2.0;
}

double simulate_pnl(std::span<const Tick> ticks, std::span<const Action> actions,
                    const SimParams& p) {
  if (ticks.empty()) throw ConfigError("simulate_pnl: empty tick series");
  if (actions.size() != ticks.size())
    throw ConfigError("simulate_pnl: actions/ticks length mismatch");
  double pnl = 0.0;
  int position = 0;
  double mkt1 = mktpx(ticks[0]);
  for (size_t t = 0; t + 1 < ticks.size(); ++t) {
    const double mkt0 = mkt1;
    mkt1 = mktpx(ticks[t + 1]);
    pnl += position * (mkt1 - mkt0);
    switch (actions[t]) {
      case Action::BuyAtBid:
        if (position < p.max_position) {
          ++position;
          pnl -= (ticks[t].bidpx + p.cost_per_trade) - mkt1;
        }
        break;
      case Action::BuyAtAsk:
        if (position < p.max_position) {
          ++position;
          pnl -= (ticks[t].askpx + p.cost_per_trade) - mkt1;
        }
        break;
      case Action::SellAtBid:
        if (position > -p.max_position) {
          --position;
          pnl += (ticks[t].bidpx - p.cost_per_trade) - mkt1;
        }
        break;
      case Action::SellAtAsk:
        if (position > -p.max_position) {
          --position;
          pnl += (ticks[t].askpx - p.cost_per_trade) - mkt1;
        }
        break;
      case Action::DoNothing:
        break;
    }
  }
  return pnl;
}

namespace {

inline int action_direction(Action a) {
  switch (a) {
    case Action::BuyAtBid:
    case Action::BuyAtAsk: return 1;
    case Action::SellAtBid:
    case Action::SellAtAsk: return -1;
    default: return 0;
  }
}

}  // namespace

OptimalActions optimal_actions(std::span<const Tick> ticks, const SimParams& p) {
  if (ticks.empty()) throw ConfigError("optimal_actions: empty tick series");
  const int T = int(ticks.size());
  const int P = p.max_position;
  const int S = 2 * P + 1;  // states: position + P

  OptimalActions result;
  result.actions.assign(T, Action::DoNothing);
  if (T == 1) return result;

  constexpr double kNegInf = -std::numeric_limits<double>::infinity();
  std::vector<double> value(S, kNegInf), next(S, kNegInf);
  value[P] = 0.0;
  std::vector<int8_t> parent(size_t(T - 1) * S, int8_t(Action::DoNothing));

  // Candidate order encodes the tie rules: DoNothing first, then smaller
  // resulting |position|, then smaller action index; relax only on a
  // strictly larger value.
  double mkt1 = mktpx(ticks[0]);
  for (int t = 0; t + 1 < T; ++t) {
    const double mkt0 = mkt1;
    mkt1 = mktpx(ticks[t + 1]);
    const double dm = mkt1 - mkt0;
    const double buy_bid = -((ticks[t].bidpx + p.cost_per_trade) - mkt1);
    const double buy_ask = -((ticks[t].askpx + p.cost_per_trade) - mkt1);
    const double sell_bid = (ticks[t].bidpx - p.cost_per_trade) - mkt1;
    const double sell_ask = (ticks[t].askpx - p.cost_per_trade) - mkt1;
    std::fill(next.begin(), next.end(), kNegInf);
    int8_t* row = parent.data() + size_t(t) * S;

    struct Candidate {
      Action action;
      int target;
      double value;
    };
    for (int s = 0; s < S; ++s) {
      if (value[s] == kNegInf) continue;
      const int position = s - P;
      const double base = value[s] + position * dm;
      Candidate candidates[5];
      int n = 0;
      candidates[n++] = {Action::DoNothing, s, base};
      const bool can_buy = position < P;
      const bool can_sell = position > -P;
      if (position > 0) {  // selling shrinks |position|
        if (can_sell) {
          candidates[n++] = {Action::SellAtBid, s - 1, base + sell_bid};
          candidates[n++] = {Action::SellAtAsk, s - 1, base + sell_ask};
        }
        if (can_buy) {
          candidates[n++] = {Action::BuyAtBid, s + 1, base + buy_bid};
          candidates[n++] = {Action::BuyAtAsk, s + 1, base + buy_ask};
        }
      } else if (position < 0) {  // buying shrinks |position|
        if (can_buy) {
          candidates[n++] = {Action::BuyAtBid, s + 1, base + buy_bid};
          candidates[n++] = {Action::BuyAtAsk, s + 1, base + buy_ask};
        }
        if (can_sell) {
          candidates[n++] = {Action::SellAtBid, s - 1, base + sell_bid};
          candidates[n++] = {Action::SellAtAsk, s - 1, base + sell_ask};
        }
      } else {  // flat: both directions tie on |position|, fall back to action index
        if (can_buy) candidates[n++] = {Action::BuyAtBid, s + 1, base + buy_bid};
        if (can_sell) candidates[n++] = {Action::SellAtBid, s - 1, base + sell_bid};
        if (can_buy) candidates[n++] = {Action::BuyAtAsk, s + 1, base + buy_ask};
        if (can_sell) candidates[n++] = {Action::SellAtAsk, s - 1, base + sell_ask};
      }
      for (int i = 0; i < n; ++i) {
        const Candidate& c = candidates[i];
        if (c.value > next[c.target]) {
          next[c.target] = c.value;
          row[c.target] = int8_t(c.action);
        }
      }
    }
    value.swap(next);
  }

  int best_state = P;
  for (int s = 0; s < S; ++s) {
    if (value[s] > value[best_state]) best_state = s;
    else if (value[s] == value[best_state] &&
             std::abs(s - P) < std::abs(best_state - P))
      best_state = s;
  }
  result.pnl = value[best_state];

  int s = best_state;
  for (int t = T - 2; t >= 0; --t) {
    const Action a = Action(parent[size_t(t) * S + s]);
    result.actions[t] = a;
    s -= action_direction(a);
  }
  return result;
}

std::vector<Action> uniform_strategy(int T, uint64_t seed) {
  if (T < 1) throw ConfigError("uniform_strategy: T must be >= 1");
  Rng rng(seed);
  std::vector<Action> actions(T);
  for (Action& a : actions) a = Action(rng.uniform_int(kNumActions));
  return actions;
}

std::vector<Tick> synth_quotes(int T, uint64_t seed, double vol, double spread) {
  if (T < 1) throw ConfigError("synth_quotes: T must be >= 1");
  if (vol < 0 || spread < 0) throw ConfigError("synth_quotes: vol and spread must be >= 0");
  Rng rng(seed);
  std::vector<Tick> ticks(T);
  double mid = 100.0;
  for (int t = 0; t < T; ++t) {
    if (t > 0) mid += vol * rng.normal();
    Tick& k = ticks[t];
    k.bidpx = mid - spread / 2;
    k.askpx = k.bidpx + spread;  // ask - bid == spread holds exactly
    k.bidsz = rng.uniform(1.0, 10.0);
    k.asksz = rng.uniform(1.0, 10.0);
  }
  return ticks;
}

namespace {

constexpr const char* kTickHeader[4] = {"bidpx", "bidsz", "askpx", "asksz"};

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& field, const std::string& path, long long line_no) {
  const char* ptr = field.c_str();
  char* end = nullptr;
  const double v = std::strtod(ptr, &end);
  if (end == ptr || *end != '\0')
    throw ParseError(path + ":" + std::to_string(line_no) + ": bad number '" + field + "'");
  return v;
}

struct TickFile {
  std::vector<Tick> ticks;
  std::vector<Action> actions;
  bool labeled = false;
};

TickFile load_tick_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open tick file: " + path);
  std::string line;
  long long line_no = 0;
  if (!std::getline(in, line)) throw DataError("empty tick file: " + path);
  ++line_no;
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split_csv(line);
  if (header.size() < 4)
    throw ParseError(path + ":1: header must start with bidpx,bidsz,askpx,asksz");
  for (int i = 0; i < 4; ++i)
    if (header[i] != kTickHeader[i])
      throw ParseError(path + ":1: expected header column '" + kTickHeader[i] + "', got '" +
                       header[i] + "'");
  TickFile file;
  file.labeled = header.back() == "action";
  const int indicators = int(header.size()) - 4 - (file.labeled ? 1 : 0);
  const int columns = int(header.size());

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields = split_csv(line);
    if (int(fields.size()) != columns)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                       std::to_string(columns) + " columns, got " +
                       std::to_string(fields.size()));
    Tick t;
    t.bidpx = parse_double(fields[0], path, line_no);
    t.bidsz = parse_double(fields[1], path, line_no);
    t.askpx = parse_double(fields[2], path, line_no);
    t.asksz = parse_double(fields[3], path, line_no);
    for (int i = 0; i < indicators; ++i)
      t.indicators.push_back(parse_double(fields[4 + i], path, line_no));
    if (file.labeled) {
      const double a = parse_double(fields.back(), path, line_no);
      const int idx = int(a);
      if (a != idx || idx < 0 || idx >= kNumActions)
        throw ParseError(path + ":" + std::to_string(line_no) + ": bad action index");
      file.actions.push_back(Action(idx));
    }
    file.ticks.push_back(std::move(t));
  }
  if (file.ticks.empty()) throw DataError("tick file has no rows: " + path);
  return file;
}

void write_tick_file(const std::string& path, std::span<const Tick> ticks,
                     const std::vector<Action>* actions) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open tick file for writing: " + path);
  const size_t indicators = ticks.empty() ? 0 : ticks.front().indicators.size();
  out << "bidpx,bidsz,askpx,asksz";
  for (size_t i = 1; i <= indicators; ++i) out << ",ind" << i;
  if (actions) out << ",action";
  out << "\n";
  char buf[32];
  for (size_t t = 0; t < ticks.size(); ++t) {
    const Tick& k = ticks[t];
    if (k.indicators.size() != indicators)
      throw ConfigError("save_ticks: inconsistent indicator counts");
    const double fields[4] = {k.bidpx, k.bidsz, k.askpx, k.asksz};
    for (int i = 0; i < 4; ++i) {
      std::snprintf(buf, sizeof(buf), "%.17g", fields[i]);
      out << (i ? "," : "") << buf;
    }
    for (double v : k.indicators) {
      std::snprintf(buf, sizeof(buf), "%.17g", v);
      out << "," << buf;
    }
    if (actions) out << "," << int((*actions)[t]);
    out << "\n";
  }
  if (!out) throw DataError("failed writing tick file: " + path);
}

}  // namespace

std::vector<Tick> load_ticks(const std::string& path) {
  return load_tick_file(path).ticks;
}

void save_ticks(const std::string& path, std::span<const Tick> ticks) {
  write_tick_file(path, ticks, nullptr);
}

void save_labeled_ticks(const std::string& path, std::span<const Tick> ticks,
                        std::span<const Action> actions) {
  if (ticks.size() != actions.size())
    throw ConfigError("save_labeled_ticks: actions/ticks length mismatch");
  std::vector<Action> copy(actions.begin(), actions.end());
  write_tick_file(path, ticks, &copy);
}

std::pair<std::vector<Tick>, std::vector<Action>> load_labeled_ticks(const std::string& path) {
  TickFile file = load_tick_file(path);
  if (!file.labeled) throw DataError("tick file has no action column: " + path);
  return {std::move(file.ticks), std::move(file.actions)};
}

SeqTensor tick_features(std::span<const Tick> ticks) {
  if (ticks.empty()) throw ConfigError("tick_features: empty tick series");
  const int indicators = int(ticks.front().indicators.size());
  SeqTensor features(4 + indicators, int(ticks.size()));
  for (int t = 0; t < int(ticks.size()); ++t) {
    const Tick& k = ticks[t];
    if (int(k.indicators.size()) != indicators)
      throw ConfigError("tick_features: inconsistent indicator counts");
    features.at(0, t) = k.bidpx;
    features.at(1, t) = k.bidsz;
    features.at(2, t) = k.askpx;
    features.at(3, t) = k.asksz;
    for (int i = 0; i < indicators; ++i) features.at(4 + i, t) = k.indicators[i];
  }
  return features;
}

std::vector<Action> actions_from_logits(const SeqTensor& logits) {
  if (logits.channels != kNumActions)
    throw ConfigError("actions_from_logits: expected one channel per action");
  std::vector<Action> actions(logits.length);
  for (int t = 0; t < logits.length; ++t) {
    int arg = 0;
    for (int c = 1; c < logits.channels; ++c)
      if (logits.at(c, t) > logits.at(arg, t)) arg = c;
    actions[t] = Action(arg);
  }
  return actions;
}

void write_pnl_report(const std::string& path, const std::vector<PnlReportRow>& rows) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open report for writing: " + path);
  out << "strategy,profit_per_step,accuracy\n";
  char buf[96];
  for (const PnlReportRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%.17g,%.17g", row.profit_per_step, row.accuracy);
    out << row.strategy << "," << buf << "\n";
  }
}

}  // namespace ufcnn::market
