#include "ufcnn/tracking.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <json.hpp>

namespace ufcnn::tracking {

using nlohmann::json;

void TrackingParams::validate() const {
  if (!(half_side > target_radius && target_radius > 0))
    throw ConfigError("TrackingParams: requires half_side > target_radius > 0");
  if (sigma_w < 0 || sigma_nu < 0)
    throw ConfigError("TrackingParams: noise scales must be >= 0");
}

TrackingState bounce(TrackingState z, const TrackingParams& p) {
  const double wall = p.half_side - p.target_radius;
  if (z.x >= wall)
    z.x_dot = -std::fabs(z.x_dot);
  else if (z.x <= -wall)
    z.x_dot = std::fabs(z.x_dot);
  if (z.y >= wall)
    z.y_dot = -std::fabs(z.y_dot);
  else if (z.y <= -wall)
    z.y_dot = std::fabs(z.y_dot);
  return z;
}

TrackingState step_state(const TrackingState& z, const TrackingParams& p, Rng& rng) {
  const TrackingState b = bounce(z, p);
  const double noise_std = p.sigma_w * std::sqrt(0.5);
  TrackingState next;
  next.x = b.x + b.x_dot + noise_std * rng.normal();
  next.x_dot = b.x_dot;
  next.y = b.y + b.y_dot + noise_std * rng.normal();
  next.y_dot = b.y_dot;
  return next;
}

double observe(const TrackingState& z, const TrackingParams& p, Rng& rng) {
  if (z.x == 0.0 && z.y == 0.0)
    throw DomainError("observe: bearing undefined at the origin");
  return std::atan2(z.y, z.x) + p.sigma_nu * rng.normal();
}

TrackingState sample_initial_state(const TrackingParams& p, Rng& rng) {
  TrackingState z;
  z.x = rng.uniform(-p.half_side / 2, p.half_side / 2);
  z.y = rng.uniform(-p.half_side / 2, p.half_side / 2);
  auto velocity = [&rng] {
    const double magnitude = rng.uniform(0.05, 0.25);
    return rng.uniform() < 0.5 ? -magnitude : magnitude;
  };
  z.x_dot = velocity();
  z.y_dot = velocity();
  return z;
}

namespace {

std::vector<Sequence> generate_split(const TrackingParams& p, int count, int seq_length,
                                     uint64_t seed, uint64_t split_tag) {
  std::vector<Sequence> seqs(count);
  for (int i = 0; i < count; ++i) {
    Rng rng(mix_seed(seed, mix_seed(split_tag, uint64_t(i))));
    Sequence s;
    s.input = SeqTensor(1, seq_length);
    s.target.values = SeqTensor(2, seq_length);
    TrackingState z = sample_initial_state(p, rng);
    for (int t = 0; t < seq_length; ++t) {
      z = step_state(z, p, rng);
      s.input.at(0, t) = observe(z, p, rng);
      s.target.values.at(0, t) = z.x;
      s.target.values.at(1, t) = z.y;
    }
    seqs[i] = std::move(s);
  }
  return seqs;
}

}  // namespace

TrackingDataset generate_dataset(const TrackingParams& p, int n_train, int n_val,
                                 int n_test, int seq_length, uint64_t seed) {
  p.validate();
  if (seq_length < 1) throw ConfigError("generate_dataset: seq_length must be >= 1");
  if (n_train < 0 || n_val < 0 || n_test < 0)
    throw ConfigError("generate_dataset: sequence counts must be >= 0");

  TrackingDataset ds;
  ds.params = p;
  ds.seq_length = seq_length;
  ds.data.train = generate_split(p, n_train, seq_length, seed, 1);
  ds.data.val = generate_split(p, n_val, seq_length, seed, 2);
  ds.data.test = generate_split(p, n_test, seq_length, seed, 3);

  double sum = 0.0;
  long long n = 0;
  for (const Sequence& s : ds.data.train) {
    for (double v : s.input.data) sum += v;
    n += s.input.length;
  }
  ds.input_mean = n > 0 ? sum / double(n) : 0.0;
  for (auto* split : {&ds.data.train, &ds.data.val, &ds.data.test})
    for (Sequence& s : *split)
      for (double& v : s.input.data) v -= ds.input_mean;
  return ds;
}

namespace {

constexpr const char* kSplitNames[3] = {"train", "val", "test"};
constexpr const char* kMetaFormat = "ufcnn-tracking-v1";

void write_row(std::ofstream& out, const double* row, int n) {
  char buf[32];
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", row[i]);
    out << buf << (i + 1 < n ? "," : "\n");
  }
}

void save_split(const std::vector<Sequence>& seqs, int seq_length,
                const std::string& path) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot open dataset file for writing: " + path);
  out << "channels_in,channels_out,T,n_seq\n";
  out << "1,2," << seq_length << "," << seqs.size() << "\n";
  for (const Sequence& s : seqs) {
    write_row(out, s.input.row(0), s.input.length);
    write_row(out, s.target.values.row(0), s.target.values.length);
    write_row(out, s.target.values.row(1), s.target.values.length);
  }
  if (!out) throw DataError("failed writing dataset file: " + path);
}

std::vector<double> parse_row(const std::string& line, int expected, const std::string& path,
                              long long line_no) {
  std::vector<double> row;
  row.reserve(expected);
  const char* ptr = line.c_str();
  char* end = nullptr;
  while (*ptr) {
    const double v = std::strtod(ptr, &end);
    if (end == ptr)
      throw ParseError(path + ":" + std::to_string(line_no) + ": expected a number");
    row.push_back(v);
    ptr = end;
    if (*ptr == ',') ++ptr;
    else if (*ptr != '\0' && *ptr != '\r')
      throw ParseError(path + ":" + std::to_string(line_no) + ": unexpected character");
    else break;
  }
  if (int(row.size()) != expected)
    throw ParseError(path + ":" + std::to_string(line_no) + ": expected " +
                     std::to_string(expected) + " values, got " + std::to_string(row.size()));
  return row;
}

std::vector<Sequence> load_split(const std::string& path, int* seq_length_out) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  std::string line;
  long long line_no = 0;
  auto next_line = [&]() -> bool {
    while (std::getline(in, line)) {
      ++line_no;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  };
  if (!next_line() || line != "channels_in,channels_out,T,n_seq")
    throw ParseError(path + ": bad header line");
  if (!next_line()) throw ParseError(path + ": missing count line");
  int channels_in = 0, channels_out = 0, seq_length = 0, n_seq = 0;
  if (std::sscanf(line.c_str(), "%d,%d,%d,%d", &channels_in, &channels_out, &seq_length,
                  &n_seq) != 4)
    throw ParseError(path + ":" + std::to_string(line_no) + ": bad count line");
  if (channels_in != 1 || channels_out != 2 || seq_length < 1 || n_seq < 0)
    throw DataError(path + ": unsupported dataset shape");
  std::vector<Sequence> seqs(n_seq);
  for (int i = 0; i < n_seq; ++i) {
    Sequence s;
    s.input = SeqTensor(1, seq_length);
    s.target.values = SeqTensor(2, seq_length);
    for (int row_idx = 0; row_idx < 3; ++row_idx) {
      if (!next_line())
        throw ParseError(path + ": truncated file in sequence " + std::to_string(i));
      std::vector<double> row = parse_row(line, seq_length, path, line_no);
      double* dst = row_idx == 0 ? s.input.row(0) : s.target.values.row(row_idx - 1);
      std::copy(row.begin(), row.end(), dst);
    }
    seqs[i] = std::move(s);
  }
  *seq_length_out = seq_length;
  return seqs;
}

}  // namespace

void save_dataset(const TrackingDataset& ds, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::vector<Sequence>* splits[3] = {&ds.data.train, &ds.data.val, &ds.data.test};
  for (int i = 0; i < 3; ++i)
    save_split(*splits[i], ds.seq_length, dir + "/" + kSplitNames[i] + ".csv");
  json meta;
  meta["format"] = kMetaFormat;
  meta["train_input_mean"] = ds.input_mean;
  meta["seq_length"] = ds.seq_length;
  meta["params"] = {{"half_side", ds.params.half_side},
                    {"target_radius", ds.params.target_radius},
                    {"sigma_w", ds.params.sigma_w},
                    {"sigma_nu", ds.params.sigma_nu}};
  std::ofstream out(dir + "/meta.json");
  if (!out) throw DataError("cannot open meta file for writing in " + dir);
  out << meta.dump(2) << "\n";
}

TrackingDataset load_dataset(const std::string& dir) {
  std::ifstream meta_in(dir + "/meta.json");
  if (!meta_in) throw DataError("cannot open " + dir + "/meta.json");
  json meta;
  try {
    meta_in >> meta;
  } catch (const json::parse_error& e) {
    throw ParseError(dir + "/meta.json: " + e.what());
  }
  if (!meta.contains("format") || meta["format"] != kMetaFormat)
    throw DataError(dir + "/meta.json: missing or unsupported format tag");

  TrackingDataset ds;
  ds.input_mean = meta.at("train_input_mean").get<double>();
  ds.seq_length = meta.at("seq_length").get<int>();
  const json& jp = meta.at("params");
  ds.params.half_side = jp.at("half_side").get<double>();
  ds.params.target_radius = jp.at("target_radius").get<double>();
  ds.params.sigma_w = jp.at("sigma_w").get<double>();
  ds.params.sigma_nu = jp.at("sigma_nu").get<double>();

  std::vector<Sequence>* splits[3] = {&ds.data.train, &ds.data.val, &ds.data.test};
  for (int i = 0; i < 3; ++i) {
    int seq_length = 0;
    *splits[i] = load_split(dir + "/" + kSplitNames[i] + ".csv", &seq_length);
    if (!splits[i]->empty() && seq_length != ds.seq_length)
      throw DataError(dir + ": split length differs from meta.json");
  }
  return ds;
}

}  // namespace ufcnn::tracking
