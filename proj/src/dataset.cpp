#include "ufcnn/dataset.hpp"

#include <cmath>
#include <fstream>

#include <json.hpp>

#include "ufcnn/errors.hpp"

namespace ufcnn {

ChannelStats compute_channel_stats(const std::vector<Sequence>& train) {
  if (train.empty()) throw ConfigError("compute_channel_stats: empty training split");
  const int channels = train.front().input.channels;
  ChannelStats stats;
  stats.mean.assign(channels, 0.0);
  stats.stddev.assign(channels, 0.0);
  std::vector<long long> counts(channels, 0);
  for (const Sequence& s : train) {
    if (s.input.channels != channels)
      throw ConfigError("compute_channel_stats: inconsistent channel counts");
    for (int c = 0; c < channels; ++c) {
      const double* row = s.input.row(c);
      for (int t = 0; t < s.input.length; ++t) stats.mean[c] += row[t];
      counts[c] += s.input.length;
    }
  }
  for (int c = 0; c < channels; ++c) stats.mean[c] /= double(counts[c]);
  for (const Sequence& s : train) {
    for (int c = 0; c < channels; ++c) {
      const double* row = s.input.row(c);
      for (int t = 0; t < s.input.length; ++t) {
        const double d = row[t] - stats.mean[c];
        stats.stddev[c] += d * d;
      }
    }
  }
  for (int c = 0; c < channels; ++c) {
    stats.stddev[c] = std::sqrt(stats.stddev[c] / double(counts[c]));
    if (stats.stddev[c] == 0.0) stats.stddev[c] = 1.0;  // constant channel
  }
  return stats;
}

void apply_channel_stats(std::vector<Sequence>& seqs, const ChannelStats& stats,
                         bool scale_by_std) {
  for (Sequence& s : seqs) {
    if (s.input.channels != int(stats.mean.size()))
      throw ConfigError("apply_channel_stats: channel count mismatch");
    for (int c = 0; c < s.input.channels; ++c) {
      double* row = s.input.row(c);
      const double m = stats.mean[c];
      const double inv = scale_by_std ? 1.0 / stats.stddev[c] : 1.0;
      for (int t = 0; t < s.input.length; ++t) row[t] = (row[t] - m) * inv;
    }
  }
}

void apply_channel_stats(Dataset& data, const ChannelStats& stats, bool scale_by_std) {
  apply_channel_stats(data.train, stats, scale_by_std);
  apply_channel_stats(data.val, stats, scale_by_std);
  apply_channel_stats(data.test, stats, scale_by_std);
}

void save_channel_stats(const std::string& path, const ChannelStats& stats,
                        bool scale_by_std) {
  nlohmann::json j;
  j["format"] = "ufcnn-stats-v1";
  j["mean"] = stats.mean;
  j["stddev"] = stats.stddev;
  j["scale_by_std"] = scale_by_std;
  std::ofstream out(path);
  if (!out) throw DataError("cannot open stats file for writing: " + path);
  out << j.dump(2) << "\n";
}

std::pair<ChannelStats, bool> load_channel_stats(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open stats file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  if (!j.contains("format") || j["format"] != "ufcnn-stats-v1")
    throw DataError(path + ": missing or unsupported format tag");
  ChannelStats stats;
  stats.mean = j.at("mean").get<std::vector<double>>();
  stats.stddev = j.at("stddev").get<std::vector<double>>();
  if (stats.mean.size() != stats.stddev.size())
    throw DataError(path + ": mean/stddev size mismatch");
  return {std::move(stats), j.at("scale_by_std").get<bool>()};
}

}  // namespace ufcnn
