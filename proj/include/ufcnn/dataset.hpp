#pragma once

#include <string>
#include <vector>

#include "ufcnn/loss.hpp"

namespace ufcnn {

struct Sequence {
  SeqTensor input;
  LossTarget target;
};

struct Dataset {
  std::vector<Sequence> train, val, test;
};

// Per-channel input statistics, always computed from the training split and
// applied to every split.
struct ChannelStats {
  std::vector<double> mean;
  std::vector<double> stddev;
};

ChannelStats compute_channel_stats(const std::vector<Sequence>& train);
void apply_channel_stats(std::vector<Sequence>& seqs, const ChannelStats& stats,
                         bool scale_by_std);
void apply_channel_stats(Dataset& data, const ChannelStats& stats, bool scale_by_std);

// JSON sidecar so a checkpoint's preprocessing can be replayed later.
void save_channel_stats(const std::string& path, const ChannelStats& stats,
                        bool scale_by_std);
std::pair<ChannelStats, bool> load_channel_stats(const std::string& path);

}  // namespace ufcnn
