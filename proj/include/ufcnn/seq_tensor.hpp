#pragma once

#include <initializer_list>
#include <vector>

#include "ufcnn/errors.hpp"

namespace ufcnn {

// Rank-2 signal: `channels` rows of `length` time samples, row-major doubles.
// Time indices below 0 are treated as implicit zeros by the causal ops; no
// out-of-range sample is ever stored.
struct SeqTensor {
  int channels = 0;
  int length = 0;
  std::vector<double> data;

  SeqTensor() = default;

  SeqTensor(int channels_, int length_) : channels(channels_), length(length_) {
    if (channels_ <= 0 || length_ <= 0)
      throw ConfigError("SeqTensor dimensions must be positive");
    data.assign(size_t(channels_) * size_t(length_), 0.0);
  }

  static SeqTensor from_rows(std::initializer_list<std::initializer_list<double>> rows) {
    if (rows.size() == 0) throw ConfigError("SeqTensor::from_rows: no rows");
    SeqTensor t(int(rows.size()), int(rows.begin()->size()));
    int c = 0;
    for (const auto& row : rows) {
      if (int(row.size()) != t.length)
        throw ConfigError("SeqTensor::from_rows: ragged rows");
      int i = 0;
      for (double v : row) t.at(c, i++) = v;
      ++c;
    }
    return t;
  }

  double* row(int c) { return data.data() + size_t(c) * length; }
  const double* row(int c) const { return data.data() + size_t(c) * length; }

  double& at(int c, int t) { return data[size_t(c) * length + t]; }
  double at(int c, int t) const { return data[size_t(c) * length + t]; }

  bool same_shape(const SeqTensor& o) const {
    return channels == o.channels && length == o.length;
  }
};

}  // namespace ufcnn
