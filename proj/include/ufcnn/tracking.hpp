#pragma once

#include <cstdint>
#include <string>

#include "ufcnn/dataset.hpp"
#include "ufcnn/rng.hpp"

namespace ufcnn::tracking {

// Target bouncing inside the square [-half_side, half_side]^2. Per-step
// position noise has standard deviation sigma_w * sqrt(0.5) per axis;
// velocities are noise-free, so their magnitudes are conserved exactly.
// The observed bearing is atan2(y, x) plus N(0, sigma_nu^2) noise.
struct TrackingParams {
  double half_side = 10.0;     // D
  double target_radius = 0.3;  // delta: the wall band starts at half_side - target_radius
  double sigma_w = 0.005;
  double sigma_nu = 0.005;

  void validate() const;
};

struct TrackingState {
  double x = 0, x_dot = 0, y = 0, y_dot = 0;
};

// Flips a velocity component toward the interior when its coordinate has
// entered the wall band; positions are unchanged.
TrackingState bounce(TrackingState z, const TrackingParams& p);

// bounce, then integrate positions by one step and add position noise.
TrackingState step_state(const TrackingState& z, const TrackingParams& p, Rng& rng);

// Full-quadrant bearing in (-pi, pi]. The origin has no bearing.
double observe(const TrackingState& z, const TrackingParams& p, Rng& rng);

// Positions uniform on the inner half of the square; per-axis speeds uniform
// on [0.05, 0.25] with random sign, so every trajectory reaches the walls.
TrackingState sample_initial_state(const TrackingParams& p, Rng& rng);

struct TrackingDataset {
  Dataset data;             // inputs: 1xT bearings; targets: 2xT (x, y)
  double input_mean = 0.0;  // training-split bearing mean, subtracted from all inputs
  TrackingParams params;
  int seq_length = 0;
};

// Per-sequence derived seeds; deterministic for a fixed seed regardless of
// the generation order.
TrackingDataset generate_dataset(const TrackingParams& p, int n_train, int n_val,
                                 int n_test, int seq_length, uint64_t seed);

// One CSV per split (name lines, count line, then per sequence the input
// rows followed by the target rows) plus a meta.json sidecar with the
// stored mean and generation parameters.
void save_dataset(const TrackingDataset& ds, const std::string& dir);
TrackingDataset load_dataset(const std::string& dir);

}  // namespace ufcnn::tracking
