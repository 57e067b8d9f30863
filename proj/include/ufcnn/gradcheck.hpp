#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ufcnn {

inline constexpr double kGradCheckStep = 1e-5;
inline constexpr double kGradCheckTol = 1e-4;

struct GradCheckReport {
  std::string name;
  int coords = 0;
  double max_rel_err = 0.0;
  bool pass = false;
};

// Central finite differences against the analytic backward pass, for every
// primitive and for small end-to-end networks of both variants. Each suite
// checks at least 100 coordinates. The numeric side recomputes forward
// passes only; it never calls the backward code it is checking.
std::vector<GradCheckReport> run_gradient_suites(uint64_t seed);

bool all_pass(const std::vector<GradCheckReport>& reports);

}  // namespace ufcnn
