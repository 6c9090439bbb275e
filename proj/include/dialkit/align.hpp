#pragma once

#include <span>
#include <string_view>
#include <vector>

#include "dialkit/state.hpp"

// Triplet objective with state-gap margins, state-aware rewards and
// group-relative advantage normalization. Reference kernels for external
// trainers; nothing here owns optimizer state.
namespace dialkit::align {

// margin = m_min + (m_max - m_min) * min(gap / gap_cap, 1)
struct MarginSchedule {
  double m_min = 0.2;
  double m_max = 1.0;
  double gap_cap = 0.5;

  void validate() const;
};

double margin_for_gap(double norm_gap, const MarginSchedule& schedule);

struct TripletTerm {
  std::span<const double> anchor;
  std::span<const double> positive;
  std::span<const double> negative;
  double margin = 0.0;
};

// [‖a - p‖ - ‖a - n‖ + m]_+ for one triplet.
double triplet_hinge(const TripletTerm& term);

// Mean hinge over the batch, summed in batch order.
// Throws EmptyBatch, DimensionMismatch.
double triplet_loss(std::span<const TripletTerm> batch);

// lambda(step) = lambda_max * min(step / warmup_steps, 1)
struct WarmupSchedule {
  double lambda_max = 0.1;
  long warmup_steps = 1000;
};

double triplet_weight(long step, const WarmupSchedule& schedule);

struct RewardConfig {
  double sigma = 0.05;
  double beta = 0.1;
  double group_eps = 1e-8;

  void validate() const;
};

// exp(-d^2 / (2 sigma^2)); d is a normalized state distance.
double state_reward(double d_norm, const RewardConfig& config);

// 1 when the response carries a parseable final answer for the task.
int format_reward(std::string_view response_text, Task task);

// (1 - beta) r_state + beta r_fmt
double combined_reward(double r_state, int r_fmt, const RewardConfig& config);

// (r_j - mean) / (population_std + eps). Throws EmptyGroup.
std::vector<double> group_normalize(std::span<const double> rewards, double group_eps);

struct RewardBreakdown {
  double r_state = 0.0;
  int r_fmt = 0;
  double r = 0.0;
};

// Full reward for one response against the true state. An unparseable
// response scores r_state = 0.
RewardBreakdown score_response(std::string_view response_text, const DialState& truth,
                               const RewardConfig& config);

}  // namespace dialkit::align
