#include "dialkit/align.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dialkit/answer.hpp"
#include "dialkit/errors.hpp"
#include "dialkit/kernels.hpp"

namespace dialkit::align {

void MarginSchedule::validate() const {
  if (!(m_min >= 0.0) || !(m_max >= m_min)) throw DomainError("margin schedule needs 0 <= m_min <= m_max");
  if (!(gap_cap > 0.0 && gap_cap <= 1.0)) throw DomainError("margin schedule needs gap_cap in (0, 1]");
}

double margin_for_gap(double norm_gap, const MarginSchedule& schedule) {
  schedule.validate();
  if (!(norm_gap >= 0.0 && norm_gap <= 1.0)) {
    throw DomainError("normalized state gap " + std::to_string(norm_gap) + " outside [0, 1]");
  }
  const double t = std::min(norm_gap / schedule.gap_cap, 1.0);
  return schedule.m_min + (schedule.m_max - schedule.m_min) * t;
}

double triplet_hinge(const TripletTerm& term) {
  const std::size_t d = term.anchor.size();
  if (term.positive.size() != d || term.negative.size() != d) {
    throw DimensionMismatch("triplet members have different dimensions");
  }
  const double d_ap = std::sqrt(kernels::squared_l2(term.anchor, term.positive));
  const double d_an = std::sqrt(kernels::squared_l2(term.anchor, term.negative));
  return std::max(0.0, d_ap - d_an + term.margin);
}

double triplet_loss(std::span<const TripletTerm> batch) {
  if (batch.empty()) throw EmptyBatch("triplet_loss needs at least one triplet");
  const std::size_t d = batch.front().anchor.size();
  double sum = 0.0;
  for (const auto& term : batch) {
    if (term.anchor.size() != d) throw DimensionMismatch("triplets in one batch must share a dimension");
    sum += triplet_hinge(term);
  }
  return sum / static_cast<double>(batch.size());
}

double triplet_weight(long step, const WarmupSchedule& schedule) {
  if (step < 0) throw DomainError("warm-up step must be non-negative");
  if (schedule.warmup_steps <= 0) return schedule.lambda_max;
  const double t = std::min(static_cast<double>(step) / static_cast<double>(schedule.warmup_steps), 1.0);
  return schedule.lambda_max * t;
}

void RewardConfig::validate() const {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) throw DomainError("reward sigma must be > 0");
  if (!(beta >= 0.0 && beta <= 1.0)) throw DomainError("reward beta must lie in [0, 1]");
  if (!(group_eps >= 0.0)) throw DomainError("group_eps must be >= 0");
}

double state_reward(double d_norm, const RewardConfig& config) {
  if (!(d_norm >= 0.0)) throw DomainError("state distance must be non-negative");
  return std::exp(-(d_norm * d_norm) / (2.0 * config.sigma * config.sigma));
}

int format_reward(std::string_view response_text, Task task) {
  return parse_prediction(response_text, task).has_value() ? 1 : 0;
}

double combined_reward(double r_state, int r_fmt, const RewardConfig& config) {
  if (!(r_state >= 0.0 && r_state <= 1.0)) throw DomainError("r_state must lie in [0, 1]");
  if (r_fmt != 0 && r_fmt != 1) throw DomainError("r_fmt must be 0 or 1");
  if (!(config.beta >= 0.0 && config.beta <= 1.0)) throw DomainError("reward beta must lie in [0, 1]");
  return (1.0 - config.beta) * r_state + config.beta * static_cast<double>(r_fmt);
}

std::vector<double> group_normalize(std::span<const double> rewards, double group_eps) {
  if (rewards.empty()) throw EmptyGroup("group_normalize needs at least one reward");
  if (!(group_eps >= 0.0)) throw DomainError("group_eps must be non-negative");
  const auto [lo, hi] = std::minmax_element(rewards.begin(), rewards.end());
  std::vector<double> out(rewards.size(), 0.0);
  if (*lo == *hi) return out;
  const double n = static_cast<double>(rewards.size());
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= n;
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  const double denom = std::sqrt(var / n) + group_eps;
  for (std::size_t i = 0; i < rewards.size(); ++i) out[i] = (rewards[i] - mean) / denom;
  return out;
}

RewardBreakdown score_response(std::string_view response_text, const DialState& truth,
                               const RewardConfig& config) {
  config.validate();
  const GaugeCalibration* cal = nullptr;
  if (const auto* g = std::get_if<GaugeState>(&truth)) cal = &g->calibration();
  RewardBreakdown out;
  const auto pred = parse_prediction(response_text, task_of(truth), cal);
  if (pred) {
    out.r_fmt = 1;
    out.r_state = state_reward(prediction_distance_normalized(*pred, truth), config);
  }
  out.r = combined_reward(out.r_state, out.r_fmt, config);
  return out;
}

}  // namespace dialkit::align
