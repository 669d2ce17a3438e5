#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cffn/model.hpp"

namespace cffn {

struct GradCheckOptions {
  double step = 1e-4;
  double tolerance = 1e-4;
  int samples_per_group = 100;  // groups smaller than this are checked exhaustively
  int max_retries = 10;
  double kink_margin = 1e-6;
  // Relative error is |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double relative_floor = 1e-7;
  std::uint64_t seed = 0;
  ForwardOptions forward;
  double partition_weight = 0.8;
};

enum class GradCheckStatus { kPass, kFail, kInconclusive };

std::string_view to_string(GradCheckStatus status);

struct GroupReport {
  std::string name;
  Index size = 0;
  int checked = 0;
  int resampled = 0;
  double max_relative_error = 0.0;
  double max_absolute_error = 0.0;
  GradCheckStatus status = GradCheckStatus::kPass;
};

struct GradCheckReport {
  std::vector<GroupReport> groups;
  double max_relative_error = 0.0;
  GradCheckStatus status = GradCheckStatus::kPass;
};

/// Central differences of the total loss on sampled scalars of every
/// parameter tensor, against the analytic gradient. A sample whose base point
/// sits within `kink_margin` of a ReLU / threshold / clamp switch, or whose
/// +-step evaluations change any of those switches, is redrawn. A group with
/// fewer scalars than requested is checked exhaustively minus such scalars.
GradCheckReport grad_check(const ModelParams<double>& params, const PostRecord& post, const GradCheckOptions& options);

/// Generic scalar check used for toy objectives: returns (analytic, numeric).
std::pair<double, double> check_scalar(const std::function<double(double)>& f, const std::function<double(double)>& df,
                                       double x, double step);

nlohmann::json to_json(const GradCheckReport& report);

}  // namespace cffn
