#include "cffn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

namespace cffn {

std::string_view to_string(GradCheckStatus status) {
  switch (status) {
    case GradCheckStatus::kPass: return "PASS";
    case GradCheckStatus::kFail: return "FAIL";
    case GradCheckStatus::kInconclusive: return "INCONCLUSIVE";
  }
  return "FAIL";
}

std::pair<double, double> check_scalar(const std::function<double(double)>& f, const std::function<double(double)>& df,
                                       double x, double step) {
  return {df(x), (f(x + step) - f(x - step)) / (2.0 * step)};
}

GradCheckReport grad_check(const ModelParams<double>& base, const PostRecord& post, const GradCheckOptions& opt) {
  ModelParams<double> params = base;
  auto grad = ModelParams<double>::zeros(params.dims());

  const auto base_trace = forward(post, params, opt.forward);
  backward(base_trace, params, post.label, opt.partition_weight, &grad);
  const KinkState base_kinks = kink_state(base_trace);
  const bool base_near_kink = base_kinks.relu_margin < opt.kink_margin ||
                              base_kinks.partition_margin < opt.kink_margin ||
                              base_kinks.clamp_margin < opt.kink_margin;

  auto evaluate = [&](KinkState& kinks) {
    const auto trace = forward(post, params, opt.forward);
    kinks = kink_state(trace);
    return backward<double>(trace, params, post.label, opt.partition_weight, nullptr).total;
  };

  std::mt19937_64 rng(opt.seed);
  GradCheckReport report;
  auto tensors = params.tensors();
  const auto grads = grad.tensors();

  for (std::size_t t = 0; t < tensors.size(); ++t) {
    auto& tensor = tensors[t];
    GroupReport group;
    group.name = tensor.name;
    group.size = tensor.size();

    std::vector<Index> candidates(static_cast<std::size_t>(tensor.size()));
    std::iota(candidates.begin(), candidates.end(), Index{0});
    std::shuffle(candidates.begin(), candidates.end(), rng);
    const auto wanted = std::min<std::size_t>(static_cast<std::size_t>(opt.samples_per_group), candidates.size());

    std::size_t next = 0;
    for (std::size_t slot = 0; slot < wanted; ++slot) {
      bool done = false;
      for (int attempt = 0; attempt <= opt.max_retries && next < candidates.size(); ++attempt) {
        const Index index = candidates[next++];
        if (base_near_kink) {
          ++group.resampled;
          continue;
        }
        double& value = tensor.data[index];
        const double original = value;
        KinkState plus_kinks;
        KinkState minus_kinks;
        value = original + opt.step;
        const double plus = evaluate(plus_kinks);
        value = original - opt.step;
        const double minus = evaluate(minus_kinks);
        value = original;

        if (plus_kinks.pattern != base_kinks.pattern || minus_kinks.pattern != base_kinks.pattern) {
          ++group.resampled;
          continue;
        }
        const double numeric = (plus - minus) / (2.0 * opt.step);
        const double analytic = grads[t].data[index];
        const double abs_err = std::abs(analytic - numeric);
        const double rel_err = abs_err / std::max({std::abs(analytic), std::abs(numeric), opt.relative_floor});
        group.max_absolute_error = std::max(group.max_absolute_error, abs_err);
        group.max_relative_error = std::max(group.max_relative_error, rel_err);
        ++group.checked;
        done = true;
        break;
      }
      if (!done) {
        // An exhausted pool only skips kinked scalars of a small group.
        if (next >= candidates.size() && group.checked > 0) break;
        group.status = GradCheckStatus::kInconclusive;
        break;
      }
    }
    if (group.status != GradCheckStatus::kInconclusive && group.max_relative_error > opt.tolerance) {
      group.status = GradCheckStatus::kFail;
    }
    report.max_relative_error = std::max(report.max_relative_error, group.max_relative_error);
    report.groups.push_back(std::move(group));
  }

  report.status = GradCheckStatus::kPass;
  for (const auto& g : report.groups) {
    if (g.status == GradCheckStatus::kFail) report.status = GradCheckStatus::kFail;
  }
  if (report.status == GradCheckStatus::kPass) {
    for (const auto& g : report.groups) {
      if (g.status == GradCheckStatus::kInconclusive) report.status = GradCheckStatus::kInconclusive;
    }
  }
  return report;
}

nlohmann::json to_json(const GradCheckReport& report) {
  nlohmann::json groups = nlohmann::json::array();
  for (const auto& g : report.groups) {
    groups.push_back({{"name", g.name},
                      {"size", g.size},
                      {"checked", g.checked},
                      {"resampled", g.resampled},
                      {"max_relative_error", g.max_relative_error},
                      {"max_absolute_error", g.max_absolute_error},
                      {"status", std::string(to_string(g.status))}});
  }
  return {{"status", std::string(to_string(report.status))},
          {"max_relative_error", report.max_relative_error},
          {"groups", groups}};
}

}  // namespace cffn
