#include "seeclear/schedule.hpp"

#include <cmath>

namespace seeclear {

DiffusionSchedule build_schedule(std::size_t steps, double kappa, double sigma2_blur, double eta1, double etaT,
                                 std::size_t patch) {
  if (steps < 2) throw ScheduleError("schedule needs at least 2 steps");
  if (!(eta1 > 0.0 && eta1 < etaT && etaT <= 1.0)) throw ScheduleError("need 0 < eta1 < etaT <= 1");
  if (!(sigma2_blur >= 0.0)) throw ScheduleError("blur intensity must be non-negative");
  if (!(kappa >= 0.0)) throw ScheduleError("kappa must be non-negative");
  if (patch == 0) throw ScheduleError("patch size must be positive");

  DiffusionSchedule s;
  s.steps = steps;
  s.kappa = kappa;
  s.sigma2_blur = sigma2_blur;
  s.patch = patch;
  s.eta.assign(steps + 1, 0.0);
  s.alpha.assign(steps + 1, 0.0);
  s.tau.assign(steps + 1, 0.0);

  const double root1 = std::sqrt(eta1);
  const double base = std::sqrt(etaT) / root1;
  const double span = static_cast<double>(steps - 1);
  for (std::size_t t = 1; t <= steps; ++t) {
    const double r = root1 * std::pow(base, static_cast<double>(t - 1) / span);
    s.eta[t] = r * r;
  }
  // Pin the endpoints exactly; pow() may be off by an ulp.
  s.eta[1] = eta1;
  s.eta[steps] = etaT;
  for (std::size_t t = 1; t <= steps; ++t) {
    s.alpha[t] = s.eta[t] - s.eta[t - 1];
    s.tau[t] = static_cast<double>(t) / static_cast<double>(steps) * sigma2_blur / 2.0;
  }

  auto violations = validate(s);
  if (!violations.empty()) {
    std::string msg = "schedule violates invariants:";
    for (const auto& v : violations) msg += " [" + v.what + " @" + std::to_string(v.index) + "]";
    throw ScheduleError(msg, std::move(violations));
  }
  return s;
}

std::vector<ScheduleViolation> validate(const DiffusionSchedule& s) {
  std::vector<ScheduleViolation> out;
  const std::size_t n = s.steps + 1;
  if (s.steps < 2) out.push_back({"fewer than 2 steps", s.steps});
  if (s.eta.size() != n) out.push_back({"eta length", s.eta.size()});
  if (s.alpha.size() != n) out.push_back({"alpha length", s.alpha.size()});
  if (s.tau.size() != n) out.push_back({"tau length", s.tau.size()});
  if (!out.empty()) return out;

  if (!(s.kappa >= 0.0)) out.push_back({"kappa negative", 0});
  if (!(s.sigma2_blur >= 0.0)) out.push_back({"blur intensity negative", 0});
  if (s.patch == 0) out.push_back({"patch size zero", 0});
  if (s.eta[0] != 0.0) out.push_back({"eta_0 must be 0", 0});
  if (s.tau[0] != 0.0) out.push_back({"tau_0 must be 0", 0});
  if (!(s.eta[1] > 0.0 && s.eta[1] <= 0.01)) out.push_back({"eta_1 outside (0, 0.01]", 1});
  if (!(s.eta[s.steps] >= 0.99 && s.eta[s.steps] <= 1.0)) out.push_back({"eta_T outside [0.99, 1]", s.steps});
  for (std::size_t t = 2; t <= s.steps; ++t) {
    if (!(s.eta[t] > s.eta[t - 1])) out.push_back({"eta not strictly increasing", t});
  }
  for (std::size_t t = 1; t <= s.steps; ++t) {
    if (!(s.alpha[t] > 0.0)) out.push_back({"alpha not positive", t});
    if (std::abs(s.alpha[t] - (s.eta[t] - s.eta[t - 1])) > 1e-15) out.push_back({"alpha != eta_t - eta_{t-1}", t});
    if (!(s.tau[t] >= s.tau[t - 1])) out.push_back({"tau decreasing", t});
  }
  return out;
}

}  // namespace seeclear
