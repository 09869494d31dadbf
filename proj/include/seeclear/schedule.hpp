#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace seeclear {

/// Residual-shift, noise and dissipation schedule of the forward chain.
///
/// Arrays are indexed 0..T. eta[0] = 0 and tau[0] = 0 extend the 1..T
/// chain so the final reverse step (t = 1 -> 0) is well defined.
/// alpha[0] is unused and kept at 0.
struct DiffusionSchedule {
  std::size_t steps = 0;        // T
  std::vector<double> eta;      // T+1
  std::vector<double> alpha;    // T+1, alpha[t] = eta[t] - eta[t-1]
  std::vector<double> tau;      // T+1
  double kappa = 0.0;
  double sigma2_blur = 0.0;
  std::size_t patch = 8;
};

struct ScheduleViolation {
  std::string what;
  std::size_t index;
};

class ScheduleError : public std::invalid_argument {
 public:
  explicit ScheduleError(const std::string& message, std::vector<ScheduleViolation> violations = {})
      : std::invalid_argument(message), violations_(std::move(violations)) {}
  const std::vector<ScheduleViolation>& violations() const { return violations_; }

 private:
  std::vector<ScheduleViolation> violations_;
};

/// eta is geometric in sqrt(eta) between eta1 and etaT; tau grows linearly
/// from 0 to sigma2_blur / 2 (Gaussian blur variance = 2 * tau).
DiffusionSchedule build_schedule(std::size_t steps, double kappa, double sigma2_blur, double eta1, double etaT,
                                 std::size_t patch = 8);

/// Every violated invariant, with the offending index.
std::vector<ScheduleViolation> validate(const DiffusionSchedule& s);

}  // namespace seeclear
