#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>

namespace seeclear::test {

struct GridPosterior {
  double mu;
  double sigma2;
};

// Numerical Bayes: integrate prior x likelihood on a grid around the mass.
inline GridPosterior grid_posterior(double u_t, double u0, double u_l, double eta_prev, double eta, double lambda,
                                    double decay_prev, double kappa) {
  const double alpha = eta - eta_prev;
  const double m_p = (1.0 - eta_prev) * decay_prev * u0 + eta_prev * u_l;
  const double v_p = kappa * kappa * eta_prev;
  const double v_l = kappa * kappa * alpha;
  auto log_density = [&](double x) {
    const double r = u_t - lambda * (x - eta_prev * u_l) - eta * u_l;
    return -(x - m_p) * (x - m_p) / (2.0 * v_p) - r * r / (2.0 * v_l);
  };
  auto moments = [&](double lo, double hi, std::size_t n) {
    const double h = (hi - lo) / static_cast<double>(n - 1);
    double peak = -1e300;
    for (std::size_t i = 0; i < n; ++i) peak = std::max(peak, log_density(lo + h * i));
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double x = lo + h * i;
      const double w = std::exp(log_density(x) - peak) * ((i == 0 || i + 1 == n) ? 0.5 : 1.0);
      z += w;
      m1 += w * x;
      m2 += w * x * x;
    }
    const double mean = m1 / z;
    return GridPosterior{mean, m2 / z - mean * mean};
  };
  // Coarse pass bounded by the narrower factor, then a refined pass.
  const double sd_p = std::sqrt(v_p), sd_l = std::sqrt(v_l) / lambda;
  const double x_l = (u_t - eta * u_l) / lambda + eta_prev * u_l;
  const double c0 = sd_p < sd_l ? m_p : x_l, s0 = std::min(sd_p, sd_l);
  const GridPosterior coarse = moments(c0 - 40.0 * s0, c0 + 40.0 * s0, 20001);
  const double sd = std::sqrt(coarse.sigma2);
  return moments(coarse.mu - 14.0 * sd, coarse.mu + 14.0 * sd, 8001);
}

// Posterior mean with -alpha eta' in place of +alpha eta' on the u_l term.
inline double flipped_sign_mu(double u_t, double u0, double u_l, double eta_prev, double eta, double lambda,
                              double decay_prev) {
  const double alpha = eta - eta_prev;
  const double denom = lambda * lambda * eta_prev + alpha;
  return (lambda * eta_prev * u_t + alpha * (1.0 - eta_prev) * decay_prev * u0 +
          (lambda * lambda * eta_prev * eta_prev - lambda * eta_prev * eta - alpha * eta_prev) * u_l) /
         denom;
}

}  // namespace seeclear::test
