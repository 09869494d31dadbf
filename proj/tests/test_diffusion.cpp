#include <doctest.h>

#include <cmath>

#include "seeclear/diffusion.hpp"
#include "seeclear/spectral.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

using namespace seeclear;
using seeclear::test::grid_posterior;
using seeclear::test::flipped_sign_mu;
using seeclear::test::random_tensor;

namespace {

DiffusionSchedule random_schedule(RandomStream& rng) {
  const auto steps = static_cast<std::size_t>(2 + rng.next_u64() % 29);
  return build_schedule(steps, rng.uniform(0.01, 2.0), rng.uniform(0.0, 4.0), rng.uniform(1e-4, 0.01),
                        rng.uniform(0.99, 0.9999));
}

SpectralState spectral(const Tensor& t, std::size_t step = 0) { return {t, step}; }

}  // namespace

TEST_CASE("marginal endpoints") {
  const DiffusionSchedule s = build_schedule(15, 0.0, 0.0, 0.001, 0.999);
  const Tensor u0 = random_tensor({1, 8, 8}, 1), ul = random_tensor({1, 8, 8}, 2);
  const auto x = forward_marginal_sample(spectral(u0), spectral(ul), 15, s, KeyedNormal(0));
  for (std::size_t i = 0; i < 64; ++i) CHECK(std::abs(x.u[i] - (0.001 * u0[i] + 0.999 * ul[i])) < 1e-15);
  CHECK(max_abs_diff(marginal_mean(u0, ul, 0, s), u0) == 0.0);
  CHECK_THROWS_AS(forward_marginal_sample(spectral(u0), spectral(ul), 16, s, KeyedNormal(0)), std::out_of_range);
  CHECK_THROWS_AS(forward_marginal_sample(spectral(u0), spectral(ul), 0, s, KeyedNormal(0)), std::out_of_range);
  CHECK_THROWS_AS(marginal_mean(u0, random_tensor({1, 8, 16}, 3), 2, s), DimensionError);
}

TEST_CASE("forward marginal Monte Carlo moments") {
  const DiffusionSchedule s = build_schedule(15, 0.3, 2.0, 0.001, 0.999);
  const Tensor u0 = random_tensor({8, 8}, 4), ul = random_tensor({8, 8}, 5);
  const std::size_t t = 7, coeff = 1 * 8 + 2, n = 100000;
  const double mean = marginal_mean(u0, ul, t, s)[coeff];
  const double var = s.kappa * s.kappa * s.eta[t];
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double x =
        forward_marginal_sample(spectral(u0), spectral(ul), t, s, KeyedNormal(11, static_cast<std::uint32_t>(i)))
            .u[coeff];
    s1 += x;
    s2 += x * x;
  }
  const double m = s1 / n, v = s2 / n - m * m;
  CHECK(std::abs(m - mean) < 4.0 * std::sqrt(var / n));
  CHECK(std::abs(v / var - 1.0) < 0.05);
}

TEST_CASE("noiseless transitions compose to the marginal mean") {
  RandomStream rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    DiffusionSchedule s = random_schedule(rng);
    s.kappa = 0.0;
    const Tensor u0 = random_tensor({2, 8, 16}, 100 + trial), ul = random_tensor({2, 8, 16}, 200 + trial);
    SpectralState state = spectral(u0);
    for (std::size_t t = 1; t <= s.steps; ++t) {
      state = transition_sample(state, spectral(ul), t, s, KeyedNormal(0));
      CHECK(max_abs_diff(state.u, marginal_mean(u0, ul, t, s)) < 1e-12);
    }
  }
}

TEST_CASE("composed transition variance falls short of the marginal variance") {
  // Per-coefficient moment propagation of the composed kernel:
  //   V_t = lambda_t^2 V_{t-1} + kappa^2 alpha_t, V_0 = 0,
  // against the marginal kappa^2 eta_t. They agree at t = 1 only, because
  // lambda_t < 1 shrinks the variance carried forward.
  const DiffusionSchedule s = build_schedule(15, 1.0, 2.0, 0.001, 0.999);
  for (std::size_t f : {0u, 9u, 63u}) {
    double v = 0.0;
    for (std::size_t t = 1; t <= s.steps; ++t) {
      const double lam = transition_factors(s, t)[f];
      v = lam * lam * v + s.alpha[t];
      if (t == 1) {
        CHECK(v == doctest::Approx(s.eta[1]).epsilon(1e-15));
      } else {
        CHECK(v < s.eta[t]);
      }
    }
    CHECK(s.eta[15] - v > 1e-4);
  }
  // T = 2 at DC: 0.001 * (0.001/0.999)^2 + 0.998 vs 0.999.
  const DiffusionSchedule two = build_schedule(2, 1.0, 0.0, 0.001, 0.999);
  const double lam = transition_factors(two, 2)[0];
  CHECK(lam == doctest::Approx(0.001 / 0.999).epsilon(1e-14));
  CHECK(lam * lam * 0.001 + 0.998 == doctest::Approx(0.998).epsilon(1e-5));
}

TEST_CASE("sampled transitions follow the propagated moments") {
  const DiffusionSchedule s = build_schedule(6, 0.5, 2.0, 0.001, 0.999);
  const Tensor u0 = random_tensor({8, 8}, 6), ul = random_tensor({8, 8}, 7);
  const std::size_t coeff = 2 * 8 + 3, n = 20000;
  double v_pred = 0.0;
  for (std::size_t t = 1; t <= s.steps; ++t) {
    const double lam = transition_factors(s, t)[coeff];
    v_pred = lam * lam * v_pred + s.kappa * s.kappa * s.alpha[t];
  }
  const double mean = marginal_mean(u0, ul, s.steps, s)[coeff];
  double s1 = 0.0, s2 = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const KeyedNormal noise(3, static_cast<std::uint32_t>(i));
    SpectralState st = spectral(u0);
    for (std::size_t t = 1; t <= s.steps; ++t) st = transition_sample(st, spectral(ul), t, s, noise);
    s1 += st.u[coeff];
    s2 += st.u[coeff] * st.u[coeff];
  }
  const double m = s1 / n, v = s2 / n - m * m;
  CHECK(std::abs(m - mean) < 4.0 * std::sqrt(v_pred / n));
  CHECK(std::abs(v / v_pred - 1.0) < 0.05);

  SpectralState st = spectral(u0);
  CHECK_THROWS_AS(transition_sample(st, spectral(ul), 2, s, KeyedNormal(0)), std::invalid_argument);
}

TEST_CASE("posterior matches numerical Bayes; a flipped u_l sign does not") {
  RandomStream rng(77);
  double worst_mu = 0.0, worst_var = 0.0, flipped_worst = 0.0;
  int flipped_fails = 0;
  for (int i = 0; i < 1000; ++i) {
    const double eta_prev = rng.uniform(1e-3, 0.9);
    const double eta = std::min(0.999, eta_prev + rng.uniform(1e-3, 0.1));
    const double lambda = (1.0 - eta) / (1.0 - eta_prev) * std::exp(rng.uniform(-3.0, 0.0));
    const double decay_prev = std::exp(rng.uniform(-3.0, 0.0));
    const double kappa = rng.uniform(0.05, 2.0);
    const double u0 = rng.uniform(-1.0, 1.0), u_l = rng.uniform(0.5, 1.5);
    // Draw a consistent (u_{t-1}, u_t) pair.
    const double x = (1.0 - eta_prev) * decay_prev * u0 + eta_prev * u_l + kappa * std::sqrt(eta_prev) * rng.normal();
    const double u_t = lambda * (x - eta_prev * u_l) + eta * u_l + kappa * std::sqrt(eta - eta_prev) * rng.normal();

    const auto closed = posterior_coefficient(u_t, u0, u_l, eta_prev, eta, lambda, decay_prev, kappa);
    const auto grid = grid_posterior(u_t, u0, u_l, eta_prev, eta, lambda, decay_prev, kappa);
    const double scale = std::max(std::abs(closed.mu), std::sqrt(closed.sigma2));
    worst_mu = std::max(worst_mu, std::abs(grid.mu - closed.mu) / scale);
    worst_var = std::max(worst_var, std::abs(grid.sigma2 - closed.sigma2) / closed.sigma2);
    const double bad = flipped_sign_mu(u_t, u0, u_l, eta_prev, eta, lambda, decay_prev);
    const double bad_err = std::abs(grid.mu - bad) / scale;
    flipped_worst = std::max(flipped_worst, bad_err);
    if (bad_err > 1e-6) ++flipped_fails;
  }
  CHECK(worst_mu < 1e-6);
  CHECK(worst_var < 1e-6);
  // The flipped sign misses the oracle on essentially every instance.
  CHECK(flipped_fails >= 990);
  CHECK(flipped_worst > 1e-2);
}

TEST_CASE("posterior of a noiseless chain returns the previous state") {
  const DiffusionSchedule s = build_schedule(15, 0.0, 2.0, 0.001, 0.999);
  const Tensor u0 = random_tensor({3, 8, 8}, 8), ul = random_tensor({3, 8, 8}, 9);
  for (std::size_t t = 1; t <= 15; ++t) {
    const auto p = posterior_params(spectral(marginal_mean(u0, ul, t, s), t), u0, spectral(ul), t, s);
    CHECK(max_abs_diff(p.mu, marginal_mean(u0, ul, t - 1, s)) < 1e-12);
    CHECK(max_abs(p.sigma2) == 0.0);
  }
}

TEST_CASE("terminal step collapses onto the estimate") {
  RandomStream rng(5);
  for (int i = 0; i < 100; ++i) {
    const double u0 = rng.uniform(-2, 2);
    const auto p = posterior_coefficient(rng.uniform(-2, 2), u0, rng.uniform(-2, 2), 0.0, rng.uniform(1e-4, 0.01),
                                         rng.uniform(0.0, 1.0), 1.0, rng.uniform(0.0, 3.0));
    CHECK(p.mu == u0);
    CHECK(p.sigma2 == 0.0);
  }
  const DiffusionSchedule s = build_schedule(15, 0.7, 2.0, 0.001, 0.999);
  const Tensor u0 = random_tensor({8, 8}, 1);
  const auto out = posterior_sample(spectral(random_tensor({8, 8}, 2), 1), u0, spectral(random_tensor({8, 8}, 3)), s,
                                    KeyedNormal(4));
  CHECK(out.t == 0);
  CHECK(out.u == u0);
}

TEST_CASE("oracle reverse chain") {
  const Tensor u0 = dct2_patches(random_tensor({3, 16, 16}, 1, 0, 1), 8).coeffs;
  const Tensor ul = dct2_patches(random_tensor({3, 16, 16}, 2, 0, 1), 8).coeffs;
  const DiffusionSchedule quiet = build_schedule(15, 0.0, 2.0, 0.001, 0.999);
  CHECK(max_abs_diff(reverse_sample(spectral(ul, 15), oracle_denoiser(u0), quiet, KeyedNormal(1)).u, u0) < 1e-8);

  const DiffusionSchedule noisy = build_schedule(15, 0.5, 2.0, 0.001, 0.999);
  CHECK(reverse_sample(spectral(ul, 15), oracle_denoiser(u0), noisy, KeyedNormal(1)).u == u0);

  const DiffusionSchedule flat = build_schedule(15, 0.0, 0.0, 0.001, 0.999);
  const Denoiser zero = [](const Tensor& u, std::size_t) { return Tensor(u.shape()); };
  CHECK(max_abs(reverse_sample(spectral(ul, 15), zero, flat, KeyedNormal(1)).u) == 0.0);

  const Denoiser wrong = [](const Tensor&, std::size_t) { return Tensor({8, 8}); };
  CHECK_THROWS_AS(reverse_sample(spectral(ul, 15), wrong, noisy, KeyedNormal(1)), DimensionError);

  // Same seed, same draws.
  const Denoiser half = [&](const Tensor& u, std::size_t) { return scale(u, 0.5); };
  CHECK(reverse_sample(spectral(ul, 15), half, noisy, KeyedNormal(9)).u ==
        reverse_sample(spectral(ul, 15), half, noisy, KeyedNormal(9)).u);
  CHECK(reverse_sample(spectral(ul, 15), half, noisy, KeyedNormal(9)).u !=
        reverse_sample(spectral(ul, 15), half, noisy, KeyedNormal(10)).u);
}

TEST_CASE("oracle reverse chain approaches the noiseless path") {
  // E|u_t - mean_t|^2 should not grow as t decreases, per coefficient.
  const DiffusionSchedule s = build_schedule(15, 0.5, 2.0, 0.001, 0.999);
  const Tensor u0 = random_tensor({8, 8}, 3), ul = random_tensor({8, 8}, 4);
  const std::size_t runs = 1000;
  std::vector<std::vector<double>> err(s.steps + 1, std::vector<double>(64, 0.0));
  const Denoiser oracle = oracle_denoiser(u0);
  for (std::size_t r = 0; r < runs; ++r) {
    const KeyedNormal noise(5, static_cast<std::uint32_t>(r));
    SpectralState st = reverse_init(spectral(ul), s, noise);
    while (true) {
      const Tensor mean = marginal_mean(u0, ul, st.t, s);
      for (std::size_t i = 0; i < 64; ++i) err[st.t][i] += (st.u[i] - mean[i]) * (st.u[i] - mean[i]) / runs;
      if (st.t == 0) break;
      st = posterior_sample(st, oracle(st.u, st.t), spectral(ul), s, noise);
    }
  }
  std::size_t violations = 0, total = 0;
  for (std::size_t t = s.steps; t >= 1; --t)
    for (std::size_t i = 0; i < 64; ++i, ++total)
      if (err[t - 1][i] > err[t][i]) ++violations;
  CHECK(static_cast<double>(violations) <= 0.01 * static_cast<double>(total));
  for (double e : err[0]) CHECK(e == 0.0);
}
