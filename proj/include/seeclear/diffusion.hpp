#pragma once

#include <cstddef>
#include <functional>

#include "seeclear/rng.hpp"
#include "seeclear/schedule.hpp"
#include "seeclear/tensor.hpp"

namespace seeclear {

/// DCT-domain chain state. The last two axes of `u` are patch-tiled
/// coefficient grids (see PatchSpectrum); leading axes are frames/channels.
struct SpectralState {
  Tensor u;
  std::size_t t = 0;
};

struct PosteriorParams {
  Tensor mu;
  Tensor sigma2;
};

/// Estimate of u_0 from (u_t, t). Must return a tensor shaped like u_t.
using Denoiser = std::function<Tensor(const Tensor& u_t, std::size_t t)>;

/// Tags kept apart in the keyed noise so no two draws share a key.
enum class NoisePurpose : std::uint32_t { kForward = 1, kTransition = 2, kReversePrior = 3, kReverse = 4 };

std::uint32_t noise_step_key(NoisePurpose purpose, std::size_t t);

/// lambda_t = (1 - eta_t)/(1 - eta_{t-1}) * exp(Lambda (tau_t - tau_{t-1})),
/// one value per in-patch frequency (row-major p x p).
std::vector<double> transition_factors(const DiffusionSchedule& s, std::size_t t);

/// Residual e_t = u_l - D_t u_0.
Tensor residual(const Tensor& u0, const Tensor& ul, std::size_t t, const DiffusionSchedule& s);

/// Mean of q(u_t | u_0, u_l): (1 - eta_t) D_t u_0 + eta_t u_l.
Tensor marginal_mean(const Tensor& u0, const Tensor& ul, std::size_t t, const DiffusionSchedule& s);

/// Draw from q(u_t | u_0, u_l) = N(D_t u_0 + eta_t e_t, kappa^2 eta_t I).
SpectralState forward_marginal_sample(const SpectralState& u0, const SpectralState& ul, std::size_t t,
                                      const DiffusionSchedule& s, const KeyedNormal& noise);

/// One forward step q(u_t | u_{t-1}, u_l):
/// N(lambda_t (u_{t-1} - eta_{t-1} u_l) + eta_t u_l, kappa^2 alpha_t I).
SpectralState transition_sample(const SpectralState& prev, const SpectralState& ul, std::size_t t,
                                const DiffusionSchedule& s, const KeyedNormal& noise);

struct ScalarPosterior {
  double mu;
  double sigma2;
};

/// Closed-form Gaussian posterior for one coefficient.
///
///   mu     = [lam eta' u_t + alpha (1 - eta') decay' u0 + (lam^2 eta'^2 - lam eta' eta + alpha eta') u_l]
///            / (lam^2 eta' + alpha)
///   sigma2 = kappa^2 alpha eta' / (lam^2 eta' + alpha)
///
/// with eta' = eta_{t-1}, alpha = eta - eta', decay' = exp(Lambda tau_{t-1}).
/// The u_l coefficient carries +alpha eta'; this is what the product of the
/// two Gaussians gives. At eta' = 0 the result is exactly (u0, 0).
ScalarPosterior posterior_coefficient(double u_t, double u0_hat, double u_l, double eta_prev, double eta_t,
                                      double lambda, double decay_prev, double kappa);

/// Per-coefficient parameters of q(u_{t-1} | u_t, u0_hat, u_l).
PosteriorParams posterior_params(const SpectralState& ut, const Tensor& u0_hat, const SpectralState& ul,
                                 std::size_t t, const DiffusionSchedule& s);

/// u_{t-1} = mu + sqrt(sigma2) * noise, keyed on (t, coefficient).
SpectralState posterior_sample(const SpectralState& ut, const Tensor& u0_hat, const SpectralState& ul,
                               const DiffusionSchedule& s, const KeyedNormal& noise);

/// Draw u_T ~ N(u_l, kappa^2 I).
SpectralState reverse_init(const SpectralState& ul, const DiffusionSchedule& s, const KeyedNormal& noise);

/// Full reverse chain t = T .. 1, returning the state at t = 0.
SpectralState reverse_sample(const SpectralState& ul, const Denoiser& denoiser, const DiffusionSchedule& s,
                             const KeyedNormal& noise);

/// Denoiser that ignores its inputs and returns the true u_0.
Denoiser oracle_denoiser(Tensor u0_true);

}  // namespace seeclear
