#include "seeclear/diffusion.hpp"

#include <cmath>
#include <stdexcept>

#include "seeclear/spectral.hpp"

namespace seeclear {

namespace {

void require_step(std::size_t t, const DiffusionSchedule& s) {
  if (t < 1 || t > s.steps) {
    throw std::out_of_range("step " + std::to_string(t) + " outside 1.." + std::to_string(s.steps));
  }
}

// Index of the in-patch frequency for flat element i of a tensor whose last
// two axes are (h, w).
struct PatchIndexer {
  std::size_t h, w, p;

  explicit PatchIndexer(const Tensor& like, std::size_t patch) : p(patch) {
    if (like.rank() < 2) throw DimensionError("spectral state needs two spatial axes");
    h = like.dim(like.rank() - 2);
    w = like.dim(like.rank() - 1);
    if (h % p || w % p) {
      throw DimensionError("spectral state " + shape_to_string(like.shape()) + " is not tiled by patch " +
                           std::to_string(p));
    }
  }
  std::size_t operator()(std::size_t i) const { return ((i / w) % h % p) * p + (i % w) % p; }
};

}  // namespace

std::uint32_t noise_step_key(NoisePurpose purpose, std::size_t t) {
  return (static_cast<std::uint32_t>(purpose) << 24) | static_cast<std::uint32_t>(t & 0xFFFFFF);
}

std::vector<double> transition_factors(const DiffusionSchedule& s, std::size_t t) {
  require_step(t, s);
  const double ratio = (1.0 - s.eta[t]) / (1.0 - s.eta[t - 1]);
  auto f = blur_factors(s.patch, s.tau[t] - s.tau[t - 1]);
  for (auto& v : f) v *= ratio;
  return f;
}

Tensor residual(const Tensor& u0, const Tensor& ul, std::size_t t, const DiffusionSchedule& s) {
  return sub(ul, blur_coefficients(u0, s.patch, s.tau.at(t)));
}

Tensor marginal_mean(const Tensor& u0, const Tensor& ul, std::size_t t, const DiffusionSchedule& s) {
  if (u0.shape() != ul.shape()) throw DimensionError("u0 and u_l shapes differ");
  if (t > s.steps) throw std::out_of_range("step beyond schedule");
  const Tensor blurred = blur_coefficients(u0, s.patch, s.tau[t]);
  const double eta = s.eta[t];
  Tensor out(u0.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = (1.0 - eta) * blurred[i] + eta * ul[i];
  return out;
}

SpectralState forward_marginal_sample(const SpectralState& u0, const SpectralState& ul, std::size_t t,
                                      const DiffusionSchedule& s, const KeyedNormal& noise) {
  require_step(t, s);
  Tensor u = marginal_mean(u0.u, ul.u, t, s);
  const double sd = s.kappa * std::sqrt(s.eta[t]);
  if (sd > 0.0) {
    const auto key = noise_step_key(NoisePurpose::kForward, t);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += sd * noise(key, i);
  }
  return {std::move(u), t};
}

SpectralState transition_sample(const SpectralState& prev, const SpectralState& ul, std::size_t t,
                                const DiffusionSchedule& s, const KeyedNormal& noise) {
  require_step(t, s);
  if (prev.t + 1 != t) {
    throw std::invalid_argument("transition to step " + std::to_string(t) + " from state at step " +
                                std::to_string(prev.t));
  }
  if (prev.u.shape() != ul.u.shape()) throw DimensionError("u_{t-1} and u_l shapes differ");
  const auto lambda = transition_factors(s, t);
  const PatchIndexer idx(prev.u, s.patch);
  const double eta_prev = s.eta[t - 1], eta = s.eta[t];
  const double sd = s.kappa * std::sqrt(s.alpha[t]);
  const auto key = noise_step_key(NoisePurpose::kTransition, t);
  Tensor u(prev.u.shape());
  for (std::size_t i = 0; i < u.size(); ++i) {
    u[i] = lambda[idx(i)] * (prev.u[i] - eta_prev * ul.u[i]) + eta * ul.u[i];
    if (sd > 0.0) u[i] += sd * noise(key, i);
  }
  return {std::move(u), t};
}

ScalarPosterior posterior_coefficient(double u_t, double u0_hat, double u_l, double eta_prev, double eta_t,
                                      double lambda, double decay_prev, double kappa) {
  if (eta_prev == 0.0) return {u0_hat, 0.0};
  const double alpha = eta_t - eta_prev;
  const double denom = lambda * lambda * eta_prev + alpha;
  const double mu = (lambda * eta_prev * u_t + alpha * (1.0 - eta_prev) * decay_prev * u0_hat +
                     (lambda * lambda * eta_prev * eta_prev - lambda * eta_prev * eta_t + alpha * eta_prev) * u_l) /
                    denom;
  return {mu, kappa * kappa * alpha * eta_prev / denom};
}

PosteriorParams posterior_params(const SpectralState& ut, const Tensor& u0_hat, const SpectralState& ul,
                                 std::size_t t, const DiffusionSchedule& s) {
  require_step(t, s);
  if (ut.u.shape() != u0_hat.shape() || ut.u.shape() != ul.u.shape()) {
    throw DimensionError("posterior inputs disagree in shape: u_t " + shape_to_string(ut.u.shape()) + ", u0_hat " +
                         shape_to_string(u0_hat.shape()) + ", u_l " + shape_to_string(ul.u.shape()));
  }
  const auto lambda = transition_factors(s, t);
  const auto decay_prev = blur_factors(s.patch, s.tau[t - 1]);
  const PatchIndexer idx(ut.u, s.patch);
  PosteriorParams out{Tensor(ut.u.shape()), Tensor(ut.u.shape())};
  for (std::size_t i = 0; i < ut.u.size(); ++i) {
    const std::size_t f = idx(i);
    const auto p = posterior_coefficient(ut.u[i], u0_hat[i], ul.u[i], s.eta[t - 1], s.eta[t], lambda[f],
                                         decay_prev[f], s.kappa);
    out.mu[i] = p.mu;
    out.sigma2[i] = p.sigma2;
  }
  return out;
}

SpectralState posterior_sample(const SpectralState& ut, const Tensor& u0_hat, const SpectralState& ul,
                               const DiffusionSchedule& s, const KeyedNormal& noise) {
  const std::size_t t = ut.t;
  PosteriorParams post = posterior_params(ut, u0_hat, ul, t, s);
  const auto key = noise_step_key(NoisePurpose::kReverse, t);
  for (std::size_t i = 0; i < post.mu.size(); ++i) {
    if (post.sigma2[i] > 0.0) post.mu[i] += std::sqrt(post.sigma2[i]) * noise(key, i);
  }
  return {std::move(post.mu), t - 1};
}

SpectralState reverse_init(const SpectralState& ul, const DiffusionSchedule& s, const KeyedNormal& noise) {
  Tensor u = ul.u;
  if (s.kappa > 0.0) {
    const auto key = noise_step_key(NoisePurpose::kReversePrior, s.steps);
    for (std::size_t i = 0; i < u.size(); ++i) u[i] += s.kappa * noise(key, i);
  }
  return {std::move(u), s.steps};
}

SpectralState reverse_sample(const SpectralState& ul, const Denoiser& denoiser, const DiffusionSchedule& s,
                             const KeyedNormal& noise) {
  SpectralState state = reverse_init(ul, s, noise);
  while (state.t > 0) {
    const Tensor u0_hat = denoiser(state.u, state.t);
    if (u0_hat.shape() != state.u.shape()) {
      throw DimensionError("denoiser returned " + shape_to_string(u0_hat.shape()) + " for state " +
                           shape_to_string(state.u.shape()));
    }
    state = posterior_sample(state, u0_hat, ul, s, noise);
  }
  return state;
}

Denoiser oracle_denoiser(Tensor u0_true) {
  return [u0 = std::move(u0_true)](const Tensor&, std::size_t) { return u0; };
}

}  // namespace seeclear
