#include "aerosar/particle_filter.hpp"

#include <cmath>
#include <limits>

#include "aerosar/errors.hpp"

namespace aerosar {

ParticleSet pf_init(const Eigen::Vector2d& z0, const PfConfig& cfg, std::uint64_t seed) {
  ParticleSet s;
  s.rng_seed = seed;
  s.rng = Rng(seed);
  s.particles.resize(cfg.n, 2);
  for (int i = 0; i < cfg.n; ++i) {
    s.particles(i, 0) = s.rng.normal(z0.x(), cfg.sigma_z);
    s.particles(i, 1) = s.rng.normal(z0.y(), cfg.sigma_z);
  }
  s.weights = Eigen::VectorXd::Constant(cfg.n, 1.0 / cfg.n);
  return s;
}

ParticleSet pf_propagate(const ParticleSet& s, double dt, const PfConfig& cfg) {
  ParticleSet out = s;
  for (int i = 0; i < out.size(); ++i) {
    out.particles(i, 0) += out.rng.uniform(-cfg.v_max, cfg.v_max) * dt;
    out.particles(i, 1) += out.rng.uniform(-cfg.v_max, cfg.v_max) * dt;
  }
  return out;
}

ParticleSet pf_measure(const ParticleSet& s, const Eigen::Vector2d& z, const PfConfig& cfg) {
  ParticleSet out = s;
  const int n = out.size();
  const double inv_var = 1.0 / (cfg.sigma_z * cfg.sigma_z);

  // Relative log-likelihoods; the Gaussian normalization constant cancels in
  // the beta-normalization below.
  Eigen::VectorXd log_lik(n);
  double max_log_lik = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < n; ++i) {
    const double dx = z.x() - out.particles(i, 0);
    const double dy = z.y() - out.particles(i, 1);
    log_lik[i] = -0.5 * (dx * dx + dy * dy) * inv_var;
    if (out.weights[i] > 0.0) max_log_lik = std::max(max_log_lik, log_lik[i]);
  }
  if (std::exp(max_log_lik) == 0.0) throw DegenerateWeights();

  for (int i = 0; i < n; ++i) {
    out.weights[i] = out.weights[i] * std::exp(log_lik[i] - max_log_lik);
  }
  const double beta = out.weights.sum();
  if (beta <= 0.0) throw DegenerateWeights();
  out.weights /= beta;
  return out;
}

ParticleSet pf_resample(const ParticleSet& s) {
  ParticleSet out = s;
  const int n = out.size();
  const double u0 = out.rng.uniform01() / n;

  Eigen::MatrixX2d resampled(n, 2);
  double cumulative = s.weights[0];
  int idx = 0;
  for (int i = 0; i < n; ++i) {
    const double pointer = u0 + static_cast<double>(i) / n;
    while (pointer > cumulative && idx < n - 1) {
      ++idx;
      cumulative += s.weights[idx];
    }
    resampled.row(i) = s.particles.row(idx);
  }
  out.particles = std::move(resampled);
  out.weights = Eigen::VectorXd::Constant(n, 1.0 / n);
  return out;
}

double effective_sample_size(const ParticleSet& s) {
  const double sum_sq = s.weights.squaredNorm();
  return sum_sq > 0.0 ? 1.0 / sum_sq : 0.0;
}

PfEstimate pf_estimate(const ParticleSet& s) {
  PfEstimate e;
  e.mean = s.particles.transpose() * s.weights;
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (int i = 0; i < s.size(); ++i) {
    const Eigen::Vector2d d = s.particles.row(i).transpose() - e.mean;
    cov += s.weights[i] * d * d.transpose();
  }
  e.covariance = cov;
  return e;
}

}  // namespace aerosar
