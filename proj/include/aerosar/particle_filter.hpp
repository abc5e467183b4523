#pragma once

#include <Eigen/Core>
#include <cstdint>

#include "aerosar/rng.hpp"

namespace aerosar {

struct PfConfig {
  double sigma_z = 3.0;  // measurement noise std, meters
  double v_max = 1.2;    // maximum human velocity, m/s
  int n = 100;
  /// By default every measurement is followed by a resampling pass; with
  /// this set, resampling only happens when the effective sample size drops
  /// below ess_fraction * N.
  bool resample_by_ess = false;
  double ess_fraction = 0.5;
};

/// N weighted planar particles in UTM coordinates. Value type: copying the
/// set copies its RNG state, so branches evolve identically.
struct ParticleSet {
  Eigen::MatrixX2d particles;  // N x (east, north), meters
  Eigen::VectorXd weights;     // sums to 1 after a measurement update
  std::uint64_t rng_seed = 0;  // seed the set was initialized with
  Rng rng{0};                  // live stream, advances in propagate/resample

  int size() const { return static_cast<int>(particles.rows()); }
};

/// Draw N particles i.i.d. from an axis-independent Gaussian around the
/// first triangulated position; weights start uniform.
ParticleSet pf_init(const Eigen::Vector2d& z0, const PfConfig& cfg, std::uint64_t seed);

/// Random-walk prior: each particle moves by an independent uniform velocity
/// in [-v_max, v_max] per axis times dt. Weights are unchanged.
ParticleSet pf_propagate(const ParticleSet& s, double dt, const PfConfig& cfg);

/// Gaussian measurement update with R = sigma_z^2 * I, computed in log-space
/// and renormalized to sum 1. Throws DegenerateWeights when every likelihood
/// underflows to zero (filter divergence; the caller may re-init).
ParticleSet pf_measure(const ParticleSet& s, const Eigen::Vector2d& z, const PfConfig& cfg);

/// Systematic resampling: one uniform offset in [0, 1/N), N equally spaced
/// pointers over the cumulative weights. Output weights are uniform.
ParticleSet pf_resample(const ParticleSet& s);

/// 1 / sum(w_i^2); equals N for uniform weights.
double effective_sample_size(const ParticleSet& s);

struct PfEstimate {
  Eigen::Vector2d mean;
  Eigen::Matrix2d covariance;
};

/// Weighted mean and weighted sample covariance.
PfEstimate pf_estimate(const ParticleSet& s);

}  // namespace aerosar
