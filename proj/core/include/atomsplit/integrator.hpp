// SPDX-License-Identifier: Apache-2.0
//
// Fixed-step integration of single positive-P trajectories.

#ifndef ATOMSPLIT_INTEGRATOR_HPP
#define ATOMSPLIT_INTEGRATOR_HPP

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "atomsplit/model.hpp"
#include "atomsplit/sampler.hpp"

namespace atomsplit {

enum class Scheme { euler_maruyama, semi_implicit_midpoint };

std::string to_string(Scheme scheme);
Scheme scheme_from_string(const std::string& name);

struct IntegratorConfig {
  double dt = 1e-3;
  Scheme scheme = Scheme::semi_implicit_midpoint;
  double sample_interval = 0.01;
  double t_final = 10.0;
  double divergence_cap = 1e6;

  /// Requires dt > 0, sample_interval an integer multiple of dt and t_final
  /// an integer multiple of sample_interval (relative tolerance 1e-9).
  void validate() const;

  std::int64_t steps_per_sample() const;
  /// Number of sample intervals; the record holds sample_count() + 1 points.
  std::int64_t sample_count() const;

  bool operator==(const IntegratorConfig&) const = default;
};

struct TrajectoryRecord {
  std::vector<PhasePoint> snapshots;
  bool diverged = false;
  std::optional<double> divergence_time;
};

/// Standard normal draws in the order (a1, a1+, a2, a2+, a3, a3+).
using NoiseDraws = std::array<double, 2 * kWells>;

/// One step of size cfg.dt from p.t.
///
/// Euler-Maruyama: p + a(p) dt + b(p) w sqrt(dt).
/// Semi-implicit midpoint: the midpoint m solves m = p + (a(m) dt + b(p) w sqrt(dt)) / 2
/// by three fixed-point sweeps starting from m = p; the result is
/// p + a(m) dt + b(p) w sqrt(dt).  Couplings in a(m) are taken at t + dt/2;
/// the noise is always evaluated at the start of the step (Ito).
///
/// Throws DivergenceError if any amplitude of the result exceeds
/// cfg.divergence_cap in modulus or is not finite.
PhasePoint step(const PhasePoint& p, const ModelParams& params, const IntegratorConfig& cfg,
                const NoiseDraws& noise);

/// Samples the initial point from the key's substream and integrates to
/// cfg.t_final, storing a snapshot every sample_interval.  Steps taken while
/// chi is zero consume no random numbers.  Divergence truncates the record.
TrajectoryRecord integrate_trajectory(SubstreamKey key, const ModelParams& params,
                                      const IntegratorConfig& cfg);

/// Integrates the same trajectory at cfg.dt and cfg.dt / 2 on one Brownian
/// path: each coarse increment is the sum of the two fine increments.
/// Returns {coarse, fine}.
std::pair<TrajectoryRecord, TrajectoryRecord> integrate_refinement_pair(
    SubstreamKey key, const ModelParams& params, const IntegratorConfig& cfg);

}  // namespace atomsplit

#endif  // ATOMSPLIT_INTEGRATOR_HPP
