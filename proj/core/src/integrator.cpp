// SPDX-License-Identifier: Apache-2.0

#include "atomsplit/integrator.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace atomsplit {

std::string to_string(Scheme scheme) {
  return scheme == Scheme::euler_maruyama ? "euler_maruyama" : "semi_implicit_midpoint";
}

Scheme scheme_from_string(const std::string& name) {
  if (name == "euler_maruyama") return Scheme::euler_maruyama;
  if (name == "semi_implicit_midpoint") return Scheme::semi_implicit_midpoint;
  throw std::invalid_argument("unknown integration scheme '" + name + "'");
}

namespace {

constexpr int kMidpointSweeps = 3;

// Returns round(num / den) if num / den is within 1e-9 of an integer.
std::optional<std::int64_t> integer_ratio(double num, double den) {
  const double r = num / den;
  const double n = std::round(r);
  if (std::abs(r - n) > 1e-9 * std::max(1.0, std::abs(r))) return std::nullopt;
  return static_cast<std::int64_t>(n);
}

PhaseVector axpy(const PhaseVector& x, double a, const PhaseVector& y) {
  PhaseVector r;
  for (int w = 0; w < kWells; ++w) {
    r.alpha[w] = x.alpha[w] + a * y.alpha[w];
    r.alpha_plus[w] = x.alpha_plus[w] + a * y.alpha_plus[w];
  }
  return r;
}

PhaseVector add(const PhaseVector& x, const PhaseVector& y) { return axpy(x, 1.0, y); }

void check_cap(const PhaseVector& p, double cap, double t) {
  const double cap2 = cap * cap;
  for (int w = 0; w < kWells; ++w) {
    // Negated comparisons also catch NaN.
    if (!(std::norm(p.alpha[w]) <= cap2) || !(std::norm(p.alpha_plus[w]) <= cap2)) {
      std::ostringstream msg;
      msg << "trajectory diverged at t=" << t << " (well " << (w + 1) << ")";
      throw DivergenceError(msg.str(), t);
    }
  }
}

PhaseVector noise_increment(const PhaseVector& p, double chi, const NoiseDraws& noise, double sqrt_dt) {
  PhaseVector inc = noise_kernel(p, chi);
  for (int w = 0; w < kWells; ++w) {
    inc.alpha[w] *= noise[2 * w] * sqrt_dt;
    inc.alpha_plus[w] *= noise[2 * w + 1] * sqrt_dt;
  }
  return inc;
}

PhaseVector advance(const PhaseVector& p, double t, double dt, const ModelParams& params, Scheme scheme,
                    const NoiseDraws& noise) {
  const PhaseVector inc = noise_increment(p, params.nonlinearity.value(t), noise, std::sqrt(dt));
  if (scheme == Scheme::euler_maruyama) {
    const PhaseVector a = drift_kernel(p, params.tunnelling.value(t), params.nonlinearity.value(t));
    return add(axpy(p, dt, a), inc);
  }
  const double t_mid = t + 0.5 * dt;
  const double j = params.tunnelling.value(t_mid);
  const double chi = params.nonlinearity.value(t_mid);
  const PhaseVector half_kick = axpy(p, 0.5, inc);
  PhaseVector mid = p;
  for (int sweep = 0; sweep < kMidpointSweeps; ++sweep) {
    mid = axpy(half_kick, 0.5 * dt, drift_kernel(mid, j, chi));
  }
  return add(axpy(p, dt, drift_kernel(mid, j, chi)), inc);
}

void draw(NoiseDraws& out, Engine& rng, std::normal_distribution<double>& gauss) {
  for (double& x : out) x = gauss(rng);
}

}  // namespace

void IntegratorConfig::validate() const {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dt must be positive");
  if (!(sample_interval > 0.0) || !std::isfinite(sample_interval)) {
    throw std::invalid_argument("sample_interval must be positive");
  }
  if (!(t_final >= 0.0) || !std::isfinite(t_final)) {
    throw std::invalid_argument("t_final must be non-negative");
  }
  if (!(divergence_cap > 0.0)) throw std::invalid_argument("divergence_cap must be positive");
  const auto per_sample = integer_ratio(sample_interval, dt);
  if (!per_sample || *per_sample < 1) {
    throw std::invalid_argument("sample_interval must be an integer multiple of dt");
  }
  if (!integer_ratio(t_final, sample_interval)) {
    throw std::invalid_argument("t_final must be an integer multiple of sample_interval");
  }
}

std::int64_t IntegratorConfig::steps_per_sample() const {
  return integer_ratio(sample_interval, dt).value_or(0);
}

std::int64_t IntegratorConfig::sample_count() const {
  return integer_ratio(t_final, sample_interval).value_or(0);
}

PhasePoint step(const PhasePoint& p, const ModelParams& params, const IntegratorConfig& cfg,
                const NoiseDraws& noise) {
  if (!is_finite(p)) {
    throw DivergenceError("step from a non-finite phase point", p.t);
  }
  PhasePoint next;
  static_cast<PhaseVector&>(next) = advance(p, p.t, cfg.dt, params, cfg.scheme, noise);
  next.t = p.t + cfg.dt;
  check_cap(next, cfg.divergence_cap, next.t);
  return next;
}

TrajectoryRecord integrate_trajectory(SubstreamKey key, const ModelParams& params,
                                      const IntegratorConfig& cfg) {
  Engine rng = make_substream(key);
  std::normal_distribution<double> gauss;
  TrajectoryRecord rec;
  PhasePoint p = sample_initial(params, rng);

  const std::int64_t samples = cfg.sample_count();
  const std::int64_t per_sample = cfg.steps_per_sample();
  rec.snapshots.reserve(static_cast<std::size_t>(samples + 1));
  rec.snapshots.push_back(p);

  NoiseDraws noise{};
  std::int64_t n = 0;
  try {
    check_cap(p, cfg.divergence_cap, 0.0);
    for (std::int64_t s = 1; s <= samples; ++s) {
      for (std::int64_t k = 0; k < per_sample; ++k, ++n) {
        const double t = static_cast<double>(n) * cfg.dt;
        if (params.nonlinearity.zero_from(t)) {
          noise.fill(0.0);
        } else {
          draw(noise, rng, gauss);
        }
        static_cast<PhaseVector&>(p) = advance(p, t, cfg.dt, params, cfg.scheme, noise);
        check_cap(p, cfg.divergence_cap, t + cfg.dt);
      }
      p.t = static_cast<double>(s) * cfg.sample_interval;
      rec.snapshots.push_back(p);
    }
  } catch (const DivergenceError& e) {
    rec.diverged = true;
    rec.divergence_time = e.time();
  }
  return rec;
}

std::pair<TrajectoryRecord, TrajectoryRecord> integrate_refinement_pair(
    SubstreamKey key, const ModelParams& params, const IntegratorConfig& cfg) {
  Engine rng = make_substream(key);
  std::normal_distribution<double> gauss;
  const PhasePoint start = sample_initial(params, rng);

  TrajectoryRecord coarse_rec;
  TrajectoryRecord fine_rec;
  coarse_rec.snapshots.push_back(start);
  fine_rec.snapshots.push_back(start);
  PhasePoint coarse = start;
  PhasePoint fine = start;

  const double h = 0.5 * cfg.dt;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  NoiseDraws first{};
  NoiseDraws second{};
  NoiseDraws joined{};
  std::int64_t n = 0;
  for (std::int64_t s = 1; s <= cfg.sample_count(); ++s) {
    for (std::int64_t k = 0; k < cfg.steps_per_sample(); ++k, ++n) {
      const double t = static_cast<double>(n) * cfg.dt;
      if (params.nonlinearity.zero_from(t)) {
        first.fill(0.0);
        second.fill(0.0);
      } else {
        draw(first, rng, gauss);
        draw(second, rng, gauss);
      }
      for (std::size_t i = 0; i < joined.size(); ++i) joined[i] = (first[i] + second[i]) * inv_sqrt2;

      if (!coarse_rec.diverged) {
        try {
          static_cast<PhaseVector&>(coarse) = advance(coarse, t, cfg.dt, params, cfg.scheme, joined);
          check_cap(coarse, cfg.divergence_cap, t + cfg.dt);
        } catch (const DivergenceError& e) {
          coarse_rec.diverged = true;
          coarse_rec.divergence_time = e.time();
        }
      }
      if (!fine_rec.diverged) {
        try {
          static_cast<PhaseVector&>(fine) = advance(fine, t, h, params, cfg.scheme, first);
          check_cap(fine, cfg.divergence_cap, t + h);
          static_cast<PhaseVector&>(fine) = advance(fine, t + h, h, params, cfg.scheme, second);
          check_cap(fine, cfg.divergence_cap, t + cfg.dt);
        } catch (const DivergenceError& e) {
          fine_rec.diverged = true;
          fine_rec.divergence_time = e.time();
        }
      }
    }
    const double ts = static_cast<double>(s) * cfg.sample_interval;
    if (!coarse_rec.diverged) {
      coarse.t = ts;
      coarse_rec.snapshots.push_back(coarse);
    }
    if (!fine_rec.diverged) {
      fine.t = ts;
      fine_rec.snapshots.push_back(fine);
    }
    if (coarse_rec.diverged && fine_rec.diverged) break;
  }
  return {std::move(coarse_rec), std::move(fine_rec)};
}

}  // namespace atomsplit
