// SPDX-License-Identifier: Apache-2.0

#include "atomsplit/estimator.hpp"

#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace atomsplit {

Moments::Packed Moments::pack() const noexcept {
  return {n[0], n[1], n[2], n2[0], n2[1], n2[2], c13, c31, q13};
}

Moments Moments::unpack(const Packed& v) noexcept {
  Moments m;
  m.n = {v[0], v[1], v[2]};
  m.n2 = {v[3], v[4], v[5]};
  m.c13 = v[6];
  m.c31 = v[7];
  m.q13 = v[8];
  return m;
}

Moments monomials(const PhaseVector& p) noexcept {
  Moments m;
  for (int w = 0; w < kWells; ++w) {
    m.n[w] = p.alpha_plus[w] * p.alpha[w];
    m.n2[w] = m.n[w] * m.n[w];
  }
  m.c13 = p.alpha_plus[0] * p.alpha[2];
  m.c31 = p.alpha[0] * p.alpha_plus[2];
  m.q13 = m.n[0] * m.n[2];
  return m;
}

Observables observables_from_moments(const Moments& m) noexcept {
  Observables o;
  cplx var[kWells];
  for (int w = 0; w < kWells; ++w) {
    var[w] = m.n2[w] + m.n[w] - m.n[w] * m.n[w];
    o.population[w] = m.n[w].real();
    o.variance[w] = var[w].real();
  }
  const cplx covariance13 = m.q13 - m.n[0] * m.n[2];
  const cplx xi = m.c13 * m.c31 - m.q13;
  o.variance_diff13 = (var[0] + var[2] - 2.0 * covariance13).real();
  o.xi13 = xi.real();
  o.xi_steer1 = (xi - 0.5 * m.n[0]).real();
  o.xi_steer3 = (xi - 0.5 * m.n[2]).real();
  o.total_population = (m.n[0] + m.n[1] + m.n[2]).real();
  o.population_diff13 = (m.n[0] - m.n[2]).real();
  return o;
}

namespace {

// Statistics carried through the jackknife: 12 observables followed by the
// imaginary parts checked for reality.
constexpr std::size_t kObservableStats = 12;
constexpr std::size_t kImagStats = 8;
constexpr std::size_t kStats = kObservableStats + kImagStats;
using StatVector = std::array<double, kStats>;

StatVector statistics(const Moments& m) {
  const Observables o = observables_from_moments(m);
  return {o.population[0], o.population[1], o.population[2],
          o.variance[0],   o.variance[1],   o.variance[2],
          o.variance_diff13, o.xi13,      o.xi_steer1,
          o.xi_steer3,     o.total_population, o.population_diff13,
          m.n[0].imag(),   m.n[1].imag(),   m.n[2].imag(),
          m.n2[0].imag(),  m.n2[1].imag(),  m.n2[2].imag(),
          m.q13.imag(),    (m.c13 * m.c31).imag()};
}

Moments mean_of(const Moments::Packed& sum, double count) {
  Moments::Packed mean;
  for (std::size_t k = 0; k < mean.size(); ++k) mean[k] = sum[k] / count;
  return Moments::unpack(mean);
}

void require_finalizable(const MomentAccumulator& acc) {
  if (acc.count() == 0) throw std::runtime_error("no valid trajectories to finalize");
  if (acc.batches() < 8) throw std::invalid_argument("jackknife needs at least 8 batches");
  if (acc.count() < acc.batches()) {
    throw std::invalid_argument("fewer valid trajectories than jackknife batches");
  }
}

}  // namespace

MomentAccumulator::MomentAccumulator(std::vector<double> sample_times, std::size_t batches)
    : times_(std::move(sample_times)),
      batches_(batches),
      counts_(batches, 0),
      sums_(times_.size() * batches, Moments::Packed{}) {
  if (batches_ == 0) throw std::invalid_argument("batch count must be positive");
}

std::uint64_t MomentAccumulator::count() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::uint64_t{0});
}

void MomentAccumulator::accumulate(const TrajectoryRecord& rec, std::uint64_t trajectory_index) {
  if (rec.diverged) {
    ++excluded_;
    return;
  }
  if (rec.snapshots.size() != times_.size()) {
    throw std::logic_error("trajectory snapshot count does not match the accumulator's sample times");
  }
  const std::size_t batch = trajectory_index % batches_;
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (rec.snapshots[i].t != times_[i]) {
      throw std::logic_error("trajectory snapshot time does not match the accumulator's sample time");
    }
    const Moments::Packed m = monomials(rec.snapshots[i]).pack();
    Moments::Packed& s = sums_[i * batches_ + batch];
    for (std::size_t k = 0; k < s.size(); ++k) s[k] += m[k];
  }
  ++counts_[batch];
}

void MomentAccumulator::merge(const MomentAccumulator& other) {
  if (other.batches_ != batches_ || other.times_ != times_) {
    throw std::logic_error("cannot merge accumulators with different layouts");
  }
  for (std::size_t b = 0; b < batches_; ++b) counts_[b] += other.counts_[b];
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    for (std::size_t k = 0; k < Moments::kCount; ++k) sums_[i][k] += other.sums_[i][k];
  }
  excluded_ += other.excluded_;
}

std::vector<double> sample_times(const IntegratorConfig& cfg) {
  std::vector<double> t(static_cast<std::size_t>(cfg.sample_count() + 1));
  for (std::size_t s = 0; s < t.size(); ++s) t[s] = static_cast<double>(s) * cfg.sample_interval;
  return t;
}

TimeSeriesResult finalize(const MomentAccumulator& acc) {
  require_finalizable(acc);
  const std::size_t nb = acc.batches();

  std::vector<std::size_t> active;
  for (std::size_t b = 0; b < nb; ++b) {
    if (acc.batch_count(b) > 0) active.push_back(b);
  }
  const double total_count = static_cast<double>(acc.count());
  const double n_rep = static_cast<double>(active.size());

  TimeSeriesResult result;
  result.n_valid = acc.count();
  result.n_excluded = acc.excluded();
  result.points.reserve(acc.sample_times().size());

  std::vector<StatVector> replicas(active.size());
  for (std::size_t i = 0; i < acc.sample_times().size(); ++i) {
    Moments::Packed grand{};
    for (std::size_t b = 0; b < nb; ++b) {
      const auto& s = acc.sums(i, b);
      for (std::size_t k = 0; k < grand.size(); ++k) grand[k] += s[k];
    }
    const StatVector full = statistics(mean_of(grand, total_count));

    StatVector rep_mean{};
    for (std::size_t r = 0; r < active.size(); ++r) {
      const std::size_t b = active[r];
      Moments::Packed rest = grand;
      const auto& s = acc.sums(i, b);
      for (std::size_t k = 0; k < rest.size(); ++k) rest[k] -= s[k];
      replicas[r] = statistics(mean_of(rest, total_count - static_cast<double>(acc.batch_count(b))));
      for (std::size_t k = 0; k < kStats; ++k) rep_mean[k] += replicas[r][k] / n_rep;
    }
    StatVector se{};
    if (active.size() > 1) {
      for (std::size_t k = 0; k < kStats; ++k) {
        double ss = 0.0;
        for (const auto& rep : replicas) ss += (rep[k] - rep_mean[k]) * (rep[k] - rep_mean[k]);
        se[k] = std::sqrt((n_rep - 1.0) / n_rep * ss);
      }
    }

    TimePoint pt;
    pt.t = acc.sample_times()[i];
    auto est = [&](std::size_t k) { return Estimate{full[k], se[k]}; };
    for (int w = 0; w < kWells; ++w) {
      pt.population[w] = est(w);
      pt.variance[w] = est(3 + w);
    }
    pt.variance_diff13 = est(6);
    pt.xi13 = est(7);
    pt.xi_steer1 = est(8);
    pt.xi_steer3 = est(9);
    pt.total_population = est(10);
    pt.population_diff13 = est(11);
    for (std::size_t k = kObservableStats; k < kStats; ++k) {
      const double im = std::abs(full[k]);
      pt.imag_residual = std::max(pt.imag_residual, im);
      if (se[k] > 0.0) {
        pt.imag_z_max = std::max(pt.imag_z_max, im / se[k]);
      } else if (im > 0.0) {
        pt.imag_z_max = std::numeric_limits<double>::infinity();
      }
    }
    result.points.push_back(pt);
  }
  return result;
}

std::vector<std::pair<Estimate, Estimate>> steering_witnesses(const MomentAccumulator& acc) {
  const TimeSeriesResult r = finalize(acc);
  std::vector<std::pair<Estimate, Estimate>> out;
  out.reserve(r.points.size());
  for (const auto& p : r.points) out.emplace_back(p.xi_steer1, p.xi_steer3);
  return out;
}

}  // namespace atomsplit
