// SPDX-License-Identifier: Apache-2.0
//
// Ensemble moments of positive-P trajectories and the derived observables:
// populations, number variances, the Hillery-Zubairy witness xi13 between the
// end wells, and the two directional steering witnesses.

#ifndef ATOMSPLIT_ESTIMATOR_HPP
#define ATOMSPLIT_ESTIMATOR_HPP

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "atomsplit/integrator.hpp"
#include "atomsplit/model.hpp"

namespace atomsplit {

/// Normally ordered moments.  For positive-P samples these are the
/// monomials below; ensemble means of them are operator expectations.
struct Moments {
  std::array<cplx, kWells> n{};   // a_j^+ a_j
  std::array<cplx, kWells> n2{};  // a_j^+2 a_j^2
  cplx c13{};                     // a_1^+ a_3
  cplx c31{};                     // a_1 a_3^+
  cplx q13{};                     // a_1^+ a_1 a_3^+ a_3

  static constexpr std::size_t kCount = 9;
  using Packed = std::array<cplx, kCount>;

  Packed pack() const noexcept;
  static Moments unpack(const Packed& v) noexcept;
};

Moments monomials(const PhaseVector& p) noexcept;

struct Observables {
  std::array<double, kWells> population{};
  std::array<double, kWells> variance{};
  double variance_diff13 = 0.0;  // V(N1 - N3)
  double xi13 = 0.0;
  double xi_steer1 = 0.0;
  double xi_steer3 = 0.0;
  double total_population = 0.0;
  double population_diff13 = 0.0;  // N1 - N3
};

/// Real parts of the observables built from (possibly complex) moments.
///   V(N_j)      = <n2_j> + <n_j> - <n_j>^2
///   V(N1 - N3)  = V(N1) + V(N3) - 2 (<q13> - <n_1><n_3>)
///   xi13        = <c13><c31> - <q13>
///   xi_steer_k  = xi13 - <n_k> / 2
Observables observables_from_moments(const Moments& m) noexcept;

struct Estimate {
  double value = 0.0;
  double se = 0.0;
};

struct TimePoint {
  double t = 0.0;
  std::array<Estimate, kWells> population{};
  std::array<Estimate, kWells> variance{};
  Estimate variance_diff13;
  Estimate xi13;
  Estimate xi_steer1;
  Estimate xi_steer3;
  Estimate total_population;
  Estimate population_diff13;
  /// Largest |Im| among the moments of Hermitian operators (n_j, n2_j, q13)
  /// and the product <c13><c31>.
  double imag_residual = 0.0;
  /// Largest |Im| / SE(Im) over the same set (0 where the SE vanishes and
  /// the imaginary part is zero).
  double imag_z_max = 0.0;
};

struct TimeSeriesResult {
  std::vector<TimePoint> points;
  std::uint64_t n_valid = 0;
  std::uint64_t n_excluded = 0;

  std::uint64_t n_total() const noexcept { return n_valid + n_excluded; }
};

/// Batch-partitioned running sums of the moment monomials at every sample
/// time.  Trajectory i goes to batch i mod B.
class MomentAccumulator {
 public:
  MomentAccumulator(std::vector<double> sample_times, std::size_t batches);

  /// Adds every snapshot of a non-divergent record; a divergent record only
  /// increments the exclusion counter.  Throws std::logic_error if the
  /// snapshot times differ from the accumulator's sample times.
  void accumulate(const TrajectoryRecord& rec, std::uint64_t trajectory_index);

  /// Fieldwise sum.  Throws std::logic_error on layout mismatch.
  void merge(const MomentAccumulator& other);

  const std::vector<double>& sample_times() const noexcept { return times_; }
  std::size_t batches() const noexcept { return batches_; }
  std::uint64_t count() const noexcept;
  std::uint64_t excluded() const noexcept { return excluded_; }
  std::uint64_t batch_count(std::size_t batch) const { return counts_.at(batch); }
  const Moments::Packed& sums(std::size_t time_index, std::size_t batch) const {
    return sums_.at(time_index * batches_ + batch);
  }

 private:
  std::vector<double> times_;
  std::size_t batches_;
  std::vector<std::uint64_t> counts_;
  std::vector<Moments::Packed> sums_;
  std::uint64_t excluded_ = 0;
};

/// Sample times 0, s, 2s, ..., t_final of an integrator configuration.
std::vector<double> sample_times(const IntegratorConfig& cfg);

/// Means from the grand sums; standard errors of every statistic from the
/// delete-one-batch jackknife.  Requires count >= B >= 8.
TimeSeriesResult finalize(const MomentAccumulator& acc);

/// (xi_steer_1, xi_steer_3) at every sample time, with jackknife errors.
std::vector<std::pair<Estimate, Estimate>> steering_witnesses(const MomentAccumulator& acc);

}  // namespace atomsplit

#endif  // ATOMSPLIT_ESTIMATOR_HPP
