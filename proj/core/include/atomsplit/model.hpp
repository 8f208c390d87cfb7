// SPDX-License-Identifier: Apache-2.0
//
// Three-well Bose-Hubbard model: parameters, coupling schedules and the
// drift / noise terms of the positive-P Ito equations.

#ifndef ATOMSPLIT_MODEL_HPP
#define ATOMSPLIT_MODEL_HPP

#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace atomsplit {

using cplx = std::complex<double>;

inline constexpr int kWells = 3;

/// Piecewise-constant coupling: `base_value` until `cutoff_time`, zero from
/// then on.  Without a cutoff the value is constant.
class Schedule {
 public:
  Schedule() = default;
  explicit Schedule(double base_value, std::optional<double> cutoff_time = std::nullopt)
      : base_(base_value), cutoff_(cutoff_time) {}

  double value(double t) const noexcept {
    return (cutoff_ && t >= *cutoff_) ? 0.0 : base_;
  }
  double base_value() const noexcept { return base_; }
  std::optional<double> cutoff_time() const noexcept { return cutoff_; }

  /// True when the value is identically zero on [t, infinity).
  bool zero_from(double t) const noexcept { return base_ == 0.0 || (cutoff_ && t >= *cutoff_); }

  bool operator==(const Schedule&) const = default;

 private:
  double base_ = 0.0;
  std::optional<double> cutoff_;
};

enum class InitialStateKind { fock, coherent };

std::string to_string(InitialStateKind kind);
InitialStateKind initial_state_kind_from_string(const std::string& name);

struct ModelParams {
  Schedule tunnelling{1.0};    // J
  Schedule nonlinearity{0.0};  // chi
  std::int64_t n_atoms = 0;
  InitialStateKind initial_state = InitialStateKind::fock;
  int initial_well = 2;  // 1-based

  /// Throws std::invalid_argument on any violated invariant.
  void validate() const;

  bool operator==(const ModelParams&) const = default;
};

/// Amplitudes of the doubled phase space.  `alpha_plus` is an independent
/// variable, not the conjugate of `alpha`.
struct PhaseVector {
  std::array<cplx, kWells> alpha{};
  std::array<cplx, kWells> alpha_plus{};

  bool operator==(const PhaseVector&) const = default;
};

struct PhasePoint : PhaseVector {
  double t = 0.0;

  bool operator==(const PhasePoint&) const = default;
};

bool is_finite(const PhaseVector& p) noexcept;

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, double t) : std::runtime_error(what), time_(t) {}
  double time() const noexcept { return time_; }

 private:
  double time_;
};

/// Deterministic part of the Ito equations for fixed couplings J and chi.
/// No validity checks; this is the integrator's inner kernel.
inline PhaseVector drift_kernel(const PhaseVector& p, double j, double chi) noexcept {
  const cplx i{0.0, 1.0};
  const auto& a = p.alpha;
  const auto& ap = p.alpha_plus;
  const cplx neighbour[kWells] = {a[1], a[0] + a[2], a[1]};
  const cplx neighbour_plus[kWells] = {ap[1], ap[0] + ap[2], ap[1]};
  PhaseVector d;
  for (int w = 0; w < kWells; ++w) {
    d.alpha[w] = -2.0 * i * chi * ap[w] * a[w] * a[w] + i * j * neighbour[w];
    d.alpha_plus[w] = 2.0 * i * chi * ap[w] * ap[w] * a[w] - i * j * neighbour_plus[w];
  }
  return d;
}

/// Noise amplitudes b with b^2 equal to -2i chi alpha^2 (alpha rows) and
/// +2i chi alpha+^2 (alpha+ rows), using the factorisation (1 -+ i) sqrt(chi).
inline PhaseVector noise_kernel(const PhaseVector& p, double chi) noexcept {
  const double root = std::sqrt(chi);
  const cplx minus{root, -root};
  const cplx plus{root, root};
  PhaseVector b;
  for (int w = 0; w < kWells; ++w) {
    b.alpha[w] = minus * p.alpha[w];
    b.alpha_plus[w] = plus * p.alpha_plus[w];
  }
  return b;
}

/// Drift at time t with the schedules of `params`.  Throws DivergenceError on
/// non-finite input.
PhaseVector drift(const PhaseVector& p, const ModelParams& params, double t);

/// Noise amplitudes at time t.  Throws DivergenceError on non-finite input
/// and std::invalid_argument for negative chi.
PhaseVector noise_amplitudes(const PhaseVector& p, const ModelParams& params, double t);

/// Swap wells 1 and 3.
PhaseVector mirrored(const PhaseVector& p) noexcept;

}  // namespace atomsplit

#endif  // ATOMSPLIT_MODEL_HPP
