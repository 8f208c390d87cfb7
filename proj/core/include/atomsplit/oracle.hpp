// SPDX-License-Identifier: Apache-2.0
//
// Exact Schroedinger evolution of the three-well Bose-Hubbard Hamiltonian in
// the fixed-total-number Fock basis.  Used as ground truth for the
// stochastic engine.

#ifndef ATOMSPLIT_ORACLE_HPP
#define ATOMSPLIT_ORACLE_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "atomsplit/estimator.hpp"
#include "atomsplit/model.hpp"

namespace atomsplit {

using Occupation = std::array<int, kWells>;

/// Basis states |n1, n2, n3> with n1 + n2 + n3 = N, ordered
/// lexicographically by (n1, n2): index = n1 (N + 1) - n1 (n1 - 1) / 2 + n2.
class FockBasis {
 public:
  explicit FockBasis(int n_total);

  int n_total() const noexcept { return n_total_; }
  std::size_t size() const noexcept { return states_.size(); }
  const Occupation& state(std::size_t index) const { return states_.at(index); }
  /// Index of |n1, n2, N - n1 - n2>; throws std::out_of_range if invalid.
  std::size_t index(int n1, int n2) const;
  std::size_t index(const Occupation& occ) const;

 private:
  int n_total_;
  std::vector<Occupation> states_;
};

using SparseHamiltonian = Eigen::SparseMatrix<cplx, Eigen::RowMajor>;

/// H / hbar = chi sum_j n_j (n_j - 1) - J (a1^+ a2 + a2^+ a1 + a3^+ a2 + a2^+ a3).
SparseHamiltonian build_hamiltonian(const FockBasis& basis, double j, double chi);

struct QuantumState {
  std::shared_ptr<const FockBasis> basis;
  Eigen::VectorXcd amplitudes;
  double t = 0.0;
};

/// Number state with `occupation` (its sum fixes the sector).
QuantumState fock_state(const Occupation& occupation);

/// exp(-i H h) v by Lanczos with full reorthogonalisation.  The subspace
/// grows until the a-posteriori error estimate drops below `tolerance`;
/// steps that do not converge within `max_dimension` are split in two.
class KrylovPropagator {
 public:
  explicit KrylovPropagator(double tolerance = 1e-13, int max_dimension = 40)
      : tol_(tolerance), max_dim_(max_dimension) {}

  Eigen::VectorXcd apply(const SparseHamiltonian& h, const Eigen::VectorXcd& v, double time) const;

 private:
  double tol_;
  int max_dim_;
};

/// States at t0, t0 + dt, ..., t_final.  Couplings are piecewise constant
/// and propagation segments end exactly on schedule cutoffs.  Throws
/// std::runtime_error if the norm drifts by more than 1e-10.
std::vector<QuantumState> evolve(const QuantumState& initial, const Schedule& j, const Schedule& chi,
                                 double dt, double t_final);

Moments exact_moments(const QuantumState& state);
Observables expectations(const QuantumState& state);

/// Incoherent mixture of fixed-number sectors.  Because every reported
/// observable conserves total number, a coherent state and its Poisson
/// mixture of number states give identical expectations.
struct SectorMixture {
  std::vector<double> weights;  // normalised over the kept sectors
  std::vector<QuantumState> sectors;
  double truncated_weight = 0.0;
};

/// Coherent state of mean n_mean in `well` (1-based), truncated to total
/// numbers 0..cutoff.  Throws std::invalid_argument unless
/// cutoff >= n_mean + 8 sqrt(n_mean).
SectorMixture coherent_initial(int well, double n_mean, int cutoff);

/// Smallest admissible cutoff for coherent_initial.
int default_coherent_cutoff(double n_mean);

Moments exact_moments(const SectorMixture& mixture);

/// Exact observables at the sample grid 0, s, ..., t_final for the initial
/// state described by `params`.  Standard errors are zero.
TimeSeriesResult oracle_time_series(const ModelParams& params, double sample_interval, double t_final);

}  // namespace atomsplit

#endif  // ATOMSPLIT_ORACLE_HPP
