// SPDX-License-Identifier: Apache-2.0

#include "atomsplit/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>

#include <Eigen/Eigenvalues>

namespace atomsplit {

FockBasis::FockBasis(int n_total) : n_total_(n_total) {
  if (n_total < 0) throw std::invalid_argument("total atom number must be non-negative");
  states_.reserve(static_cast<std::size_t>(n_total + 1) * (n_total + 2) / 2);
  for (int n1 = 0; n1 <= n_total; ++n1) {
    for (int n2 = 0; n1 + n2 <= n_total; ++n2) states_.push_back({n1, n2, n_total - n1 - n2});
  }
}

std::size_t FockBasis::index(int n1, int n2) const {
  if (n1 < 0 || n2 < 0 || n1 + n2 > n_total_) throw std::out_of_range("occupation outside the basis");
  const std::int64_t a = n1;
  return static_cast<std::size_t>(a * (n_total_ + 1) - a * (a - 1) / 2 + n2);
}

std::size_t FockBasis::index(const Occupation& occ) const {
  if (occ[0] + occ[1] + occ[2] != n_total_ || occ[2] < 0) {
    throw std::out_of_range("occupation outside the basis");
  }
  return index(occ[0], occ[1]);
}

SparseHamiltonian build_hamiltonian(const FockBasis& basis, double j, double chi) {
  std::vector<Eigen::Triplet<cplx>> triplets;
  triplets.reserve(basis.size() * 5);
  // Neighbour pairs (1,2) and (2,3), zero-based.
  constexpr std::array<std::pair<int, int>, 2> bonds{{{0, 1}, {1, 2}}};
  for (std::size_t col = 0; col < basis.size(); ++col) {
    const Occupation& occ = basis.state(col);
    double diag = 0.0;
    for (int n : occ) diag += chi * n * (n - 1);
    if (diag != 0.0) triplets.emplace_back(col, col, diag);
    if (j == 0.0) continue;
    for (auto [a, b] : bonds) {
      // a_a^+ a_b and its conjugate a_b^+ a_a.
      for (auto [to, from] : {std::pair{a, b}, std::pair{b, a}}) {
        if (occ[from] == 0) continue;
        Occupation next = occ;
        next[from] -= 1;
        next[to] += 1;
        const double amp = std::sqrt(static_cast<double>(occ[from]) * (occ[to] + 1));
        triplets.emplace_back(basis.index(next), col, -j * amp);
      }
    }
  }
  SparseHamiltonian h(basis.size(), basis.size());
  h.setFromTriplets(triplets.begin(), triplets.end());
  return h;
}

QuantumState fock_state(const Occupation& occupation) {
  for (int n : occupation) {
    if (n < 0) throw std::invalid_argument("occupations must be non-negative");
  }
  auto basis = std::make_shared<const FockBasis>(occupation[0] + occupation[1] + occupation[2]);
  QuantumState s;
  s.amplitudes = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(basis->size()));
  s.amplitudes[static_cast<Eigen::Index>(basis->index(occupation))] = 1.0;
  s.basis = std::move(basis);
  return s;
}

Eigen::VectorXcd KrylovPropagator::apply(const SparseHamiltonian& h, const Eigen::VectorXcd& v,
                                         double time) const {
  const Eigen::Index dim = v.size();
  const double beta0 = v.norm();
  if (beta0 == 0.0 || time == 0.0) return v;

  const int m_cap = static_cast<int>(std::min<Eigen::Index>(max_dim_, dim));
  Eigen::MatrixXcd basis(dim, m_cap + 1);
  std::vector<double> diag;
  std::vector<double> off;  // off[k] couples vectors k and k+1
  basis.col(0) = v / beta0;
  double previous_err = std::numeric_limits<double>::infinity();

  for (int k = 0; k < m_cap; ++k) {
    Eigen::VectorXcd w = h * basis.col(k);
    diag.push_back(basis.col(k).dot(w).real());
    // Full reorthogonalisation, applied twice.
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i <= k; ++i) w -= basis.col(i).dot(w) * basis.col(i);
    }
    const double beta = w.norm();
    const int m = k + 1;

    Eigen::MatrixXd t = Eigen::MatrixXd::Zero(m, m);
    for (int i = 0; i < m; ++i) t(i, i) = diag[i];
    for (int i = 0; i + 1 < m; ++i) t(i, i + 1) = t(i + 1, i) = off[i];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(t);
    const Eigen::VectorXd& lambda = eig.eigenvalues();
    const Eigen::MatrixXd& vecs = eig.eigenvectors();
    Eigen::VectorXcd coeff(m);
    for (int i = 0; i < m; ++i) {
      coeff[i] = std::polar(vecs(0, i), -lambda[i] * time);
    }
    Eigen::VectorXcd small = vecs.cast<cplx>() * coeff;

    const bool invariant = beta <= 1e-14 * std::max(1.0, std::abs(diag[k]));
    // The estimate can vanish by accident for one dimension; demand two in a row.
    const double err = beta * beta0 * std::abs(small[m - 1]);
    const bool converged = err < tol_ && previous_err < tol_;
    previous_err = err;
    if (invariant || m == dim || converged) {
      return beta0 * (basis.leftCols(m) * small);
    }
    if (m == m_cap) break;
    off.push_back(beta);
    basis.col(k + 1) = w / beta;
  }
  // Not converged: halve the step.
  const Eigen::VectorXcd half = apply(h, v, 0.5 * time);
  return apply(h, half, 0.5 * time);
}

namespace {

struct CouplingKey {
  double j;
  double chi;
  auto operator<=>(const CouplingKey&) const = default;
};

}  // namespace

std::vector<QuantumState> evolve(const QuantumState& initial, const Schedule& j, const Schedule& chi,
                                 double dt, double t_final) {
  if (!initial.basis) throw std::invalid_argument("state has no basis");
  if (!(dt > 0.0)) throw std::invalid_argument("dt must be positive");
  if (std::abs(initial.amplitudes.norm() - 1.0) > 1e-10) {
    throw std::invalid_argument("initial state is not normalised");
  }
  const auto steps = static_cast<std::int64_t>(std::llround((t_final - initial.t) / dt));
  if (steps < 0) throw std::invalid_argument("t_final precedes the initial time");

  std::vector<double> cuts;
  for (const Schedule* s : {&j, &chi}) {
    if (s->cutoff_time()) cuts.push_back(*s->cutoff_time());
  }
  std::sort(cuts.begin(), cuts.end());

  std::map<CouplingKey, SparseHamiltonian> hamiltonians;
  auto hamiltonian_at = [&](double t) -> const SparseHamiltonian& {
    const CouplingKey key{j.value(t), chi.value(t)};
    auto it = hamiltonians.find(key);
    if (it == hamiltonians.end()) {
      it = hamiltonians.emplace(key, build_hamiltonian(*initial.basis, key.j, key.chi)).first;
    }
    return it->second;
  };

  const KrylovPropagator krylov;
  std::vector<QuantumState> out;
  out.reserve(static_cast<std::size_t>(steps + 1));
  out.push_back(initial);
  Eigen::VectorXcd psi = initial.amplitudes;
  for (std::int64_t k = 0; k < steps; ++k) {
    const double t0 = initial.t + static_cast<double>(k) * dt;
    const double t1 = initial.t + static_cast<double>(k + 1) * dt;
    double t = t0;
    for (double c : cuts) {
      if (c > t && c < t1) {
        psi = krylov.apply(hamiltonian_at(t), psi, c - t);
        t = c;
      }
    }
    psi = krylov.apply(hamiltonian_at(t), psi, t1 - t);
    if (std::abs(psi.norm() - 1.0) > 1e-10) {
      throw std::runtime_error("norm drift exceeded 1e-10; reduce the propagation step");
    }
    out.push_back(QuantumState{initial.basis, psi, t1});
  }
  return out;
}

Moments exact_moments(const QuantumState& state) {
  const FockBasis& basis = *state.basis;
  const Eigen::VectorXcd& psi = state.amplitudes;
  Moments m;
  for (std::size_t i = 0; i < basis.size(); ++i) {
    const Occupation& occ = basis.state(i);
    const cplx amp = psi[static_cast<Eigen::Index>(i)];
    const double p = std::norm(amp);
    for (int w = 0; w < kWells; ++w) {
      m.n[w] += p * occ[w];
      m.n2[w] += p * occ[w] * (occ[w] - 1);
    }
    m.q13 += p * occ[0] * occ[2];
    // a1^+ a3 |n1, n2, n3> = sqrt((n1 + 1) n3) |n1 + 1, n2, n3 - 1>
    if (occ[2] > 0) {
      const auto to = basis.index(occ[0] + 1, occ[1]);
      m.c13 += std::conj(psi[static_cast<Eigen::Index>(to)]) * amp *
               std::sqrt(static_cast<double>(occ[0] + 1) * occ[2]);
    }
    // a1 a3^+ |n1, n2, n3> = sqrt(n1 (n3 + 1)) |n1 - 1, n2, n3 + 1>
    if (occ[0] > 0) {
      const auto to = basis.index(occ[0] - 1, occ[1]);
      m.c31 += std::conj(psi[static_cast<Eigen::Index>(to)]) * amp *
               std::sqrt(static_cast<double>(occ[0]) * (occ[2] + 1));
    }
  }
  return m;
}

Observables expectations(const QuantumState& state) { return observables_from_moments(exact_moments(state)); }

int default_coherent_cutoff(double n_mean) {
  return static_cast<int>(std::ceil(n_mean + 8.0 * std::sqrt(n_mean)));
}

SectorMixture coherent_initial(int well, double n_mean, int cutoff) {
  if (well < 1 || well > kWells) throw std::invalid_argument("well must be 1, 2 or 3");
  if (!(n_mean >= 0.0)) throw std::invalid_argument("mean number must be non-negative");
  if (static_cast<double>(cutoff) < n_mean + 8.0 * std::sqrt(n_mean)) {
    throw std::invalid_argument("cutoff too small: need cutoff >= n_mean + 8 sqrt(n_mean)");
  }
  SectorMixture mix;
  double kept = 0.0;
  for (int n = 0; n <= cutoff; ++n) {
    const double w = n_mean == 0.0 ? (n == 0 ? 1.0 : 0.0)
                                   : std::exp(n * std::log(n_mean) - n_mean - std::lgamma(n + 1.0));
    if (w == 0.0) continue;
    Occupation occ{0, 0, 0};
    occ[well - 1] = n;
    mix.weights.push_back(w);
    mix.sectors.push_back(fock_state(occ));
    kept += w;
  }
  mix.truncated_weight = std::max(0.0, 1.0 - kept);
  for (double& w : mix.weights) w /= kept;
  return mix;
}

Moments exact_moments(const SectorMixture& mixture) {
  Moments::Packed total{};
  for (std::size_t s = 0; s < mixture.sectors.size(); ++s) {
    const Moments::Packed m = exact_moments(mixture.sectors[s]).pack();
    for (std::size_t k = 0; k < total.size(); ++k) total[k] += mixture.weights[s] * m[k];
  }
  return Moments::unpack(total);
}

namespace {

TimePoint exact_point(double t, const Moments& m) {
  const Observables o = observables_from_moments(m);
  TimePoint p;
  p.t = t;
  for (int w = 0; w < kWells; ++w) {
    p.population[w] = {o.population[w], 0.0};
    p.variance[w] = {o.variance[w], 0.0};
  }
  p.variance_diff13 = {o.variance_diff13, 0.0};
  p.xi13 = {o.xi13, 0.0};
  p.xi_steer1 = {o.xi_steer1, 0.0};
  p.xi_steer3 = {o.xi_steer3, 0.0};
  p.total_population = {o.total_population, 0.0};
  p.population_diff13 = {o.population_diff13, 0.0};
  for (const cplx& z : {m.n[0], m.n[1], m.n[2], m.n2[0], m.n2[1], m.n2[2], m.q13, m.c13 * m.c31}) {
    p.imag_residual = std::max(p.imag_residual, std::abs(z.imag()));
  }
  return p;
}

}  // namespace

TimeSeriesResult oracle_time_series(const ModelParams& params, double sample_interval, double t_final) {
  params.validate();
  if (params.n_atoms > 200) throw std::invalid_argument("oracle supports at most 200 atoms");
  const auto samples = static_cast<std::size_t>(std::llround(t_final / sample_interval));

  SectorMixture mix;
  if (params.initial_state == InitialStateKind::fock) {
    Occupation occ{0, 0, 0};
    occ[params.initial_well - 1] = static_cast<int>(params.n_atoms);
    mix.weights = {1.0};
    mix.sectors = {fock_state(occ)};
  } else {
    const double n = static_cast<double>(params.n_atoms);
    mix = coherent_initial(params.initial_well, n, default_coherent_cutoff(n));
  }

  std::vector<Moments::Packed> sums(samples + 1, Moments::Packed{});
  for (std::size_t s = 0; s < mix.sectors.size(); ++s) {
    const auto path = evolve(mix.sectors[s], params.tunnelling, params.nonlinearity, sample_interval,
                             static_cast<double>(samples) * sample_interval);
    for (std::size_t i = 0; i < path.size(); ++i) {
      const Moments::Packed m = exact_moments(path[i]).pack();
      for (std::size_t k = 0; k < m.size(); ++k) sums[i][k] += mix.weights[s] * m[k];
    }
  }

  TimeSeriesResult r;
  r.n_valid = 1;
  r.points.reserve(samples + 1);
  for (std::size_t i = 0; i <= samples; ++i) {
    r.points.push_back(exact_point(static_cast<double>(i) * sample_interval, Moments::unpack(sums[i])));
  }
  return r;
}

}  // namespace atomsplit
