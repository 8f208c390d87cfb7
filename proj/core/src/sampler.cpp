// SPDX-License-Identifier: Apache-2.0

#include "atomsplit/sampler.hpp"

#include <numbers>
#include <stdexcept>

namespace atomsplit {

Engine make_substream(SubstreamKey key) {
  std::seed_seq seq{
      static_cast<std::uint32_t>(key.master_seed),
      static_cast<std::uint32_t>(key.master_seed >> 32),
      static_cast<std::uint32_t>(key.trajectory_index),
      static_cast<std::uint32_t>(key.trajectory_index >> 32),
  };
  return Engine(seq);
}

ModeSample sample_coherent(double n_mean) {
  if (!(n_mean >= 0.0)) throw std::invalid_argument("coherent mean number must be non-negative");
  const double a = std::sqrt(n_mean);
  return {cplx{a, 0.0}, cplx{a, 0.0}};
}

ModeSample sample_coherent(double n_mean, SubstreamKey /*key*/) { return sample_coherent(n_mean); }

ModeSample sample_fock(std::int64_t n, Engine& rng) {
  if (n < 0) throw std::invalid_argument("Fock number must be non-negative");
  std::gamma_distribution<double> radius2(static_cast<double>(n) + 1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::normal_distribution<double> gauss(0.0, std::sqrt(0.5));

  const double x = radius2(rng);
  const double theta = phase(rng);
  const cplx mu = std::polar(std::sqrt(x), theta);
  const double re = gauss(rng);
  const double im = gauss(rng);
  const cplx delta{re, im};
  return {mu + delta, std::conj(mu - delta)};
}

ModeSample sample_fock(std::int64_t n, SubstreamKey key) {
  Engine rng = make_substream(key);
  return sample_fock(n, rng);
}

PhasePoint sample_initial(const ModelParams& params, Engine& rng) {
  PhasePoint p;
  const int w = params.initial_well - 1;
  const ModeSample s = params.initial_state == InitialStateKind::fock
                           ? sample_fock(params.n_atoms, rng)
                           : sample_coherent(static_cast<double>(params.n_atoms));
  p.alpha[w] = s.alpha;
  p.alpha_plus[w] = s.alpha_plus;
  p.t = 0.0;
  return p;
}

PhasePoint sample_initial(const ModelParams& params, SubstreamKey key) {
  Engine rng = make_substream(key);
  return sample_initial(params, rng);
}

}  // namespace atomsplit
