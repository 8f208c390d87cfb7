// SPDX-License-Identifier: Apache-2.0
//
// Initial-state sampling from exact positive-P distributions.

#ifndef ATOMSPLIT_SAMPLER_HPP
#define ATOMSPLIT_SAMPLER_HPP

#include <cstdint>
#include <random>

#include "atomsplit/model.hpp"

namespace atomsplit {

/// Identifies the random substream of one trajectory.
struct SubstreamKey {
  std::uint64_t master_seed = 0;
  std::uint64_t trajectory_index = 0;
};

using Engine = std::mt19937_64;

/// Pure function of the key: equal keys give engines in identical states.
Engine make_substream(SubstreamKey key);

struct ModeSample {
  cplx alpha;
  cplx alpha_plus;

  bool operator==(const ModeSample&) const = default;
};

/// Coherent state |sqrt(n_mean)>: a delta function, so no randomness is used.
ModeSample sample_coherent(double n_mean);
ModeSample sample_coherent(double n_mean, SubstreamKey key);

// Canonical positive-P of |n>: mu from the Husimi function (|mu|^2 ~
// Gamma(n+1), uniform phase), delta complex normal with E|delta|^2 = 1,
// alpha = mu + delta, alpha+ = conj(mu - delta).
// Draw order: radius^2, phase, Re(delta), Im(delta).
ModeSample sample_fock(std::int64_t n, Engine& rng);
ModeSample sample_fock(std::int64_t n, SubstreamKey key);

/// The configured well is sampled per `initial_state`; empty wells are exact
/// vacuum (alpha = alpha+ = 0).
PhasePoint sample_initial(const ModelParams& params, Engine& rng);
PhasePoint sample_initial(const ModelParams& params, SubstreamKey key);

}  // namespace atomsplit

#endif  // ATOMSPLIT_SAMPLER_HPP
