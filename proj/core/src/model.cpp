// SPDX-License-Identifier: Apache-2.0

#include "atomsplit/model.hpp"

#include <sstream>
#include <utility>

namespace atomsplit {

std::string to_string(InitialStateKind kind) {
  return kind == InitialStateKind::fock ? "fock" : "coherent";
}

InitialStateKind initial_state_kind_from_string(const std::string& name) {
  if (name == "fock") return InitialStateKind::fock;
  if (name == "coherent") return InitialStateKind::coherent;
  throw std::invalid_argument("unknown initial state kind '" + name + "'");
}

namespace {

void check_schedule(const Schedule& s, const char* name) {
  if (!std::isfinite(s.base_value())) {
    throw std::invalid_argument(std::string(name) + " must be finite");
  }
  if (s.cutoff_time() && (!std::isfinite(*s.cutoff_time()) || *s.cutoff_time() < 0.0)) {
    throw std::invalid_argument(std::string(name) + " cutoff must be a finite non-negative time");
  }
}

[[noreturn]] void throw_non_finite(double t) {
  std::ostringstream msg;
  msg << "non-finite phase-space amplitude at t=" << t;
  throw DivergenceError(msg.str(), t);
}

}  // namespace

void ModelParams::validate() const {
  check_schedule(tunnelling, "J");
  check_schedule(nonlinearity, "chi");
  if (tunnelling.base_value() < 0.0) throw std::invalid_argument("J must be non-negative");
  if (nonlinearity.base_value() < 0.0) {
    throw std::invalid_argument("chi must be non-negative (negative chi has no real noise factorisation)");
  }
  if (n_atoms < 0) throw std::invalid_argument("n_atoms must be non-negative");
  if (initial_well < 1 || initial_well > kWells) {
    throw std::invalid_argument("initial_well must be 1, 2 or 3");
  }
}

bool is_finite(const PhaseVector& p) noexcept {
  for (int w = 0; w < kWells; ++w) {
    if (!std::isfinite(p.alpha[w].real()) || !std::isfinite(p.alpha[w].imag()) ||
        !std::isfinite(p.alpha_plus[w].real()) || !std::isfinite(p.alpha_plus[w].imag())) {
      return false;
    }
  }
  return true;
}

PhaseVector drift(const PhaseVector& p, const ModelParams& params, double t) {
  if (!is_finite(p)) throw_non_finite(t);
  return drift_kernel(p, params.tunnelling.value(t), params.nonlinearity.value(t));
}

PhaseVector noise_amplitudes(const PhaseVector& p, const ModelParams& params, double t) {
  if (!is_finite(p)) throw_non_finite(t);
  const double chi = params.nonlinearity.value(t);
  if (chi < 0.0) throw std::invalid_argument("chi must be non-negative");
  return noise_kernel(p, chi);
}

PhaseVector mirrored(const PhaseVector& p) noexcept {
  PhaseVector m = p;
  std::swap(m.alpha[0], m.alpha[2]);
  std::swap(m.alpha_plus[0], m.alpha_plus[2]);
  return m;
}

}  // namespace atomsplit
