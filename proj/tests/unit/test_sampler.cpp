// SPDX-License-Identifier: Apache-2.0

#include <catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "atomsplit/sampler.hpp"

using namespace atomsplit;

namespace {

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_and_se(const std::vector<double>& x) {
  double m = 0.0;
  for (double v : x) m += v;
  m /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - m) * (v - m);
  return {m, std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()))};
}

}  // namespace

TEST_CASE("coherent samples are deterministic deltas", "[sampler]") {
  CHECK(sample_coherent(0.0) == ModeSample{0.0, 0.0});
  const double a = std::sqrt(200.0);
  for (std::uint64_t i = 0; i < 10; ++i) {
    const ModeSample s = sample_coherent(200.0, SubstreamKey{42, i});
    CHECK(s.alpha == cplx(a, 0.0));
    CHECK(s.alpha_plus == cplx(a, 0.0));
    // alpha+ alpha is exactly N on every draw, so the ensemble variance is 0.
    CHECK((s.alpha_plus * s.alpha).real() == Catch::Approx(200.0).epsilon(1e-15));
  }
  CHECK_THROWS_AS(sample_coherent(-1.0), std::invalid_argument);
}

TEST_CASE("Fock sampling reproduces normally ordered moments", "[sampler][statistics]") {
  SECTION("mean population of |200>") {
    Engine rng = make_substream({1, 0});
    std::vector<double> n;
    for (int i = 0; i < 200000; ++i) {
      const ModeSample s = sample_fock(200, rng);
      n.push_back((s.alpha_plus * s.alpha).real());
    }
    const MeanSe e = mean_and_se(n);
    CHECK(std::abs(e.mean - 200.0) < 3.0 * e.se);
  }
  SECTION("<a+^2 a^2> of |3> is 6") {
    Engine rng = make_substream({2, 0});
    std::vector<double> n2;
    for (int i = 0; i < 200000; ++i) {
      const ModeSample s = sample_fock(3, rng);
      const cplx n = s.alpha_plus * s.alpha;
      n2.push_back((n * n).real());
    }
    const MeanSe e = mean_and_se(n2);
    CHECK(std::abs(e.mean - 6.0) < 3.0 * e.se);
  }
  SECTION("property: <a+^k a^k> -> n(n-1)...(n-k+1) for k <= 3, 1e6 samples, 4 sigma") {
    for (std::int64_t n : {0, 1, 4, 10}) {
      Engine rng = make_substream({3, static_cast<std::uint64_t>(n)});
      std::vector<std::vector<double>> re(3), im(3);
      for (int i = 0; i < 1000000; ++i) {
        const ModeSample s = sample_fock(n, rng);
        const cplx m = s.alpha_plus * s.alpha;
        cplx power = 1.0;
        for (int k = 0; k < 3; ++k) {
          power *= m;
          re[k].push_back(power.real());
          im[k].push_back(power.imag());
        }
      }
      double falling = 1.0;
      for (int k = 0; k < 3; ++k) {
        falling *= static_cast<double>(n - k);
        const MeanSe r = mean_and_se(re[k]);
        const MeanSe j = mean_and_se(im[k]);
        INFO("n = " << n << ", k = " << (k + 1) << ", mean = " << r.mean << " +- " << r.se);
        CHECK(std::abs(r.mean - falling) <= 4.0 * r.se + 1e-12);
        CHECK(std::abs(j.mean) <= 4.0 * j.se + 1e-12);
      }
    }
  }
  SECTION("number variance of |200> is zero") {
    Engine rng = make_substream({4, 0});
    // Batch means over 100 batches of the nonlinear estimator V = <n2> + <n> - <n>^2.
    std::vector<double> v;
    for (int b = 0; b < 100; ++b) {
      double sn = 0.0;
      double sn2 = 0.0;
      const int per = 4000;
      for (int i = 0; i < per; ++i) {
        const ModeSample s = sample_fock(200, rng);
        const cplx m = s.alpha_plus * s.alpha;
        sn += m.real();
        sn2 += (m * m).real();
      }
      const double mn = sn / per;
      v.push_back(sn2 / per + mn - mn * mn);
    }
    const MeanSe e = mean_and_se(v);
    CHECK(std::abs(e.mean) < 3.0 * e.se);
  }
  CHECK_THROWS_AS(sample_fock(-1, SubstreamKey{}), std::invalid_argument);
}

TEST_CASE("substreams are reproducible and distinct", "[sampler][rng]") {
  const ModeSample a = sample_fock(200, SubstreamKey{99, 5});
  const ModeSample b = sample_fock(200, SubstreamKey{99, 5});
  CHECK(a == b);
  CHECK_FALSE(a == sample_fock(200, SubstreamKey{99, 6}));
  CHECK_FALSE(a == sample_fock(200, SubstreamKey{100, 5}));
  // High words of the key matter too.
  CHECK_FALSE(sample_fock(7, SubstreamKey{1ULL << 40, 0}) == sample_fock(7, SubstreamKey{0, 0}));
  CHECK_FALSE(sample_fock(7, SubstreamKey{0, 1ULL << 40}) == sample_fock(7, SubstreamKey{0, 0}));
}

TEST_CASE("initial phase points", "[sampler]") {
  ModelParams params;
  params.n_atoms = 200;
  params.initial_well = 2;

  SECTION("Fock in the middle well") {
    const PhasePoint p = sample_initial(params, SubstreamKey{8, 3});
    const ModeSample s = sample_fock(200, SubstreamKey{8, 3});
    CHECK(p.alpha[0] == cplx(0.0));
    CHECK(p.alpha[2] == cplx(0.0));
    CHECK(p.alpha_plus[0] == cplx(0.0));
    CHECK(p.alpha_plus[2] == cplx(0.0));
    CHECK(p.alpha[1] == s.alpha);
    CHECK(p.alpha_plus[1] == s.alpha_plus);
    CHECK(p.t == 0.0);
  }
  SECTION("coherent in the middle well") {
    params.initial_state = InitialStateKind::coherent;
    const PhasePoint p = sample_initial(params, SubstreamKey{8, 3});
    const double a = std::sqrt(200.0);
    CHECK(p.alpha == std::array<cplx, 3>{0.0, a, 0.0});
    CHECK(p.alpha_plus == std::array<cplx, 3>{0.0, a, 0.0});
  }
  SECTION("empty Fock state has zero mean population") {
    params.n_atoms = 0;
    std::vector<double> n;
    for (std::uint64_t i = 0; i < 20000; ++i) {
      const PhasePoint p = sample_initial(params, SubstreamKey{9, i});
      n.push_back((p.alpha_plus[1] * p.alpha[1]).real());
      REQUIRE(p.alpha[0] == cplx(0.0));
    }
    const MeanSe e = mean_and_se(n);
    CHECK(std::abs(e.mean) < 3.0 * e.se);
    CHECK(e.se > 0.0);  // canonical vacuum cloud, unlike the coherent delta
  }
}
