#include <doctest.h>

#include <cmath>
#include <random>

#include "nmqsd/config.hpp"
#include "nmqsd/metrics.hpp"
#include "oracles/wootters_brute.hpp"

using namespace nmqsd;

namespace {

DensityMatrix4 random_state(std::mt19937_64& rng, int rank) {
  std::normal_distribution<double> n;
  Eigen::MatrixXcd G(4, rank);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < rank; ++j) G(i, j) = cplx(n(rng), n(rng));
  DensityMatrix4 rho = G * G.adjoint();
  return rho / rho.trace().real();
}

DensityMatrix4 pure(const PureState4& v) { return v * v.adjoint(); }

}  // namespace

TEST_CASE("concurrence of reference states") {
  CHECK(wootters_concurrence(pure(preset_state("singlet"))).value == doctest::Approx(1.0));
  CHECK(wootters_concurrence(pure(preset_state("bell+"))).value == doctest::Approx(1.0));
  CHECK(wootters_concurrence(pure(preset_state("10"))).value == doctest::Approx(0.0));
  CHECK(wootters_concurrence(pure(preset_state("10+00"))).value <= 1e-7);
  CHECK(wootters_concurrence(DensityMatrix4::Identity() / 4.0).value == 0.0);
  // Werner state p |singlet><singlet| + (1 - p) I/4: C = max(0, (3p - 1) / 2).
  for (double p : {0.2, 1.0 / 3.0, 0.5, 0.8}) {
    const DensityMatrix4 w = p * pure(preset_state("singlet")) + (1.0 - p) * DensityMatrix4::Identity() / 4.0;
    CHECK(wootters_concurrence(w).value == doctest::Approx(std::max(0.0, 1.5 * p - 0.5)).epsilon(1e-7));
  }
  // a|10> + b|01>: C = 2|ab|.
  PureState4 v = PureState4::Zero();
  v[basis::k10] = std::sqrt(0.3);
  v[basis::k01] = cplx(0.0, std::sqrt(0.7));
  CHECK(wootters_concurrence(pure(v)).value == doctest::Approx(2.0 * std::sqrt(0.21)));
}

TEST_CASE("concurrence agrees with the direct non-Hermitian eigenvalue route") {
  std::mt19937_64 rng(12345);
  for (int trial = 0; trial < 300; ++trial) {
    const DensityMatrix4 rho = random_state(rng, 1 + trial % 4);
    const MetricValue c = wootters_concurrence(rho);
    CHECK(std::abs(c.value - oracle::concurrence_brute(rho)) <= 1e-7);
    CHECK(c.eigenvalues[0] >= c.eigenvalues[3]);
  }
}

TEST_CASE("concurrence rejects non-Hermitian input") {
  DensityMatrix4 rho = DensityMatrix4::Identity() / 4.0;
  rho(0, 1) = 1e-3;
  CHECK_THROWS_AS(wootters_concurrence(rho), ConfigError);
  rho(0, 1) = 1e-8;
  CHECK_NOTHROW(wootters_concurrence(rho));
}

TEST_CASE("fidelity basics") {
  std::mt19937_64 rng(7);
  for (int trial = 0; trial < 100; ++trial) {
    const DensityMatrix4 a = random_state(rng, 1 + trial % 4);
    const DensityMatrix4 b = random_state(rng, 1 + (trial / 4) % 4);
    CHECK(fidelity(a, a).value == doctest::Approx(1.0).epsilon(1e-6));
    const double fab = fidelity(a, b).value;
    CHECK(fab == doctest::Approx(fidelity(b, a).value).epsilon(1e-6));
    CHECK(fab >= 0.0);
    CHECK(fab <= 1.0);
  }
  // Pure states: |<psi|phi>|.
  const PureState4 psi = preset_state("10");
  const PureState4 phi = preset_state("triplet");
  CHECK(fidelity(pure(psi), pure(phi)).value == doctest::Approx(std::sqrt(0.5)));
  // Commuting states: sum sqrt(p q).
  DensityMatrix4 p = DensityMatrix4::Zero(), q = DensityMatrix4::Zero();
  p.diagonal() << 0.1, 0.2, 0.3, 0.4;
  q.diagonal() << 0.4, 0.3, 0.2, 0.1;
  const double expect = 2.0 * (std::sqrt(0.04) + std::sqrt(0.06));
  CHECK(fidelity(p, q).value == doctest::Approx(expect));
  CHECK(fidelity(pure(preset_state("10")), pure(preset_state("01"))).value <= 1e-7);
}

TEST_CASE("fidelity grows under a depolarizing channel") {
  std::mt19937_64 rng(99);
  const DensityMatrix4 I4 = DensityMatrix4::Identity() / 4.0;
  for (int trial = 0; trial < 50; ++trial) {
    const DensityMatrix4 a = random_state(rng, 2);
    const DensityMatrix4 b = random_state(rng, 3);
    double prev = fidelity(a, b).value;
    for (double s : {0.1, 0.3, 0.6, 0.9}) {
      const double f = fidelity((1 - s) * a + s * I4, (1 - s) * b + s * I4).value;
      CHECK(f >= prev - 1e-9);
      prev = f;
    }
  }
}

TEST_CASE("fidelity rejects negative input and sqrt is principal") {
  DensityMatrix4 bad = DensityMatrix4::Zero();
  bad.diagonal() << 1.1, -0.1, 0.0, 0.0;
  CHECK_THROWS_AS(fidelity(bad, DensityMatrix4::Identity() / 4.0), ConfigError);
  CHECK_THROWS_AS(fidelity(DensityMatrix4::Identity() / 4.0, bad), ConfigError);
  std::mt19937_64 rng(3);
  const DensityMatrix4 r = random_state(rng, 4);
  const DensityMatrix4 s = psd_sqrt(r);
  CHECK((s * s - r).norm() <= 1e-12);
  CHECK(hermiticity_deviation(s) <= 1e-14);
}
