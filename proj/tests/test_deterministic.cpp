#include <doctest.h>

#include <cmath>

#include "nmqsd/config.hpp"
#include "nmqsd/deterministic.hpp"
#include "nmqsd/metrics.hpp"
#include "oracles/pseudomode.hpp"

using namespace nmqsd;

namespace {

DensityMatrix4 pure(const PureState4& v) { return v * v.adjoint(); }

DensityMatrix4 mixed_no11() {
  // Mixture of |10>, (|10> + i|01>)/sqrt2 and (|01> + |00>)/sqrt2.
  PureState4 a = preset_state("10");
  PureState4 b = PureState4::Zero();
  b[basis::k10] = 1.0 / std::sqrt(2.0);
  b[basis::k01] = cplx(0.0, 1.0 / std::sqrt(2.0));
  PureState4 c = PureState4::Zero();
  c[basis::k01] = 1.0 / std::sqrt(2.0);
  c[basis::k00] = 1.0 / std::sqrt(2.0);
  return 0.2 * pure(a) + 0.5 * pure(b) + 0.3 * pure(c);
}

}  // namespace

TEST_CASE("element system matches the matrix master equation") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  for (const DensityMatrix4& rho0 : {pure(preset_state("10")), pure(preset_state("10+00")), mixed_no11()}) {
    const MasterResult m = integrate_master(rho0, p, 0.005, 8.0, 20);
    REQUIRE(m.element_deviation.has_value());
    CHECK(*m.element_deviation <= 1e-8);
    const RdmSeries e = integrate_elements(rho0, p, 0.005, 8.0, 20);
    REQUIRE(e.t.size() == m.series.t.size());
    double worst = 0.0;
    for (std::size_t k = 0; k < e.t.size(); ++k)
      worst = std::max(worst, (e.rho[k] - m.series.rho[k]).cwiseAbs().maxCoeff());
    CHECK(worst <= 1e-8);
  }
  CHECK(!integrate_master(pure(preset_state("11")), p, 0.005, 1.0).element_deviation);
}

TEST_CASE("closed-form RDM matches the master equation") {
  for (const auto& s : {std::array{1.0, 0.5, 1.0}, std::array{0.6, 0.6, 1.0}, std::array{0.3, 1.0, 0.0}}) {
    const ModelParams p = ModelParams::from_detuning(1.0, s[0], s[1], s[2]);
    for (const DensityMatrix4& rho0 : {pure(preset_state("10")), pure(preset_state("10+00")), mixed_no11()}) {
      const MasterResult m = integrate_master(rho0, p, 0.005, 10.0, 40);
      double worst = 0.0, worst_c = 0.0;
      for (std::size_t k = 0; k < m.series.t.size(); ++k) {
        const double t = m.series.t[k];
        worst = std::max(worst, (analytic_rdm(rho0, t, p) - m.series.rho[k]).cwiseAbs().maxCoeff());
        worst_c = std::max(worst_c, std::abs(analytic_concurrence(rho0, t, p) -
                                             wootters_concurrence(m.series.rho[k]).value));
      }
      CAPTURE(s[0]);
      CAPTURE(s[1]);
      CHECK(worst <= 1e-4);
      if (std::abs(rho0(1, 3)) == 0.0) CHECK(worst_c <= 1e-4);  // 2|rho23| is the concurrence only without 24/34 coherence
    }
  }
}

TEST_CASE("zeroth-order master equation is exact without |11> support") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  const DensityMatrix4 rho0 = mixed_no11();
  const MasterResult m = integrate_master(rho0, p, 0.005, 6.0, 100);
  const auto ref = oracle::pseudomode_rdm(rho0, p, 0.005, 6.0, 100);
  REQUIRE(ref.t.size() == m.series.t.size());
  double worst = 0.0;
  for (std::size_t k = 0; k < ref.t.size(); ++k)
    worst = std::max(worst, (ref.rho[k] - m.series.rho[k]).cwiseAbs().maxCoeff());
  CHECK(worst <= 1e-6);
}

TEST_CASE("zeroth-order master equation from |11> deviates only slightly") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  const DensityMatrix4 rho0 = pure(preset_state("11"));
  const MasterResult m = integrate_master(rho0, p, 0.005, 10.0, 20);
  const auto ref = oracle::pseudomode_rdm(rho0, p, 0.005, 10.0, 20);
  double fmin = 1.0, tmin = 0.0;
  for (std::size_t k = 0; k < ref.t.size(); ++k) {
    const double F = fidelity(ref.rho[k], m.series.rho[k]).value;
    if (F < fmin) {
      fmin = F;
      tmin = ref.t[k];
    }
  }
  CAPTURE(tmin);
  CHECK(fmin == doctest::Approx(0.986).epsilon(0.002));
  CHECK(tmin > 2.5);
  CHECK(tmin < 4.5);
}

TEST_CASE("master equation conserves trace and the singlet") {
  const ModelParams p = ModelParams::from_detuning(1.0, 0.8, 0.7, -0.3);
  const MasterResult m = integrate_master(pure(preset_state("bell+")), p, 0.005, 10.0, 100);
  for (const auto& r : m.series.rho) CHECK(std::abs(r.trace() - 1.0) <= 1e-10);
  const DensityMatrix4 s = pure(preset_state("singlet"));
  const MasterResult ms = integrate_master(s, p, 0.005, 10.0, 2000);
  CHECK((ms.series.rho.back() - s).norm() <= 1e-12);
  CHECK_THROWS_AS(integrate_master(s, p, 0.005, 1.0, 1, ModelKind::exact), ConfigError);
}

TEST_CASE("uncoupled analytic solution is free rotation") {
  const ModelParams p = ModelParams::from_detuning(1.0, 0.0, 0.5, 1.0);
  const DensityMatrix4 rho0 = mixed_no11();
  const DensityMatrix4 r = analytic_rdm(rho0, 2.0, p);
  CHECK(std::abs(r(1, 2) - rho0(1, 2)) <= 1e-15);
  CHECK(std::abs(r(2, 3) - rho0(2, 3) * std::exp(cplx(0.0, -2.0))) <= 1e-15);
  CHECK(std::abs(r(3, 3) - rho0(3, 3)) <= 1e-15);
}

TEST_CASE("analytic route rejects |11> support") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  CHECK_THROWS_AS(analytic_rdm(pure(preset_state("11")), 1.0, p), ConfigError);
  CHECK_THROWS_AS(analytic_concurrence(pure(preset_state("bell+")), 1.0, p), ConfigError);
  CHECK(in_zero_11_family(pure(preset_state("10+00"))));
  CHECK(!in_zero_11_family(pure(preset_state("bell-"))));
}

TEST_CASE("steady state examples") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 1.0, 1.0);
  SUBCASE("single excitation") {
    const SteadyStateReport r = steady_state(pure(preset_state("10")), p, 0.0);
    CHECK(r.closed_form);
    CHECK(r.r == doctest::Approx(0.25));
    CHECK(r.concurrence_inf == doctest::Approx(0.5));
    CHECK(r.concurrence_integrated == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(std::abs(r.x) == 0.0);
    REQUIRE(r.tau_S.has_value());
    CHECK(*r.tau_S < r.horizon);
  }
  SUBCASE("singlet is stationary") {
    const SteadyStateReport r = steady_state(pure(preset_state("singlet")), p, 0.0);
    CHECK(r.r == doctest::Approx(0.5));
    CHECK(r.concurrence_inf == doctest::Approx(1.0));
    CHECK(r.tau_S.value() == 0.0);
  }
  SUBCASE("coherent superposition with the ground state") {
    const SteadyStateReport r = steady_state(pure(preset_state("10+00")), p, 0.0);
    CHECK(r.r == doctest::Approx(0.125));
    CHECK(std::abs(r.x - 0.25) <= 1e-15);
    const RdmSeries run = integrate_master(pure(preset_state("10+00")), p, 0.005, r.horizon).series;
    CHECK(std::abs(run.rho.back()(1, 3) * std::exp(cplx(0.0, run.t.back())) - r.x) <= 1e-6);
  }
  SUBCASE("bell states lose their entanglement") {
    for (const char* name : {"bell+", "bell-"}) {
      const SteadyStateReport r = steady_state(pure(preset_state(name)), p, 0.0);
      CHECK(!r.closed_form);
      CHECK(r.concurrence_inf <= 1e-4);
      CHECK(r.concurrence_integrated <= 1e-4);
    }
  }
  SUBCASE("report JSON") {
    const auto j = steady_state(pure(preset_state("10")), p, 0.0).to_json();
    for (const char* k : {"r", "x", "t_ref", "rho_inf", "concurrence_inf", "tau_S", "horizon", "closed_form"})
      CHECK(j.contains(k));
  }
}

TEST_CASE("steady form layout and horizon") {
  const DensityMatrix4 m = steady_form(0.25, cplx(0.1, 0.2));
  CHECK(m(1, 2) == cplx(-0.25));
  CHECK(m(2, 3) == cplx(-0.1, -0.2));
  CHECK(m(3, 1) == cplx(0.1, -0.2));
  CHECK(m.trace() == cplx(1.0));
  CHECK(wootters_concurrence(steady_form(0.25, 0.0)).value == doctest::Approx(0.5));
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 1.0, 1.0);
  CHECK(default_relaxation_horizon(p) >= 30.0);
  CHECK(default_relaxation_horizon(p) <= 2000.0);
}

TEST_CASE("stationary inputs of the element system") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  for (const char* name : {"00", "singlet"}) {
    const DensityMatrix4 rho0 = pure(preset_state(name));
    const RdmSeries e = integrate_elements(rho0, p, 0.005, 10.0, 200);
    for (const auto& r : e.rho) CHECK((r - rho0).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("closed-form limits") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  const DensityMatrix4 rho0 = mixed_no11();
  CHECK((analytic_rdm(rho0, 0.0, p) - rho0).cwiseAbs().maxCoeff() <= 1e-14);
  const DensityMatrix4 late = analytic_rdm(pure(preset_state("10")), 200.0, p);
  CHECK(late(1, 1).real() == doctest::Approx(0.25));
  CHECK(late(2, 2).real() == doctest::Approx(0.25));
  CHECK(late(1, 2).real() == doctest::Approx(-0.25));
  CHECK(std::abs(late(1, 2).imag()) <= 1e-8);
  CHECK(late(3, 3).real() == doctest::Approx(0.5));
  CHECK(analytic_concurrence(pure(preset_state("10")), 200.0, p) == doctest::Approx(0.5));
  for (double t : {0.0, 1.0, 5.0}) CHECK(analytic_concurrence(pure(preset_state("singlet")), t, p) == doctest::Approx(1.0));
  CHECK(analytic_concurrence(pure(preset_state("triplet")), 0.0, p) == doctest::Approx(1.0));
  CHECK(analytic_concurrence(pure(preset_state("triplet")), 200.0, p) <= 1e-9);
}

TEST_CASE("doubly excited population follows the sign of Re Y") {
  // rho_11' = -4 lambda Re(Y) rho_11. Re Y dips below zero in windows around t = 3.4-4.7
  // (gamma = 0.5) and t = 3.4-3.9 (gamma = 1), where rho_11 grows again, so the population
  // is not monotone after the build-up; the check is that growth happens only there.
  for (double g : {0.5, 1.0}) {
    const ModelParams p = ModelParams::from_detuning(1.0, 1.0, g, 1.0);
    const MasterResult m = integrate_master(pure(preset_state("11")), p, 0.005, 15.0);
    const CoeffTrack z = integrate_zeroth_coeffs(p, 0.005, 15.0);
    std::size_t growing = 0;
    for (std::size_t k = 1; k + 1 < m.series.t.size(); ++k) {
      const double d = (m.series.rho[k + 1](0, 0).real() - m.series.rho[k - 1](0, 0).real()) / 0.01;
      const double expect = -4.0 * p.lambda() * z.Y(k).real() * m.series.rho[k](0, 0).real();
      CHECK(std::abs(d - expect) <= 1e-4);
      if (d > 1e-6) {
        ++growing;
        CHECK(z.Y(k).real() < 0.0);
      }
    }
    CAPTURE(g);
    CHECK(growing > 0);
  }
}
