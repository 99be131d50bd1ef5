#include <doctest.h>

#include <cmath>
#include <sstream>

#include "nmqsd/trajectory.hpp"

using namespace nmqsd;

namespace {

PureState4 basis_state(int i) {
  PureState4 v = PureState4::Zero();
  v[i] = 1.0;
  return v;
}

std::vector<TrajectoryState> collect(const PureState4& psi0, const ModelTracks& tr, const NoisePath& noise,
                                     Unraveling u, std::size_t stride = 1) {
  std::vector<TrajectoryState> out;
  run_trajectory(psi0, tr, noise, u, stride, [&](const TrajectoryState& s) { out.push_back(s); });
  return out;
}

}  // namespace

TEST_CASE("singlet and ground state are dark") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  const double dt = 0.01, T = 3.0;
  const ModelTracks tr(p, ModelKind::exact, dt / 2, T);
  const NoisePath noise = sample_ou_path(p, dt, T, 3, 0);
  PureState4 singlet = PureState4::Zero();
  singlet[basis::k10] = 1.0 / std::sqrt(2.0);
  singlet[basis::k01] = -1.0 / std::sqrt(2.0);
  for (auto u : {Unraveling::nonlinear, Unraveling::linear}) {
    const auto s = collect(singlet, tr, noise, u);
    CHECK((s.back().psi - singlet).norm() <= 1e-14);
    const auto g = collect(basis_state(basis::k00), tr, noise, u);
    // |00> only picks up the phase e^{i w t}, up to the midpoint phase error T (w dt)^3 / (6 dt).
    CHECK(std::abs(g.back().psi[basis::k00] - std::exp(cplx(0.0, p.omega_s() * T))) <= 1e-4);
    CHECK(std::abs(std::abs(g.back().psi[basis::k00]) - 1.0) <= 1e-6);
  }
}

TEST_CASE("uncoupled qubits evolve freely") {
  const ModelParams p = ModelParams::from_detuning(1.3, 0.0, 0.5, 1.0);
  const double dt = 0.005, T = 2.0;
  const ModelTracks tr(p, ModelKind::exact, dt / 2, T);
  const NoisePath noise = sample_ou_path(p, dt, T, 3, 0);
  PureState4 psi = PureState4::Constant(0.5);
  const auto s = collect(psi, tr, noise, Unraveling::nonlinear);
  CHECK(std::abs(s.back().psi[basis::k11] - 0.5 * std::exp(cplx(0.0, -1.3 * T))) <= 2e-5);
  CHECK(std::abs(s.back().psi[basis::k10] - 0.5) <= 1e-6);
  CHECK(std::abs(s.back().psi[basis::k00] - 0.5 * std::exp(cplx(0.0, 1.3 * T))) <= 2e-5);
}

TEST_CASE("nonlinear trajectories keep unit norm and report expectations") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  const double dt = 0.01, T = 5.0;
  for (auto kind : {ModelKind::exact, ModelKind::zeroth, ModelKind::weak5}) {
    const ModelTracks tr(p, kind, dt / 2, T);
    const NoisePath noise = sample_ou_path(p, dt, T, 11, 2);
    const auto s = collect(basis_state(basis::k11), tr, noise, Unraveling::nonlinear, 50);
    CHECK(s.size() == 11);
    for (const auto& st : s) {
      CHECK(std::abs(st.psi.norm() - 1.0) <= 1e-12);
      const PureState4 Lpsi = coupling_operator() * st.psi;
      CHECK(std::abs(st.L_expect - st.psi.dot(Lpsi)) <= 1e-12);
      CHECK(st.L_dag_expect == std::conj(st.L_expect));
    }
    CHECK(s.back().t == doctest::Approx(T));
    CHECK(s.back().step == 500);
    if (kind == ModelKind::zeroth) CHECK(s.back().J_noise == cplx(0.0));
    else CHECK(std::abs(s.back().J_noise) > 0.0);
  }
}

TEST_CASE("midpoint scheme converges on fixed noise realizations") {
  // The OU path is only Hoelder-1/2, so the strong error is first order in dt and noisy
  // path by path; average over a few realizations refined from a common fine path.
  const ModelParams p = ModelParams::from_detuning(1.0, 0.8, 0.5, 1.0);
  const double T = 1.0, fine_dt = 0.000625;
  double coarse = 0.0, finer = 0.0;
  for (std::uint64_t i = 0; i < 4; ++i) {
    const NoisePath fine = sample_ou_path(p, fine_dt, T, 21, i);
    auto final_state = [&](std::size_t factor) {
      const NoisePath path = fine.coarsen(factor);
      const ModelTracks tr(p, ModelKind::exact, path.dt / 2, T);
      return collect(basis_state(basis::k11), tr, path, Unraveling::nonlinear).back().psi;
    };
    const PureState4 ref = final_state(1);
    coarse += (final_state(32) - ref).norm();
    finer += (final_state(2) - ref).norm();
  }
  CAPTURE(coarse);
  CAPTURE(finer);
  CHECK(coarse / finer > 6.0);
  CHECK(coarse / 4.0 < 1e-2);
}

TEST_CASE("linear unraveling conserves the mean norm") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  const double dt = 0.01, T = 3.0;
  const ModelTracks tr(p, ModelKind::exact, dt / 2, T);
  PureState4 psi0 = PureState4::Zero();
  psi0[basis::k11] = 1.0;
  const int n = 2000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    const NoisePath noise = sample_ou_path(p, dt, T, 5, i);
    const double n2 = collect(psi0, tr, noise, Unraveling::linear, 300).back().psi.squaredNorm();
    sum += n2;
    sum_sq += n2 * n2;
  }
  const double mean = sum / n;
  const double se = std::sqrt((sum_sq / n - mean * mean) / n);
  CAPTURE(mean);
  CAPTURE(se);
  CHECK(std::abs(mean - 1.0) <= 3.0 * se);
  CHECK(se > 0.0);
}

TEST_CASE("grid mismatches are configuration errors") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  const ModelTracks tr(p, ModelKind::zeroth, 0.01, 1.0);
  const NoisePath ok = sample_ou_path(p, 0.02, 1.0, 1, 0);
  const NoisePath wrong = sample_ou_path(p, 0.01, 1.0, 1, 0);
  const NoisePath longer = sample_ou_path(p, 0.02, 2.0, 1, 0);
  const auto s0 = TrajectoryState::initial(PureState4::Constant(0.5));
  CHECK_NOTHROW(step_nonlinear(s0, tr, ok, 0.02));
  CHECK_THROWS_AS(step_nonlinear(s0, tr, wrong, 0.01), ConfigError);
  CHECK_THROWS_AS(step_linear(s0, tr, ok, 0.01), ConfigError);
  CHECK_THROWS_AS(collect(s0.psi, tr, longer, Unraveling::linear), ConfigError);
  CHECK_THROWS_AS(collect(s0.psi, tr, ok, Unraveling::linear, 0), ConfigError);
}

TEST_CASE("trajectory CSV") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  const ModelTracks tr(p, ModelKind::zeroth, 0.05, 1.0);
  const NoisePath noise = sample_ou_path(p, 0.1, 1.0, 1, 0);
  std::ostringstream os;
  write_trajectory_csv(os, collect(basis_state(0), tr, noise, Unraveling::nonlinear, 5));
  const std::string s = os.str();
  CHECK(s.rfind("t,re_11,im_11,re_10,im_10,re_01,im_01,re_00,im_00,norm\n", 0) == 0);
  CHECK(std::count(s.begin(), s.end(), '\n') == 4);
}

TEST_CASE("exact and zeroth trajectories coincide without |11> support") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  const double dt = 0.005, T = 10.0;
  const ModelTracks ex(p, ModelKind::exact, dt / 2, T);
  const ModelTracks ze(p, ModelKind::zeroth, dt / 2, T);
  for (const char* name : {"10", "01", "10+00"}) {
    PureState4 psi0 = PureState4::Zero();
    if (std::string(name) == "10") psi0[basis::k10] = 1.0;
    if (std::string(name) == "01") psi0[basis::k01] = 1.0;
    if (std::string(name) == "10+00") psi0[basis::k10] = psi0[basis::k00] = 1.0 / std::sqrt(2.0);
    const NoisePath noise = sample_ou_path(p, dt, T, 8, 1);
    const auto a = collect(psi0, ex, noise, Unraveling::nonlinear, 100);
    const auto b = collect(psi0, ze, noise, Unraveling::nonlinear, 100);
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, (a[k].psi - b[k].psi).cwiseAbs().maxCoeff());
    CAPTURE(name);
    CHECK(worst <= 1e-6);
  }
}

TEST_CASE("noise-free linear evolution damps the single-excitation sector") {
  const ModelParams p = ModelParams::from_detuning(1.0, 1.0, 0.5, 1.0);
  const double dt = 0.01, T = 10.0;
  const ModelTracks tr(p, ModelKind::zeroth, dt / 2, T);
  NoisePath quiet = sample_ou_path(p, dt, T, 1, 0);
  std::fill(quiet.values.begin(), quiet.values.end(), cplx{});
  const auto s = collect(basis_state(basis::k10), tr, quiet, Unraveling::linear);
  // d|psi|^2/dt = -2 lambda Re(X) |psi|^2 on this sector: damping wherever Re X > 0.
  const CoeffTrack& c = *tr.coeffs();
  std::size_t damped = 0;
  for (std::size_t k = 1; k < s.size(); ++k) {
    if (c.X(2 * (k - 1)).real() > 0.0 && c.X(2 * k).real() > 0.0) {
      CHECK(s[k].psi.norm() <= s[k - 1].psi.norm() + 1e-15);
      ++damped;
    }
  }
  CHECK(damped > s.size() / 2);
  CHECK(s.back().psi.norm() < 0.9);
  const auto g = collect(basis_state(basis::k00), tr, sample_ou_path(p, dt, T, 1, 0), Unraveling::linear);
  // Exact dynamics keep the norm; the midpoint phase rotation grows it by (w dt)^4 / 8 per step.
  for (const auto& st : g) CHECK(std::abs(st.psi.norm() - 1.0) <= 2e-6);
}
