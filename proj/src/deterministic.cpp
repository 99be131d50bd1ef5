#include "nmqsd/deterministic.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nmqsd/metrics.hpp"
#include "nmqsd/noise.hpp"
#include "nmqsd/ode.hpp"

namespace nmqsd {

namespace {

using Vec16 = Eigen::Matrix<cplx, 16, 1>;

Vec16 flatten(const DensityMatrix4& m) { return Eigen::Map<const Vec16>(m.data()); }
DensityMatrix4 unflatten(const Vec16& v) { return Eigen::Map<const DensityMatrix4>(v.data()); }

void check_physical(const DensityMatrix4& rho, double t) {
  const double drift = std::abs(rho.trace() - 1.0);
  if (drift > 1e-6) throw NumericalError(fmt::format("master equation: trace drift {:.3g} at t = {:.6g}", drift, t));
  Eigen::SelfAdjointEigenSolver<DensityMatrix4> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  const double mn = es.eigenvalues().minCoeff();
  if (mn < -1e-6) throw NumericalError(fmt::format("master equation: eigenvalue {:.3g} at t = {:.6g}", mn, t));
}

// Elements (1-based labels of the RDM): 11 12 13 14 22 23 33 24 34.
using Vec9 = Eigen::Matrix<cplx, 9, 1>;

Vec9 pack_elements(const DensityMatrix4& r) {
  Vec9 v;
  v << r(0, 0), r(0, 1), r(0, 2), r(0, 3), r(1, 1), r(1, 2), r(2, 2), r(1, 3), r(2, 3);
  return v;
}

DensityMatrix4 unpack_elements(const Vec9& v) {
  DensityMatrix4 r;
  r(0, 0) = v[0];
  r(0, 1) = v[1];
  r(0, 2) = v[2];
  r(0, 3) = v[3];
  r(1, 1) = v[4];
  r(1, 2) = v[5];
  r(2, 2) = v[6];
  r(1, 3) = v[7];
  r(2, 3) = v[8];
  r(3, 3) = 1.0 - v[0] - v[4] - v[6];
  for (int i = 0; i < 4; ++i) {
    r(i, i) = r(i, i).real();
    for (int j = 0; j < i; ++j) r(i, j) = std::conj(r(j, i));
  }
  return r;
}

}  // namespace

bool in_zero_11_family(const DensityMatrix4& rho, double tol) {
  return rho.row(0).cwiseAbs().maxCoeff() <= tol && rho.col(0).cwiseAbs().maxCoeff() <= tol;
}

MasterResult integrate_master(const DensityMatrix4& rho0, const ModelParams& p, double dt,
                              double T, std::size_t stride, ModelKind kind) {
  if (kind == ModelKind::exact) {
    throw ConfigError("the master equation needs a noise-free O-operator (zeroth or weak1/3/5)");
  }
  if (stride == 0) throw ConfigError("stride must be >= 1");
  const std::size_t n = step_count(dt, T);
  const ModelTracks tracks(p, kind, 0.5 * dt, dt * static_cast<double>(n));
  const Operator4 H = build_hamiltonian(p);
  const Operator4 L = coupling_operator();
  const Operator4 Ld = L.adjoint();
  const double lam = p.lambda();

  // Stage times are t, t + dt/2, t + dt: map them onto the half-step track.
  auto rhs = [&](double t, const Vec16& y) {
    const auto k = static_cast<std::size_t>(std::llround(t / tracks.dt()));
    const DensityMatrix4 rho = unflatten(y);
    const Operator4 O = tracks.o_bar(k, 0.0).to_operator();
    const DensityMatrix4 rOd = rho * O.adjoint();
    const DensityMatrix4 Or = O * rho;
    const DensityMatrix4 d = -kI * (H * rho - rho * H) + lam * (L * rOd - rOd * L) + lam * (Or * Ld - Ld * Or);
    return flatten(d);
  };

  MasterResult out;
  Vec16 y = flatten(rho0);
  for (std::size_t s = 0;; ++s) {
    const double t = dt * static_cast<double>(s);
    const DensityMatrix4 rho = unflatten(y);
    check_physical(rho, t);
    if (s % stride == 0) {
      out.series.t.push_back(t);
      out.series.rho.push_back(rho);
    }
    if (s == n) break;
    y = rk4_step(rhs, t, y, dt);
  }

  if (kind == ModelKind::zeroth && in_zero_11_family(rho0)) {
    const RdmSeries el = integrate_elements(rho0, p, dt, dt * static_cast<double>(n), stride);
    double dev = 0.0;
    for (std::size_t i = 0; i < el.rho.size() && i < out.series.rho.size(); ++i) {
      dev = std::max(dev, (el.rho[i] - out.series.rho[i]).cwiseAbs().maxCoeff());
    }
    out.element_deviation = dev;
  }
  return out;
}

RdmSeries integrate_elements(const DensityMatrix4& rho0, const ModelParams& p, double dt,
                             double T, std::size_t stride) {
  if (stride == 0) throw ConfigError("stride must be >= 1");
  const std::size_t n = step_count(dt, T);
  const CoeffTrack track = integrate_zeroth_coeffs(p, 0.5 * dt, dt * static_cast<double>(n));
  const double lam = p.lambda();
  const double w = p.omega_s();

  auto rhs = [&](double t, const Vec9& r) {
    const auto k = static_cast<std::size_t>(std::llround(t / track.dt));
    const cplx X = track.X(k);
    const cplx Y = track.Y(k);
    const cplx r11 = r[0], r12 = r[1], r13 = r[2], r14 = r[3], r22 = r[4], r23 = r[5], r33 = r[6],
               r24 = r[7], r34 = r[8];
    const double ReY = Y.real(), ReX = X.real();
    Vec9 d;
    d[0] = -4.0 * lam * ReY * r11;
    d[1] = -kI * w * r12 - lam * (2.0 * Y + std::conj(X)) * r12 - lam * X * r13;
    d[2] = -kI * w * r13 - lam * (2.0 * Y + std::conj(X)) * r13 - lam * X * r12;
    d[3] = -2.0 * kI * w * r14 - 2.0 * lam * Y * r14;
    d[4] = 2.0 * lam * ReY * r11 - 2.0 * lam * ReX * r22 - lam * std::conj(X) * r23 - lam * X * std::conj(r23);
    d[5] = 2.0 * lam * ReY * r11 - 2.0 * lam * ReX * r23 - lam * X * r33 - lam * std::conj(X) * std::conj(r22);
    d[6] = 2.0 * lam * ReY * r11 - 2.0 * lam * ReX * r33 - lam * std::conj(X) * std::conj(r23) - lam * X * r23;
    d[7] = -kI * w * r24 + lam * (Y + std::conj(X)) * (r12 + r13) - lam * X * (r24 + r34);
    d[8] = -kI * w * r34 + lam * (Y + std::conj(X)) * (r12 + r13) - lam * X * (r34 + r24);
    return d;
  };

  RdmSeries out;
  Vec9 y = pack_elements(rho0);
  for (std::size_t s = 0;; ++s) {
    const double t = dt * static_cast<double>(s);
    if (s % stride == 0) {
      out.t.push_back(t);
      out.rho.push_back(unpack_elements(y));
    }
    if (s == n) break;
    y = rk4_step(rhs, t, y, dt);
  }
  return out;
}

DensityMatrix4 analytic_rdm(const DensityMatrix4& rho0, double t, const ModelParams& p) {
  if (!in_zero_11_family(rho0)) {
    throw ConfigError("the analytic solution needs an initial state without |11> support");
  }
  const cplx A = p.lambda() > 0.0 ? closed_form_A(t, p) : cplx(1.0);
  const double A2 = std::norm(A);
  const double ReA = A.real(), ImA = A.imag();
  const double r22 = rho0(1, 1).real(), r33 = rho0(2, 2).real();
  const double R23 = rho0(1, 2).real(), I23 = rho0(1, 2).imag();
  const cplx r24 = rho0(1, 3), r34 = rho0(2, 3);
  const cplx phase = std::exp(cplx(0.0, -p.omega_s() * t));

  DensityMatrix4 r = DensityMatrix4::Zero();
  r(1, 1) = 0.25 * (1.0 + A2 + 2.0 * ReA) * r22 + 0.25 * (1.0 + A2 - 2.0 * ReA) * r33 +
            0.5 * (A2 - 1.0) * R23 + ImA * I23;
  r(2, 2) = 0.25 * (1.0 + A2 + 2.0 * ReA) * r33 + 0.25 * (1.0 + A2 - 2.0 * ReA) * r22 +
            0.5 * (A2 - 1.0) * R23 - ImA * I23;
  const double R = 0.25 * (A2 - 1.0) * (r22 + r33) + 0.5 * (A2 + 1.0) * R23;
  const double I = 0.5 * ImA * (r33 - r22) + ReA * I23;
  r(1, 2) = cplx(R, I);
  r(1, 3) = 0.5 * phase * (A * (r24 + r34) + r24 - r34);
  r(2, 3) = 0.5 * phase * (A * (r34 + r24) - r24 + r34);
  r(3, 3) = 1.0 - r(1, 1) - r(2, 2);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < i; ++j) r(i, j) = std::conj(r(j, i));
  return r;
}

double analytic_concurrence(const DensityMatrix4& rho0, double t, const ModelParams& p) {
  if (!in_zero_11_family(rho0)) {
    throw ConfigError("the analytic concurrence needs an initial state without |11> support");
  }
  const cplx A = p.lambda() > 0.0 ? closed_form_A(t, p) : cplx(1.0);
  const double A2 = std::norm(A);
  const double r22 = rho0(1, 1).real(), r33 = rho0(2, 2).real();
  const double R23 = rho0(1, 2).real(), I23 = rho0(1, 2).imag();
  const double R = 0.25 * (A2 - 1.0) * r22 + 0.25 * (A2 - 1.0) * r33 + 0.5 * (A2 + 1.0) * R23;
  const double I = 0.5 * A.imag() * (r33 - r22) + A.real() * I23;
  return 2.0 * std::sqrt(R * R + I * I);
}

DensityMatrix4 steady_form(double r, cplx x) {
  DensityMatrix4 m = DensityMatrix4::Zero();
  m(1, 1) = r;
  m(1, 2) = -r;
  m(2, 1) = -r;
  m(2, 2) = r;
  m(1, 3) = x;
  m(2, 3) = -x;
  m(3, 1) = std::conj(x);
  m(3, 2) = -std::conj(x);
  m(3, 3) = 1.0 - 2.0 * r;
  return m;
}

double default_relaxation_horizon(const ModelParams& p) {
  double rate = 0.5 * p.gamma();
  if (p.lambda() > 0.0) {
    const auto cf = ClosedFormParams::from(p);
    rate = std::max(1e-3, 0.5 * (p.gamma() - cf.beta.imag()));
  }
  return std::clamp(25.0 / rate, 30.0, 2000.0);
}

SteadyStateReport steady_state(const DensityMatrix4& rho0, const ModelParams& p, double t_ref,
                               double dt, double T) {
  SteadyStateReport rep;
  rep.t_ref = t_ref;
  rep.horizon = T > 0.0 ? T : default_relaxation_horizon(p);
  const double w = p.omega_s();

  const std::size_t stride = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(0.1 / dt)));
  const MasterResult run = integrate_master(rho0, p, dt, rep.horizon, stride);
  const auto& ts = run.series.t;
  const auto& rs = run.series.rho;
  const DensityMatrix4& last = rs.back();
  rep.concurrence_integrated = wootters_concurrence(last).value;

  // Relaxation horizon measured in the interaction picture (free rotation removed).
  auto interaction = [&](std::size_t i) {
    Eigen::Vector4cd ph;
    for (int a = 0; a < 4; ++a) {
      const double e = a == 0 ? w : (a == 3 ? -w : 0.0);
      ph[a] = std::exp(cplx(0.0, e * ts[i]));
    }
    return DensityMatrix4(ph.asDiagonal() * rs[i] * ph.conjugate().asDiagonal());
  };
  std::optional<double> settled;
  DensityMatrix4 prev = interaction(0);
  for (std::size_t i = 1; i < rs.size(); ++i) {
    const DensityMatrix4 cur = interaction(i);
    const double rate = (cur - prev).cwiseAbs().maxCoeff() / (ts[i] - ts[i - 1]);
    if (rate >= 1e-4) settled.reset();
    else if (!settled) settled = ts[i - 1];
    prev = cur;
  }
  rep.tau_S = settled;

  if (in_zero_11_family(rho0)) {
    rep.closed_form = true;
    rep.r = 0.25 * (rho0(1, 1).real() + rho0(2, 2).real() - 2.0 * rho0(1, 2).real());
    rep.x = 0.5 * (rho0(1, 3) - rho0(2, 3)) * std::exp(cplx(0.0, -w * t_ref));
  } else {
    rep.r = last(1, 1).real();
    rep.x = last(1, 3) * std::exp(cplx(0.0, w * (ts.back() - t_ref)));
  }
  rep.rho_inf = steady_form(rep.r, rep.x);
  rep.concurrence_inf = 2.0 * rep.r;
  return rep;
}

nlohmann::json SteadyStateReport::to_json() const {
  nlohmann::json rho = nlohmann::json::array();
  for (int i = 0; i < 4; ++i) {
    nlohmann::json row = nlohmann::json::array();
    for (int j = 0; j < 4; ++j) row.push_back({rho_inf(i, j).real(), rho_inf(i, j).imag()});
    rho.push_back(row);
  }
  return {{"r", r},
          {"x", {{"re", x.real()}, {"im", x.imag()}, {"abs", std::abs(x)}}},
          {"t_ref", t_ref},
          {"rho_inf", rho},
          {"concurrence_inf", concurrence_inf},
          {"concurrence_integrated", concurrence_integrated},
          {"tau_S", tau_S ? nlohmann::json(*tau_S) : nlohmann::json(nullptr)},
          {"horizon", horizon},
          {"closed_form", closed_form}};
}

}  // namespace nmqsd
