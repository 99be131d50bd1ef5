#include "nmqsd/coeffs.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/format.h>

#include "nmqsd/ode.hpp"

namespace nmqsd {

namespace {

std::size_t grid_steps(double dt, double T) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (!(T >= 0.0)) throw ConfigError("T must be >= 0");
  return static_cast<std::size_t>(std::llround(T / dt));
}

bool diverged(cplx z) { return !std::isfinite(z.real()) || !std::isfinite(z.imag()) || std::abs(z) > kDivergenceThreshold; }

CoeffTrack integrate_coeffs(const ModelParams& p, double dt, double T, bool zeroth) {
  const std::size_t n = grid_steps(dt, T);
  CoeffTrack track;
  track.mode = zeroth ? CoeffTrack::Mode::zeroth : CoeffTrack::Mode::exact;
  track.params = p;
  track.dt = dt;
  track.F1.reserve(n + 1);
  track.F2.reserve(n + 1);
  track.F3bar.reserve(n + 1);

  auto rhs = [&](double, const Eigen::Vector3cd& y) {
    cplx F[3] = {y[0], y[1], y[2]};
    cplx dF[3];
    coeff_rhs(p, zeroth, F, dF);
    return Eigen::Vector3cd(dF[0], dF[1], dF[2]);
  };

  Eigen::Vector3cd y = Eigen::Vector3cd::Zero();
  for (std::size_t k = 0;; ++k) {
    track.F1.push_back(y[0]);
    track.F2.push_back(y[1]);
    track.F3bar.push_back(y[2]);
    if (k == n) break;
    y = rk4_step(rhs, dt * static_cast<double>(k), y, dt);
    if (diverged(y[0]) || diverged(y[1]) || diverged(y[2])) {
      throw NumericalError(fmt::format(
          "O-operator coefficients diverged at t = {:.6g} (lambda={}, gamma={}, delta={}); "
          "parameters lie outside the regime where the coefficient equations stay finite",
          dt * static_cast<double>(k + 1), p.lambda(), p.gamma(), p.delta()));
    }
  }
  return track;
}

}  // namespace

std::size_t CoeffTrack::index_of(double t) const {
  const double k = t / dt;
  const double kr = std::round(k);
  if (std::abs(k - kr) > 1e-9 * std::max(1.0, std::abs(k)) || kr < 0.0 ||
      kr > static_cast<double>(size() - 1)) {
    throw ConfigError(fmt::format("t = {} is outside the coefficient track grid", t));
  }
  return static_cast<std::size_t>(kr);
}

void coeff_rhs(const ModelParams& p, bool zeroth, const cplx F[3], cplx dF[3]) {
  const double lam = p.lambda();
  const double g = p.gamma();
  const cplx a(-g, p.delta());  // i Delta - gamma
  const cplx F1 = F[0];
  const cplx F2 = F[1];
  const cplx F3 = zeroth ? cplx{} : F[2];
  dF[0] = 0.5 * lam * g + a * F1 + lam * F1 * F1 + 3.0 * lam * F2 * F2 - 0.5 * kI * lam * F3;
  dF[1] = a * F2 - lam * F1 * F1 + 4.0 * lam * F1 * F2 + lam * F2 * F2 - 0.5 * kI * lam * F3;
  dF[2] = zeroth ? cplx{}
                 : 2.0 * a * F3 + 4.0 * lam * F1 * F3 - 2.0 * kI * g * lam * F2;
}

CoeffTrack integrate_exact_coeffs(const ModelParams& p, double dt, double T) {
  return integrate_coeffs(p, dt, T, false);
}

CoeffTrack integrate_zeroth_coeffs(const ModelParams& p, double dt, double T) {
  return integrate_coeffs(p, dt, T, true);
}

CoeffTrack truncate_zeroth(const CoeffTrack& track) {
  return integrate_coeffs(track.params, track.dt, track.horizon(), true);
}

ClosedFormParams ClosedFormParams::from(const ModelParams& p) {
  const double lam = p.lambda();
  const double g = p.gamma();
  const double d = p.delta();
  const cplx beta2(4.0 * lam * lam * g - g * g + d * d, 2.0 * g * d);
  cplx beta = std::sqrt(beta2);
  if (beta.imag() < 0.0) beta = -beta;
  if (std::abs(beta) == 0.0) throw NumericalError("closed form undefined: beta = 0");
  const cplx c = std::atan(cplx(-g, d) / beta);
  return {beta, c};
}

namespace {

// tan(z) and cos(z) / cos(c) written so that large positive Im(z) never overflows.
cplx stable_tan(cplx z) {
  if (z.imag() > 0.0) {
    const cplx e = std::exp(2.0 * kI * z);
    return kI * (1.0 - e) / (1.0 + e);
  }
  const cplx e = std::exp(-2.0 * kI * z);
  return -kI * (1.0 - e) / (1.0 + e);
}

void require_coupling(const ModelParams& p) {
  if (!(p.lambda() > 0.0)) {
    throw ConfigError("closed forms need lambda > 0 (lambda = 0 is the trivial X = 0 limit)");
  }
}

}  // namespace

cplx closed_form_X(double t, const ModelParams& p) {
  require_coupling(p);
  const auto cf = ClosedFormParams::from(p);
  const cplx X = (cplx(p.gamma(), -p.delta()) + cf.beta * stable_tan(0.5 * cf.beta * t + cf.c)) /
                 (4.0 * p.lambda());
  if (diverged(X)) return riccati_X(t, p);
  return X;
}

cplx closed_form_A(double t, const ModelParams& p) {
  require_coupling(p);
  const auto cf = ClosedFormParams::from(p);
  const cplx z = 0.5 * cf.beta * t + cf.c;
  const cplx envelope_exp(-0.5 * p.gamma() * t, 0.5 * p.delta() * t);
  // cos(z) = e^{-iz} (1 + e^{2iz}) / 2, evaluated in the exponent for the dominant branch.
  cplx A;
  if (z.imag() >= 0.0) {
    A = std::exp(envelope_exp - kI * z) * (1.0 + std::exp(2.0 * kI * z)) / (2.0 * std::cos(cf.c));
  } else {
    A = std::exp(envelope_exp + kI * z) * (1.0 + std::exp(-2.0 * kI * z)) / (2.0 * std::cos(cf.c));
  }
  if (!std::isfinite(A.real()) || !std::isfinite(A.imag())) return linear_ode_A(t, p);
  return A;
}

cplx steady_X(const ModelParams& p) {
  require_coupling(p);
  const auto cf = ClosedFormParams::from(p);
  return (cplx(p.gamma(), -p.delta()) + kI * cf.beta) / (4.0 * p.lambda());
}

cplx riccati_X(double t, const ModelParams& p, double h_max) {
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t / h_max)));
  const double h = t / static_cast<double>(n);
  const double lam = p.lambda();
  const cplx a(-p.gamma(), p.delta());
  auto rhs = [&](double, const Eigen::Matrix<cplx, 1, 1>& x) {
    Eigen::Matrix<cplx, 1, 1> d;
    d(0) = 0.5 * lam * p.gamma() + a * x(0) + 2.0 * lam * x(0) * x(0);
    return d;
  };
  Eigen::Matrix<cplx, 1, 1> x;
  x(0) = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    x = rk4_step(rhs, h * static_cast<double>(k), x, h);
    if (diverged(x(0))) {
      throw NumericalError(fmt::format("X(t) has a pole near t = {:.6g}", h * static_cast<double>(k + 1)));
    }
  }
  return x(0);
}

cplx linear_ode_A(double t, const ModelParams& p, double h_max) {
  const std::size_t n = std::max<std::size_t>(1, static_cast<std::size_t>(std::ceil(t / h_max)));
  const double h = t / static_cast<double>(n);
  const double lam = p.lambda();
  const cplx a(-p.gamma(), p.delta());
  auto rhs = [&](double, const Eigen::Vector2cd& y) {
    return Eigen::Vector2cd(y[1], a * y[1] - lam * lam * p.gamma() * y[0]);
  };
  Eigen::Vector2cd y(1.0, 0.0);
  for (std::size_t k = 0; k < n; ++k) y = rk4_step(rhs, h * static_cast<double>(k), y, h);
  return y[0];
}

cplx f3_kernel(double t, double v, const CoeffTrack& track) {
  if (v > t) throw ConfigError("f3_kernel needs v <= t");
  const std::size_t kt = track.index_of(t);
  const std::size_t kv = track.index_of(v);
  const auto& p = track.params;
  const cplx base(-p.gamma(), 2.0 * p.omega_s() - p.Omega());
  auto rate = [&](std::size_t k) { return base + 4.0 * p.lambda() * track.F1[k]; };
  cplx exponent{};
  for (std::size_t k = kv; k < kt; ++k) exponent += 0.5 * track.dt * (rate(k) + rate(k + 1));
  return -4.0 * kI * track.F2[kv] * std::exp(exponent);
}

cplx weak_F1_closed(double t, const ModelParams& p) {
  const cplx r(p.gamma(), -p.delta());  // gamma - i Delta
  return 0.5 * p.gamma() * (1.0 - std::exp(-r * t)) / r;
}

WeakCouplingTrack integrate_weak_coupling(const ModelParams& p, int order, double dt, double T) {
  if (order != 1 && order != 3 && order != 5) throw ConfigError("weak-coupling order must be 1, 3 or 5");
  const std::size_t n = grid_steps(dt, T);
  const double g = p.gamma();
  const cplx a(-g, p.delta());
  const cplx kappa(g, p.Omega());
  const cplx h4_rate = -2.0 * kappa + 2.0 * kI * p.omega_s();

  // State layout: F1A F1B F3A F3B G3A G3B F5A F5B G5A G5B Kc
  using State = Eigen::Matrix<cplx, 11, 1>;
  auto rhs = [&](double, const State& y) {
    const cplx F1A = y[0], F1B = y[1], F3A = y[2], F3B = y[3], G3A = y[4], G3B = y[5];
    const cplx Kc = y[10];
    State d = State::Zero();
    d[0] = 0.5 * g + a * F1A;
    d[1] = 0.5 * g + a * F1B;
    if (order >= 3) {
      d[2] = a * F3A + F1A * F1A;
      d[3] = a * F3B + F1B * F1B;
      d[4] = a * G3A - F1A * F1B;
      d[5] = a * G3B - F1B * F1A;
    }
    if (order >= 5) {
      d[10] = g * (G3A + G3B) + h4_rate * Kc;
      d[6] = a * y[6] - F1A * (G3A - F3A) + F1A * (F3A + G3A) - 0.5 * Kc;
      d[7] = a * y[7] - F1B * (G3B - F3B) + F1B * (F3B + G3B) - 0.5 * Kc;
      d[8] = a * y[8] - F1B * (F3A - G3A) - 0.5 * Kc -
             (F3B * F1A - G3A * F1A - G3A * F1B - G3B * F1B);
      d[9] = a * y[9] - F1A * (F3B - G3B) - 0.5 * Kc -
             (F3A * F1B - G3B * F1B - G3B * F1A - G3A * F1A);
    }
    return d;
  };

  WeakCouplingTrack track;
  track.params = p;
  track.order = order;
  track.dt = dt;
  std::vector<cplx>* cols[11] = {&track.F1A, &track.F1B, &track.F3A, &track.F3B,
                                 &track.G3A, &track.G3B, &track.F5A, &track.F5B,
                                 &track.G5A, &track.G5B, &track.H4_conv};
  for (auto* c : cols) c->reserve(n + 1);

  State y = State::Zero();
  for (std::size_t k = 0;; ++k) {
    for (int i = 0; i < 11; ++i) cols[i]->push_back(y[i]);
    if (k == n) break;
    y = rk4_step(rhs, dt * static_cast<double>(k), y, dt);
    for (int i = 0; i < 11; ++i) {
      if (diverged(y[i])) {
        throw NumericalError(fmt::format("weak-coupling coefficients diverged at t = {:.6g}",
                                         dt * static_cast<double>(k + 1)));
      }
    }
  }
  return track;
}

WeakCouplingLattice integrate_weak_lattice(const ModelParams& p, int order, double dt, double T) {
  if (order != 1 && order != 3 && order != 5) throw ConfigError("weak-coupling order must be 1, 3 or 5");
  const std::size_t steps = grid_steps(dt, T);
  const std::size_t n = steps + 1;
  if (n > 4001) throw ConfigError("lattice route is limited to 4001 grid points");

  WeakCouplingLattice lat;
  lat.order = order;
  lat.dt = dt;
  lat.n = n;
  const std::size_t m = n * (n + 1) / 2;
  const double w = p.omega_s();
  const cplx rot = std::exp(kI * w * dt);
  auto tri = WeakCouplingLattice::tri;
  auto f1 = [&](std::size_t i, std::size_t j) {
    return std::exp(kI * w * dt * static_cast<double>(i - j));
  };
  auto alpha = [&](std::size_t i, std::size_t j) {
    return bath_correlation(dt * static_cast<double>(i), dt * static_cast<double>(j), p);
  };
  auto convolve = [&](auto&& fij, std::vector<cplx>& out) {
    out.assign(n, cplx{});
    for (std::size_t i = 1; i < n; ++i) {
      cplx acc = 0.5 * (alpha(i, 0) * fij(i, 0) + alpha(i, i) * fij(i, i));
      for (std::size_t j = 1; j < i; ++j) acc += alpha(i, j) * fij(i, j);
      out[i] = dt * acc;
    }
  };
  // Integrating-factor trapezoid for d f / dt = i w f + src(i, j), f(j, j) = 0.
  auto march = [&](std::vector<cplx>& f, auto&& src) {
    f.assign(m, cplx{});
    for (std::size_t j = 0; j < n; ++j) {
      for (std::size_t i = j; i + 1 < n; ++i) {
        f[tri(i + 1, j)] = rot * f[tri(i, j)] + 0.5 * dt * (rot * src(i, j) + src(i + 1, j));
      }
    }
  };

  convolve(f1, lat.F1A);
  lat.F1B = lat.F1A;
  if (order >= 3) {
    march(lat.f3A, [&](std::size_t i, std::size_t j) { return lat.F1A[i] * f1(i, j); });
    march(lat.f3B, [&](std::size_t i, std::size_t j) { return lat.F1B[i] * f1(i, j); });
    march(lat.g3A, [&](std::size_t i, std::size_t j) { return -f1(i, j) * lat.F1B[i]; });
    march(lat.g3B, [&](std::size_t i, std::size_t j) { return -f1(i, j) * lat.F1A[i]; });
    convolve([&](std::size_t i, std::size_t j) { return lat.f3A[tri(i, j)]; }, lat.F3A);
    convolve([&](std::size_t i, std::size_t j) { return lat.f3B[tri(i, j)]; }, lat.F3B);
    convolve([&](std::size_t i, std::size_t j) { return lat.g3A[tri(i, j)]; }, lat.G3A);
    convolve([&](std::size_t i, std::size_t j) { return lat.g3B[tri(i, j)]; }, lat.G3B);
  }
  if (order >= 5) {
    const cplx h4_rate = cplx(-p.gamma(), -p.Omega()) + 2.0 * kI * w;
    auto H4 = [&](std::size_t i, std::size_t j) {
      return 2.0 * (lat.G3A[j] + lat.G3B[j]) * std::exp(h4_rate * dt * static_cast<double>(i - j));
    };
    march(lat.f5A, [&](std::size_t i, std::size_t j) {
      const std::size_t k = tri(i, j);
      return -lat.F1A[i] * (lat.g3A[k] - lat.f3A[k]) + f1(i, j) * (lat.F3A[i] + lat.G3A[i]) -
             0.5 * H4(i, j);
    });
    march(lat.f5B, [&](std::size_t i, std::size_t j) {
      const std::size_t k = tri(i, j);
      return -lat.F1B[i] * (lat.g3B[k] - lat.f3B[k]) + f1(i, j) * (lat.F3B[i] + lat.G3B[i]) -
             0.5 * H4(i, j);
    });
    march(lat.g5A, [&](std::size_t i, std::size_t j) {
      const std::size_t k = tri(i, j);
      const cplx fa = f1(i, j), fb = f1(i, j);
      return -lat.F1B[i] * (lat.f3A[k] - lat.g3A[k]) - 0.5 * H4(i, j) -
             (lat.F3B[i] * fa - lat.G3A[i] * fa - lat.G3A[i] * fb - lat.G3B[i] * fb);
    });
    march(lat.g5B, [&](std::size_t i, std::size_t j) {
      const std::size_t k = tri(i, j);
      const cplx fa = f1(i, j), fb = f1(i, j);
      return -lat.F1A[i] * (lat.f3B[k] - lat.g3B[k]) - 0.5 * H4(i, j) -
             (lat.F3A[i] * fb - lat.G3B[i] * fb - lat.G3B[i] * fa - lat.G3A[i] * fa);
    });
    convolve([&](std::size_t i, std::size_t j) { return lat.f5A[tri(i, j)]; }, lat.F5A);
    convolve([&](std::size_t i, std::size_t j) { return lat.f5B[tri(i, j)]; }, lat.F5B);
    convolve([&](std::size_t i, std::size_t j) { return lat.g5A[tri(i, j)]; }, lat.G5A);
    convolve([&](std::size_t i, std::size_t j) { return lat.g5B[tri(i, j)]; }, lat.G5B);
  }
  return lat;
}

ModelKind parse_model_kind(std::string_view name) {
  if (name == "exact") return ModelKind::exact;
  if (name == "zeroth") return ModelKind::zeroth;
  if (name == "weak1") return ModelKind::weak1;
  if (name == "weak3") return ModelKind::weak3;
  if (name == "weak5") return ModelKind::weak5;
  throw ConfigError(fmt::format("invalid model '{}' (expected exact, zeroth, weak1, weak3 or weak5)", name));
}

std::string to_string(ModelKind kind) {
  switch (kind) {
    case ModelKind::exact: return "exact";
    case ModelKind::zeroth: return "zeroth";
    case ModelKind::weak1: return "weak1";
    case ModelKind::weak3: return "weak3";
    case ModelKind::weak5: return "weak5";
  }
  return "unknown";
}

int weak_order(ModelKind kind) {
  switch (kind) {
    case ModelKind::weak1: return 1;
    case ModelKind::weak3: return 3;
    case ModelKind::weak5: return 5;
    default: return 0;
  }
}

Operator4 OBarCoefficients::to_operator() const {
  return lower_A * ops::sigma_minus_A() + lower_B * ops::sigma_minus_B() +
         dressed_A * ops::sigma_z_A() * ops::sigma_minus_B() +
         dressed_B * ops::sigma_minus_A() * ops::sigma_z_B() + pair * ops::pair_lowering();
}

PureState4 OBarCoefficients::apply(const PureState4& psi) const {
  using namespace basis;
  PureState4 out;
  out[k11] = 0.0;
  out[k10] = (lower_B + dressed_A) * psi[k11];
  out[k01] = (lower_A + dressed_B) * psi[k11];
  out[k00] = (lower_A - dressed_B) * psi[k10] + (lower_B - dressed_A) * psi[k01] + pair * psi[k11];
  return out;
}

ModelTracks::ModelTracks(const ModelParams& p, ModelKind kind, double dt, double T)
    : params_(p), kind_(kind), dt_(dt) {
  switch (kind) {
    case ModelKind::exact:
      coeffs_ = integrate_exact_coeffs(p, dt, T);
      size_ = coeffs_->size();
      break;
    case ModelKind::zeroth:
      coeffs_ = integrate_zeroth_coeffs(p, dt, T);
      size_ = coeffs_->size();
      break;
    default:
      weak_ = integrate_weak_coupling(p, weak_order(kind), dt, T);
      size_ = weak_->size();
      break;
  }
}

cplx ModelTracks::noise_decay(std::size_t k) const {
  const auto& p = params_;
  if (kind_ == ModelKind::exact) {
    return cplx(-p.gamma(), 2.0 * p.omega_s() - p.Omega()) + 4.0 * p.lambda() * coeffs_->F1[k];
  }
  if (kind_ == ModelKind::weak5) return cplx(-p.gamma(), 2.0 * p.omega_s() - p.Omega());
  return 0.0;
}

cplx ModelTracks::noise_source(std::size_t k) const {
  if (kind_ == ModelKind::exact) return -4.0 * kI * coeffs_->F2[k];  // F3(t, t)
  if (kind_ == ModelKind::weak5) return weak_->H4_diag(k);
  return 0.0;
}

cplx ModelTracks::noise_prefactor() const {
  const double lam = params_.lambda();
  if (kind_ == ModelKind::exact) return kI * lam;
  if (kind_ == ModelKind::weak5) return lam * lam * lam * lam;
  return 0.0;
}

OBarCoefficients ModelTracks::o_bar(std::size_t k, cplx J) const {
  OBarCoefficients o;
  if (coeffs_) {
    o.lower_A = o.lower_B = coeffs_->F1[k];
    o.dressed_A = o.dressed_B = coeffs_->F2[k];
    if (kind_ == ModelKind::exact) o.pair = noise_prefactor() * J;
    return o;
  }
  const auto& w = *weak_;
  const double l1 = params_.lambda();
  const double l3 = l1 * l1 * l1;
  const double l5 = l3 * l1 * l1;
  o.lower_A = l1 * w.F1A[k];
  o.lower_B = l1 * w.F1B[k];
  if (w.order >= 3) {
    o.lower_A += l3 * w.F3A[k];
    o.lower_B += l3 * w.F3B[k];
    o.dressed_A = l3 * w.G3A[k];
    o.dressed_B = l3 * w.G3B[k];
  }
  if (w.order >= 5) {
    o.lower_A += l5 * w.F5A[k];
    o.lower_B += l5 * w.F5B[k];
    o.dressed_A += l5 * w.G5A[k];
    o.dressed_B += l5 * w.G5B[k];
    o.pair = noise_prefactor() * J;
  }
  return o;
}

Operator4 assemble_O_bar(const ModelTracks& tracks, cplx J, double t) {
  const double k = t / tracks.dt();
  const double kr = std::round(k);
  if (std::abs(k - kr) > 1e-9 * std::max(1.0, k) || kr < 0.0 ||
      kr > static_cast<double>(tracks.size() - 1)) {
    throw ConfigError(fmt::format("t = {} is outside the model track", t));
  }
  return tracks.o_bar(static_cast<std::size_t>(kr), J).to_operator();
}

namespace {
void put(std::ostream& os, cplx z) { os << fmt::format(",{:.17g},{:.17g}", z.real(), z.imag()); }
}  // namespace

void write_coeff_csv(std::ostream& os, const CoeffTrack& track) {
  os << "t,re_F1,im_F1,re_F2,im_F2,re_F3bar,im_F3bar\n";
  for (std::size_t k = 0; k < track.size(); ++k) {
    os << fmt::format("{:.17g}", track.time(k));
    put(os, track.F1[k]);
    put(os, track.F2[k]);
    put(os, track.F3bar[k]);
    os << '\n';
  }
}

void write_weak_csv(std::ostream& os, const WeakCouplingTrack& track) {
  os << "t";
  for (const char* name : {"F1A", "F1B", "F3A", "F3B", "G3A", "G3B", "F5A", "F5B", "G5A", "G5B", "H4conv"}) {
    os << ",re_" << name << ",im_" << name;
  }
  os << '\n';
  for (std::size_t k = 0; k < track.size(); ++k) {
    os << fmt::format("{:.17g}", track.time(k));
    for (const auto* col : {&track.F1A, &track.F1B, &track.F3A, &track.F3B, &track.G3A, &track.G3B,
                            &track.F5A, &track.F5B, &track.G5A, &track.G5B, &track.H4_conv}) {
      put(os, (*col)[k]);
    }
    os << '\n';
  }
}

}  // namespace nmqsd
