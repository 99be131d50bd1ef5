#include "nmqsd/trajectory.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>

namespace nmqsd {

namespace {

using namespace basis;

PureState4 apply_L(const PureState4& v) {
  return {0.0, v[k11], v[k11], v[k10] + v[k01]};
}

PureState4 apply_L_dag(const PureState4& v) {
  return {v[k10] + v[k01], v[k00], v[k00], 0.0};
}

PureState4 apply_H(const PureState4& v, double w) { return {w * v[k11], 0.0, 0.0, -w * v[k00]}; }

// psi (4), M, J, W packed for the midpoint integrator.
//
// In the nonlinear unraveling the noise integral J must see the past noise shifted by the
// memory of <L^dagger> up to the current time, not only up to each past instant. The
// difference obeys a linear ODE whose source is lambda (gamma/2) <L^dagger>_t W(t), with
// W(t) = int_0^t ds K(t,s) e^{-(gamma + i Omega)(t - s)} and K the J kernel.
using Packed = Eigen::Matrix<cplx, 7, 1>;

struct Deriv {
  const ModelTracks& tracks;
  const NoisePath& noise;
  Unraveling unraveling;

  Packed operator()(std::size_t k, const Packed& y) const {
    const auto& p = tracks.params();
    const double lam = p.lambda();
    const PureState4 psi = y.head<4>();
    const cplx M = y[4];
    const cplx J = y[5];
    const cplx W = y[6];
    const cplx z_raw = noise.at(k);

    const OBarCoefficients o = tracks.o_bar(k, J);
    const PureState4 O_psi = o.apply(psi);
    const PureState4 LdO_psi = apply_L_dag(O_psi);
    const PureState4 L_psi = apply_L(psi);

    Packed d;
    if (unraveling == Unraveling::linear) {
      d.head<4>() = -kI * apply_H(psi, p.omega_s()) + lam * z_raw * L_psi - lam * LdO_psi;
      d[4] = 0.0;
      d[5] = tracks.has_noise_channel() ? tracks.noise_decay(k) * J + tracks.noise_source(k) * z_raw
                                        : cplx{};
      d[6] = 0.0;
      return d;
    }

    const double norm2 = psi.squaredNorm();
    const cplx L_exp = psi.dot(L_psi) / norm2;  // dot conjugates the first argument
    const cplx Ld_exp = std::conj(L_exp);
    const cplx O_exp = psi.dot(O_psi) / norm2;
    const cplx LdO_exp = psi.dot(LdO_psi) / norm2;
    const cplx z = z_raw + M;

    d.head<4>() = -kI * apply_H(psi, p.omega_s()) + lam * z * (L_psi - L_exp * psi) -
                  lam * ((LdO_psi - Ld_exp * O_psi) - (LdO_exp - Ld_exp * O_exp) * psi);
    d[4] = shift_rate(M, Ld_exp, p);
    if (tracks.has_noise_channel()) {
      const cplx decay = tracks.noise_decay(k);
      d[5] = decay * J + tracks.noise_source(k) * z + lam * 0.5 * p.gamma() * Ld_exp * W;
      d[6] = (decay - cplx(p.gamma(), p.Omega())) * W + tracks.noise_source(k);
    } else {
      d[5] = 0.0;
      d[6] = 0.0;
    }
    return d;
  }
};

void check_grid(const TrajectoryState& s, const ModelTracks& tracks, const NoisePath& noise,
                double dt) {
  if (std::abs(tracks.dt() - 0.5 * dt) > 1e-12 * dt) {
    throw ConfigError(fmt::format("model tracks use step {} but trajectory step {} needs {}",
                                  tracks.dt(), dt, 0.5 * dt));
  }
  if (std::abs(noise.dt - dt) > 1e-12 * dt) throw ConfigError("noise path step does not match dt");
  const std::size_t k_end = 2 * (s.step + 1);
  if (k_end >= tracks.size() || k_end >= noise.values.size()) {
    throw ConfigError(fmt::format("step {} runs past the end of the tracks or noise path", s.step));
  }
}

TrajectoryState step(const TrajectoryState& s, const ModelTracks& tracks, const NoisePath& noise,
                     double dt, Unraveling unraveling) {
  check_grid(s, tracks, noise, dt);
  const Deriv f{tracks, noise, unraveling};
  Packed y;
  y.head<4>() = s.psi;
  y[4] = s.M_shift;
  y[5] = s.J_noise;
  y[6] = s.W_kernel;
  const std::size_t k = 2 * s.step;
  const Packed k1 = f(k, y);
  const Packed k2 = f(k + 1, Packed(y + 0.5 * dt * k1));
  y += dt * k2;

  TrajectoryState out;
  out.psi = y.head<4>();
  out.M_shift = unraveling == Unraveling::nonlinear ? y[4] : cplx{};
  out.J_noise = tracks.has_noise_channel() ? y[5] : cplx{};
  out.W_kernel = tracks.has_noise_channel() && unraveling == Unraveling::nonlinear ? y[6] : cplx{};
  out.step = s.step + 1;
  out.t = dt * static_cast<double>(out.step);
  if (!out.psi.allFinite() || !std::isfinite(std::abs(out.M_shift)) ||
      !std::isfinite(std::abs(out.J_noise))) {
    throw NumericalError(fmt::format("trajectory {} aborted: non-finite state at step {} (t = {})",
                                     noise.traj_index, out.step, out.t));
  }
  const double n2 = out.psi.squaredNorm();
  if (unraveling == Unraveling::nonlinear) {
    if (!(n2 > 0.0)) throw NumericalError(fmt::format("trajectory collapsed to zero at step {}", out.step));
    out.psi /= std::sqrt(n2);
  }
  const double norm2 = out.psi.squaredNorm();
  out.L_expect = norm2 > 0.0 ? out.psi.dot(apply_L(out.psi)) / norm2 : cplx{};
  out.L_dag_expect = std::conj(out.L_expect);
  return out;
}

}  // namespace

TrajectoryState TrajectoryState::initial(const PureState4& psi0) {
  TrajectoryState s;
  s.psi = psi0;
  const double n2 = psi0.squaredNorm();
  s.L_expect = n2 > 0.0 ? psi0.dot(apply_L(psi0)) / n2 : cplx{};
  s.L_dag_expect = std::conj(s.L_expect);
  return s;
}

TrajectoryState step_nonlinear(const TrajectoryState& state, const ModelTracks& tracks,
                               const NoisePath& noise, double dt) {
  return step(state, tracks, noise, dt, Unraveling::nonlinear);
}

TrajectoryState step_linear(const TrajectoryState& state, const ModelTracks& tracks,
                            const NoisePath& noise, double dt) {
  return step(state, tracks, noise, dt, Unraveling::linear);
}

void run_trajectory(const PureState4& psi0, const ModelTracks& tracks, const NoisePath& noise,
                    Unraveling unraveling, std::size_t stride,
                    const std::function<void(const TrajectoryState&)>& observe) {
  if (stride == 0) throw ConfigError("output stride must be >= 1");
  TrajectoryState s = TrajectoryState::initial(psi0);
  observe(s);
  for (std::size_t n = 0; n < noise.steps; ++n) {
    s = step(s, tracks, noise, noise.dt, unraveling);
    if (s.step % stride == 0) observe(s);
  }
}

void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryState>& states) {
  os << "t,re_11,im_11,re_10,im_10,re_01,im_01,re_00,im_00,norm\n";
  for (const auto& s : states) {
    os << fmt::format("{:.17g}", s.t);
    for (int i = 0; i < 4; ++i) os << fmt::format(",{:.17g},{:.17g}", s.psi[i].real(), s.psi[i].imag());
    os << fmt::format(",{:.17g}\n", s.psi.norm());
  }
}

}  // namespace nmqsd
