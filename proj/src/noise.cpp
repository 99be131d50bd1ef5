#include "nmqsd/noise.hpp"

#include <cmath>
#include <ostream>
#include <random>

#include <fmt/format.h>

namespace nmqsd {

std::size_t step_count(double dt, double T) {
  if (!(dt > 0.0) || !std::isfinite(dt)) throw ConfigError("dt must be > 0");
  if (!(T >= dt)) throw ConfigError("T must be >= dt");
  return static_cast<std::size_t>(std::llround(T / dt));
}

cplx NoisePath::at_time(double t) const {
  const double k = t / half_step();
  const double kr = std::round(k);
  if (std::abs(k - kr) > 1e-9 * std::max(1.0, std::abs(k)) || kr < 0.0 ||
      kr > static_cast<double>(values.size() - 1)) {
    throw ConfigError(fmt::format("t = {} is not on the half-step noise grid", t));
  }
  return values[static_cast<std::size_t>(kr)];
}

NoisePath NoisePath::coarsen(std::size_t factor) const {
  if (factor == 0 || steps % factor != 0) throw ConfigError("coarsening factor must divide steps");
  NoisePath out;
  out.dt = dt * static_cast<double>(factor);
  out.steps = steps / factor;
  out.seed = seed;
  out.traj_index = traj_index;
  out.values.reserve(2 * out.steps + 1);
  for (std::size_t k = 0; k <= 2 * out.steps; ++k) out.values.push_back(values[k * factor]);
  return out;
}

NoisePath sample_ou_path(const ModelParams& p, double dt, double T, std::uint64_t seed,
                         std::uint64_t traj_index) {
  if (!(p.gamma() > 0.0)) throw ConfigError("gamma must be > 0");
  NoisePath path;
  path.dt = dt;
  path.steps = step_count(dt, T);
  path.seed = seed;
  path.traj_index = traj_index;

  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(traj_index),
                    static_cast<std::uint32_t>(traj_index >> 32), 0x6e6d7173u};
  std::mt19937_64 rng(seq);
  std::normal_distribution<double> normal(0.0, 1.0);

  const double g = p.gamma();
  const double h = 0.5 * dt;
  const cplx decay = std::exp(cplx(-g * h, p.Omega() * h));
  // Per-component standard deviations: total variance gamma/2 split over re/im.
  const double sd_stat = std::sqrt(0.25 * g);
  const double sd_inc = std::sqrt(0.25 * g * (1.0 - std::exp(-2.0 * g * h)));

  const std::size_t n = 2 * path.steps + 1;
  path.values.resize(n);
  cplx z(sd_stat * normal(rng), sd_stat * normal(rng));
  path.values[0] = z;
  for (std::size_t k = 1; k < n; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    z = z * decay + cplx(sd_inc * re, sd_inc * im);
    path.values[k] = z;
  }
  return path;
}

cplx shift_rate(cplx M, cplx L_dag_expect, const ModelParams& p) {
  return -cplx(p.gamma(), -p.Omega()) * M + p.lambda() * 0.5 * p.gamma() * L_dag_expect;
}

ShiftAccumulator shift_update(const ShiftAccumulator& acc, cplx L_dag_expect, double dt,
                              const ModelParams& p) {
  const cplx k1 = shift_rate(acc.M, L_dag_expect, p);
  const cplx k2 = shift_rate(acc.M + 0.5 * dt * k1, L_dag_expect, p);
  return {acc.M + dt * k2, acc.t + dt};
}

cplx shifted_noise(const NoisePath& path, const ShiftAccumulator& acc, double t) {
  if (std::abs(acc.t - t) > 1e-9 * std::max(1.0, std::abs(t))) {
    throw ConfigError(fmt::format("shift accumulator is at t = {}, requested t = {}", acc.t, t));
  }
  return path.at_time(t) + acc.M;
}

void write_noise_csv(std::ostream& os, const NoisePath& path) {
  os << "t,re_zstar,im_zstar\n";
  for (std::size_t k = 0; k < path.values.size(); ++k) {
    const double t = path.half_step() * static_cast<double>(k);
    os << fmt::format("{:.17g},{:.17g},{:.17g}\n", t, path.values[k].real(),
                      path.values[k].imag());
  }
}

}  // namespace nmqsd
