#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "nmqsd/model.hpp"

namespace nmqsd {

/// One realization of the colored noise z*_t sampled on the half-step grid
/// t_k = k * dt / 2, k = 0 .. 2 * steps.
struct NoisePath {
  double dt = 0.0;
  std::size_t steps = 0;  ///< number of full integration steps covered
  std::uint64_t seed = 0;
  std::uint64_t traj_index = 0;
  std::vector<cplx> values;

  double half_step() const { return 0.5 * dt; }
  double horizon() const { return dt * static_cast<double>(steps); }
  /// z*_t at half-grid index k.
  cplx at(std::size_t k) const { return values.at(k); }
  /// z*_t at an arbitrary time; throws ConfigError if t is off the half-step grid.
  cplx at_time(double t) const;

  /// Keep every `factor`-th full step (the path for dt * factor).
  NoisePath coarsen(std::size_t factor) const;
};

/// Number of full steps for a horizon T at step dt (T is rounded to the grid).
std::size_t step_count(double dt, double T);

/// Exact OU half-step recursion z*_{t+h} = z*_t e^{-(gamma - i Omega) h} + xi, h = dt / 2,
/// started from the stationary law. Keyed by (seed, traj_index): bit-reproducible and
/// independent of generation order.
NoisePath sample_ou_path(const ModelParams& p, double dt, double T, std::uint64_t seed,
                         std::uint64_t traj_index);

/// Running memory integral for the shifted noise,
/// M(t) = lambda * int_0^t ds alpha*(t, s) <L^dagger>_s.
struct ShiftAccumulator {
  cplx M{0.0, 0.0};
  double t = 0.0;
};

/// Right-hand side of dM/dt = -(gamma - i Omega) M + lambda (gamma / 2) <L^dagger>_t.
cplx shift_rate(cplx M, cplx L_dag_expect, const ModelParams& p);

/// One midpoint step of the accumulator ODE with the source held at `L_dag_expect`.
ShiftAccumulator shift_update(const ShiftAccumulator& acc, cplx L_dag_expect, double dt,
                              const ModelParams& p);

/// z~*_t = z*_t + M(t). `t` must lie on the half-step grid and match acc.t.
cplx shifted_noise(const NoisePath& path, const ShiftAccumulator& acc, double t);

/// CSV columns: t, re_zstar, im_zstar.
void write_noise_csv(std::ostream& os, const NoisePath& path);

}  // namespace nmqsd
