#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "nmqsd/coeffs.hpp"
#include "nmqsd/noise.hpp"

namespace nmqsd {

enum class Unraveling { nonlinear, linear };

/// State of one stochastic realization.
///
/// `M_shift` is the memory part of the shifted noise (nonlinear unraveling only),
/// `J_noise` the auxiliary noise integral of models with a noise channel, `W_kernel` the
/// deterministic kernel that carries later shift updates back into J (nonlinear only).
struct TrajectoryState {
  PureState4 psi = PureState4::Zero();
  cplx M_shift{};
  cplx J_noise{};
  cplx W_kernel{};
  double t = 0.0;
  std::size_t step = 0;
  cplx L_expect{};
  cplx L_dag_expect{};

  static TrajectoryState initial(const PureState4& psi0);
};

/// One midpoint step of the norm-preserving (nonlinear) equation with shifted noise.
/// Requires tracks.dt() == dt / 2 and a noise path on the same half-step grid.
/// Throws NumericalError on non-finite amplitudes.
TrajectoryState step_nonlinear(const TrajectoryState& state, const ModelTracks& tracks,
                               const NoisePath& noise, double dt);

/// One midpoint step of the linear equation driven by the raw noise; the norm is free.
TrajectoryState step_linear(const TrajectoryState& state, const ModelTracks& tracks,
                            const NoisePath& noise, double dt);

/// Propagates psi0 over the whole noise path, calling `observe` at step 0 and every
/// `stride` steps thereafter.
void run_trajectory(const PureState4& psi0, const ModelTracks& tracks, const NoisePath& noise,
                    Unraveling unraveling, std::size_t stride,
                    const std::function<void(const TrajectoryState&)>& observe);

/// CSV: t, re/im of the 4 amplitudes, norm.
void write_trajectory_csv(std::ostream& os, const std::vector<TrajectoryState>& states);

}  // namespace nmqsd
