#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include <nlohmann/json.hpp>

#include "nmqsd/trajectory.hpp"

namespace nmqsd {

struct EnsembleOptions {
  std::size_t n_traj = 1000;
  std::uint64_t seed = 1;
  double dt = 0.005;
  double T = 10.0;
  std::size_t stride = 1;
  unsigned threads = 0;  ///< 0 = hardware concurrency
  Unraveling unraveling = Unraveling::nonlinear;
  /// Fraction of aborted trajectories tolerated before the run fails.
  double max_abort_fraction = 1e-3;
};

/// Ensemble mean of |psi><psi| with element-wise standard errors
/// sqrt((E|x|^2 - |E x|^2) / n).
struct EnsembleEstimate {
  std::vector<double> t;
  std::vector<DensityMatrix4> rho;
  std::vector<Eigen::Matrix4d> stderr_;
  std::size_t n_traj = 0;     ///< trajectories that contributed
  std::size_t n_aborted = 0;  ///< trajectories dropped after a NumericalError
  std::uint64_t seed = 0;
};

/// Averages `opt.n_traj` trajectories. Trajectory i uses the noise path keyed by
/// (seed, i); trajectories are summed in fixed blocks combined by a fixed pairwise tree,
/// so the result is bit-identical for any thread count.
/// Throws NumericalError if more than max_abort_fraction of trajectories abort.
EnsembleEstimate run_ensemble(const PureState4& psi0, const ModelParams& p, ModelKind kind,
                              const EnsembleOptions& opt);

/// Same, with precomputed tracks (must be on the dt / 2 grid covering T).
EnsembleEstimate run_ensemble(const PureState4& psi0, const ModelTracks& tracks,
                              const EnsembleOptions& opt);

struct PhysicalityReport {
  double hermiticity = 0.0;
  double trace_deviation = 0.0;
  double min_eigenvalue = 0.0;
  bool ok(double tol = 1e-6) const;
};

PhysicalityReport rdm_physicality(const DensityMatrix4& rho);

/// CSV: t, re/im of the 16 entries (row-major), then 16 standard errors, then a
/// concurrence column when `concurrence` is non-empty.
void write_ensemble_csv(std::ostream& os, const EnsembleEstimate& est,
                        const std::vector<double>& concurrence = {});

/// CSV of a deterministic series with the same columns as write_ensemble_csv minus errors.
void write_rdm_csv(std::ostream& os, const std::vector<double>& t,
                   const std::vector<DensityMatrix4>& rho,
                   const std::vector<double>& concurrence = {});

}  // namespace nmqsd
