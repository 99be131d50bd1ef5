#pragma once

#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "nmqsd/coeffs.hpp"

namespace nmqsd {

/// Time series of reduced density matrices.
struct RdmSeries {
  std::vector<double> t;
  std::vector<DensityMatrix4> rho;
};

struct MasterResult {
  RdmSeries series;
  /// Max element deviation between the matrix equation and the element-wise system, when
  /// the element system applies (no |11> support initially); otherwise empty.
  std::optional<double> element_deviation;
};

/// True when rho has no population or coherence involving |11> (tolerance `tol`).
bool in_zero_11_family(const DensityMatrix4& rho, double tol = 1e-12);

/// Fixed-step RK4 integration of
///   rho' = -i[H, rho] + lambda [L, rho Obar^dagger] + lambda [Obar rho, L^dagger]
/// with Obar from a noise-free model (zeroth by default; weak1/3/5 use the noise-free part
/// of their expansion). Output every `stride` steps, on the same grid as run_ensemble.
/// Throws NumericalError when the trace drifts by more than 1e-6 or an eigenvalue drops
/// below -1e-6.
MasterResult integrate_master(const DensityMatrix4& rho0, const ModelParams& p, double dt,
                              double T, std::size_t stride = 1,
                              ModelKind kind = ModelKind::zeroth);

/// Element-wise RDM system driven by X = F1 - F2 and Y = F1 + F2 of the zeroth-order track.
RdmSeries integrate_elements(const DensityMatrix4& rho0, const ModelParams& p, double dt,
                             double T, std::size_t stride = 1);

/// Closed-form RDM for initial states without |11> support. Throws ConfigError otherwise.
DensityMatrix4 analytic_rdm(const DensityMatrix4& rho0, double t, const ModelParams& p);

/// C(t) = 2 |rho_23(t)| from the closed-form R_23, I_23.
double analytic_concurrence(const DensityMatrix4& rho0, double t, const ModelParams& p);

struct SteadyStateReport {
  double r = 0.0;
  cplx x{};
  double t_ref = 0.0;
  DensityMatrix4 rho_inf = DensityMatrix4::Zero();
  double concurrence_inf = 0.0;
  /// Wootters concurrence of the long-time integrated state.
  double concurrence_integrated = 0.0;
  /// First time after which every interaction-picture element changes by less than
  /// 1e-4 per unit time; empty if not reached within the horizon.
  std::optional<double> tau_S;
  double horizon = 0.0;
  bool closed_form = false;

  nlohmann::json to_json() const;
};

/// Long-time RDM. Uses the closed-form r when rho0 is in the zero-|11> family, otherwise
/// r = rho_22 at the end of a long master-equation run. `T` <= 0 selects a horizon from
/// the slowest decay rate.
SteadyStateReport steady_state(const DensityMatrix4& rho0, const ModelParams& p, double t_ref,
                               double dt = 0.005, double T = 0.0);

/// Horizon used by steady_state when none is given.
double default_relaxation_horizon(const ModelParams& p);

/// Long-time RDM with population r and coherence x, rows/cols |11>,|10>,|01>,|00> with r and x.
DensityMatrix4 steady_form(double r, cplx x);

}  // namespace nmqsd
