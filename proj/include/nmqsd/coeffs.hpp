#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "nmqsd/model.hpp"

namespace nmqsd {

/// Magnitude above which a coefficient integration is declared divergent.
inline constexpr double kDivergenceThreshold = 1e6;

/// O-operator coefficients F1, F2 and F3bar on a uniform grid t_k = k * dt.
struct CoeffTrack {
  enum class Mode { exact, zeroth };

  Mode mode = Mode::exact;
  ModelParams params;
  double dt = 0.0;
  std::vector<cplx> F1, F2, F3bar;

  std::size_t size() const { return F1.size(); }
  double time(std::size_t k) const { return dt * static_cast<double>(k); }
  double horizon() const { return time(size() - 1); }
  cplx X(std::size_t k) const { return F1[k] - F2[k]; }
  cplx Y(std::size_t k) const { return F1[k] + F2[k]; }
  /// Grid index of t; throws ConfigError when t is off-grid or outside the track.
  std::size_t index_of(double t) const;
};

/// Fixed-step RK4 integration of the coupled F1, F2, F3bar system from zero
/// initial values. Throws NumericalError naming the first time at which any
/// coefficient exceeds kDivergenceThreshold.
CoeffTrack integrate_exact_coeffs(const ModelParams& p, double dt, double T);

/// Same system with F3bar forced to zero (noise kernel disabled).
CoeffTrack integrate_zeroth_coeffs(const ModelParams& p, double dt, double T);

/// Re-integrates `track`'s parameters and grid in zeroth-order mode.
CoeffTrack truncate_zeroth(const CoeffTrack& track);

/// Right-hand side of the coefficient system; exposed for residual checks.
/// `zeroth` drops the F3bar feedback and its equation.
void coeff_rhs(const ModelParams& p, bool zeroth, const cplx F[3], cplx dF[3]);

/// beta = sqrt(4 lambda^2 gamma - gamma^2 + 2 i gamma Delta + Delta^2) with Im(beta) >= 0,
/// c = arctan((i Delta - gamma) / beta).
struct ClosedFormParams {
  cplx beta;
  cplx c;
  static ClosedFormParams from(const ModelParams& p);
};

/// X(t) = F1 - F2 in zeroth order: (gamma - i Delta + beta tan(beta t / 2 + c)) / (4 lambda).
/// Falls back to direct Riccati integration when the closed form is non-finite or
/// exceeds kDivergenceThreshold. Requires lambda > 0.
cplx closed_form_X(double t, const ModelParams& p);

/// A(t) = exp(-2 lambda int_0^t X) = e^{(-gamma + i Delta) t / 2} cos(beta t / 2 + c) / cos(c).
/// Requires lambda > 0.
cplx closed_form_A(double t, const ModelParams& p);

/// Stable root of 2 lambda X^2 + (i Delta - gamma) X + lambda gamma / 2 = 0.
cplx steady_X(const ModelParams& p);

/// Riccati ODE route for X (RK4 with step <= h_max).
cplx riccati_X(double t, const ModelParams& p, double h_max = 1e-3);

/// Linear second-order ODE route for A: A'' = (i Delta - gamma) A' - lambda^2 gamma A.
cplx linear_ode_A(double t, const ModelParams& p, double h_max = 1e-3);

/// F3(t, v) = -4 i F2(v) exp(int_v^t ds (-gamma + 2 i omega_s - i Omega + 4 lambda F1(s))),
/// exponent by the trapezoidal rule on the track grid.
cplx f3_kernel(double t, double v, const CoeffTrack& track);

/// Weak-coupling coefficient convolutions F_n^j(t) = int_0^t alpha(t,s) f_n^j(t,s) ds and
/// G_n^j likewise, for j = A, B and n = 1, 3, 5, on a uniform grid.
///
/// The two-time functions obey linear ODEs in t whose alpha-convolutions close among
/// themselves (the boundary terms vanish for n > 1), so the track integrates the
/// convolutions directly. `H4_conv` is int_0^t alpha(t,s) H4'(t,s) ds and `H4_diag`
/// is H4'(t,t) = 2 (G3^A + G3^B).
struct WeakCouplingTrack {
  ModelParams params;
  int order = 1;
  double dt = 0.0;
  std::vector<cplx> F1A, F1B, F3A, F3B, G3A, G3B, F5A, F5B, G5A, G5B, H4_conv;

  std::size_t size() const { return F1A.size(); }
  double time(std::size_t k) const { return dt * static_cast<double>(k); }
  cplx H4_diag(std::size_t k) const { return 2.0 * (G3A[k] + G3B[k]); }
};

WeakCouplingTrack integrate_weak_coupling(const ModelParams& p, int order, double dt, double T);

/// Closed-form first-order convolution (gamma/2)(1 - e^{-(gamma - i Delta) t}) / (gamma - i Delta).
cplx weak_F1_closed(double t, const ModelParams& p);

/// Two-time lattice route for the weak-coupling hierarchy: f_n^j(t,s) stored for all
/// s <= t, convolutions by trapezoidal quadrature in s. Memory O((T/dt)^2); meant for
/// structural checks and cross-validation of WeakCouplingTrack at modest grid sizes.
struct WeakCouplingLattice {
  int order = 1;
  double dt = 0.0;
  std::size_t n = 0;  ///< grid points
  // Row-major lower triangle: entry (i, j) with j <= i at i * (i + 1) / 2 + j.
  std::vector<cplx> f3A, f3B, g3A, g3B, f5A, f5B, g5A, g5B;
  std::vector<cplx> F1A, F1B, F3A, F3B, G3A, G3B, F5A, F5B, G5A, G5B;

  static std::size_t tri(std::size_t i, std::size_t j) { return i * (i + 1) / 2 + j; }
};

WeakCouplingLattice integrate_weak_lattice(const ModelParams& p, int order, double dt, double T);

/// Which O-operator enters the trajectory equation.
enum class ModelKind { exact, zeroth, weak1, weak3, weak5 };

ModelKind parse_model_kind(std::string_view name);
std::string to_string(ModelKind kind);
int weak_order(ModelKind kind);  ///< 0 for exact / zeroth

/// Coefficients of O-bar on the operator basis
/// {sigma_-^A, sigma_-^B, sigma_z^A sigma_-^B, sigma_-^A sigma_z^B, sigma_-^A sigma_-^B}.
struct OBarCoefficients {
  cplx lower_A{}, lower_B{}, dressed_A{}, dressed_B{}, pair{};
  Operator4 to_operator() const;
  /// O-bar applied to psi without forming the matrix.
  PureState4 apply(const PureState4& psi) const;
};

/// Coefficient tracks for one model at one parameter set, shared read-only by trajectories.
///
/// For models with a noise channel (exact, weak5) the trajectory carries an auxiliary
/// integral J(t) = int_0^t K(t,v) z~*_v dv obeying dJ/dt = decay(t) J + source(t) z~*_t,
/// and O-bar gains noise_prefactor * J on sigma_-^A sigma_-^B.
class ModelTracks {
 public:
  ModelTracks(const ModelParams& p, ModelKind kind, double dt, double T);

  ModelKind kind() const { return kind_; }
  const ModelParams& params() const { return params_; }
  double dt() const { return dt_; }
  std::size_t size() const { return size_; }
  double time(std::size_t k) const { return dt_ * static_cast<double>(k); }

  bool has_noise_channel() const { return kind_ == ModelKind::exact || kind_ == ModelKind::weak5; }
  cplx noise_decay(std::size_t k) const;
  cplx noise_source(std::size_t k) const;
  cplx noise_prefactor() const;

  OBarCoefficients o_bar(std::size_t k, cplx J) const;

  const std::optional<CoeffTrack>& coeffs() const { return coeffs_; }
  const std::optional<WeakCouplingTrack>& weak() const { return weak_; }

 private:
  ModelParams params_;
  ModelKind kind_;
  double dt_;
  std::size_t size_ = 0;
  std::optional<CoeffTrack> coeffs_;
  std::optional<WeakCouplingTrack> weak_;
};

/// O-bar at grid time t. For models without a noise channel J is ignored.
Operator4 assemble_O_bar(const ModelTracks& tracks, cplx J, double t);

/// CSV: t, then re/im of every stored coefficient.
void write_coeff_csv(std::ostream& os, const CoeffTrack& track);
void write_weak_csv(std::ostream& os, const WeakCouplingTrack& track);

}  // namespace nmqsd
