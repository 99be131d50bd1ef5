#pragma once

#include <nlohmann/json.hpp>

#include "nmqsd/types.hpp"

namespace nmqsd {

/// Physical constants of the two-qubit dissipative model (hbar = 1).
///
/// `delta` is always omega_s - Omega and the spectral weight Gamma is fixed
/// at 1; neither is accepted as an independent input.
class ModelParams {
 public:
  ModelParams() = default;
  ModelParams(double omega_s, double lambda, double gamma, double Omega);

  /// Convenience constructor from the detuning instead of the bath centre.
  static ModelParams from_detuning(double omega_s, double lambda, double gamma, double delta);

  double omega_s() const { return omega_s_; }
  double lambda() const { return lambda_; }
  double gamma() const { return gamma_; }
  double Omega() const { return Omega_; }
  double delta() const { return delta_; }
  static constexpr double Gamma() { return 1.0; }

  nlohmann::json to_json() const;
  /// Strict: unknown keys, missing keys and Gamma != 1 are rejected.
  static ModelParams from_json(const nlohmann::json& j);

 private:
  double omega_s_ = 1.0;
  double lambda_ = 1.0;
  double gamma_ = 0.5;
  double Omega_ = 0.0;
  double delta_ = 1.0;
};

namespace ops {
Operator4 sigma_minus_A();
Operator4 sigma_minus_B();
Operator4 sigma_z_A();
Operator4 sigma_z_B();
/// sigma_z^A sigma_-^B + sigma_-^A sigma_z^B
Operator4 dressed_lowering();
/// sigma_-^A sigma_-^B
Operator4 pair_lowering();
/// sigma_y (x) sigma_y in the global basis.
Operator4 spin_flip();
}  // namespace ops

/// H_s = (omega_s / 2)(sigma_z^A + sigma_z^B).
Operator4 build_hamiltonian(const ModelParams& p);

/// L = sigma_-^A + sigma_-^B.
Operator4 coupling_operator();

/// alpha(t, s) = (gamma / 2) exp(-gamma |t - s|) exp(-i Omega (t - s)).
cplx bath_correlation(double t, double s, const ModelParams& p);

/// Lorentzian J(omega) = (Gamma / pi) gamma^2 / ((omega - Omega)^2 + gamma^2).
double spectral_density(double omega, const ModelParams& p);

}  // namespace nmqsd
