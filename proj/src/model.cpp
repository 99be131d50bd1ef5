#include "nmqsd/model.hpp"

#include <cmath>
#include <numbers>

namespace nmqsd {

ModelParams::ModelParams(double omega_s, double lambda, double gamma, double Omega)
    : omega_s_(omega_s), lambda_(lambda), gamma_(gamma), Omega_(Omega), delta_(omega_s - Omega) {
  if (!std::isfinite(omega_s) || !std::isfinite(lambda) || !std::isfinite(gamma) ||
      !std::isfinite(Omega)) {
    throw ConfigError("model parameters must be finite");
  }
  if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0");
  if (lambda < 0.0) throw ConfigError("lambda must be >= 0");
}

ModelParams ModelParams::from_detuning(double omega_s, double lambda, double gamma, double delta) {
  return ModelParams(omega_s, lambda, gamma, omega_s - delta);
}

nlohmann::json ModelParams::to_json() const {
  return {{"omega_s", omega_s_}, {"lambda", lambda_}, {"gamma", gamma_}, {"Omega", Omega_}};
}

ModelParams ModelParams::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("params must be a JSON object");
  for (const auto& [key, value] : j.items()) {
    if (key == "Gamma") {
      if (!value.is_number() || value.get<double>() != 1.0) {
        throw ConfigError("Gamma is fixed to 1 and cannot be changed");
      }
      continue;
    }
    if (key == "delta") continue;  // derived; recomputed from omega_s - Omega
    if (key != "omega_s" && key != "lambda" && key != "gamma" && key != "Omega") {
      throw ConfigError("unknown params key '" + key + "'");
    }
    if (!value.is_number()) throw ConfigError("params." + key + " must be a number");
  }
  auto need = [&](const char* k) {
    if (!j.contains(k)) throw ConfigError(std::string("missing params key '") + k + "'");
    return j.at(k).get<double>();
  };
  return ModelParams(need("omega_s"), need("lambda"), need("gamma"), need("Omega"));
}

namespace ops {

namespace {
// Single-qubit operators in the (|1>, |0>) ordering used by the global basis.
Eigen::Matrix2cd lower1() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(1, 0) = 1.0;  // |1> -> |0>
  return m;
}
Eigen::Matrix2cd z1() {
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 0) = 1.0;
  m(1, 1) = -1.0;
  return m;
}
Eigen::Matrix2cd y1() {
  // sigma_y = -i|1><0| + i|0><1| with |1> excited.
  Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
  m(0, 1) = -kI;
  m(1, 0) = kI;
  return m;
}
Operator4 kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Operator4 out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}
}  // namespace

Operator4 sigma_minus_A() { return kron(lower1(), Eigen::Matrix2cd::Identity()); }
Operator4 sigma_minus_B() { return kron(Eigen::Matrix2cd::Identity(), lower1()); }
Operator4 sigma_z_A() { return kron(z1(), Eigen::Matrix2cd::Identity()); }
Operator4 sigma_z_B() { return kron(Eigen::Matrix2cd::Identity(), z1()); }
Operator4 dressed_lowering() { return sigma_z_A() * sigma_minus_B() + sigma_minus_A() * sigma_z_B(); }
Operator4 pair_lowering() { return sigma_minus_A() * sigma_minus_B(); }
Operator4 spin_flip() { return kron(y1(), y1()); }

}  // namespace ops

Operator4 build_hamiltonian(const ModelParams& p) {
  return 0.5 * p.omega_s() * (ops::sigma_z_A() + ops::sigma_z_B());
}

Operator4 coupling_operator() { return ops::sigma_minus_A() + ops::sigma_minus_B(); }

cplx bath_correlation(double t, double s, const ModelParams& p) {
  const double tau = t - s;
  return 0.5 * p.gamma() * std::exp(-p.gamma() * std::abs(tau)) *
         std::exp(cplx(0.0, -p.Omega() * tau));
}

double spectral_density(double omega, const ModelParams& p) {
  const double g = p.gamma();
  const double d = omega - p.Omega();
  return ModelParams::Gamma() / std::numbers::pi * g * g / (d * d + g * g);
}

}  // namespace nmqsd
