#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "nmqsd/coeffs.hpp"
#include "nmqsd/trajectory.hpp"

namespace nmqsd {

/// Named initial states: "11", "10", "01", "00", "singlet", "triplet", "10+00",
/// "bell+", "bell-" (also spelled with U+2212).
PureState4 preset_state(const std::string& name);

/// Optional parameter axes for the sweep command. An axis that is present must be non-empty.
struct SweepAxes {
  std::optional<std::vector<double>> gamma;
  std::optional<std::vector<double>> delta;
};

/// Parsed run configuration. Every key except `params` has a default; unknown keys anywhere
/// are rejected.
///
/// `params` takes omega_s, lambda, gamma and either Omega or delta (= omega_s - Omega).
/// `initial_state` is a preset name or [re11, im11, re10, im10, re01, im01, re00, im00].
struct RunConfig {
  ModelParams params;
  std::string initial_state = "11";
  PureState4 psi0 = PureState4::Zero();
  ModelKind model = ModelKind::exact;
  Unraveling unraveling = Unraveling::nonlinear;
  double dt = 0.005;
  double T = 10.0;
  std::size_t n_traj = 1000;
  std::uint64_t seed = 1;
  std::size_t output_stride = 10;
  std::string output_path;
  double t_ref = 0.0;
  double horizon = 0.0;  ///< steady-state integration horizon, 0 = automatic
  SweepAxes sweep;

  DensityMatrix4 rho0() const { return psi0 * psi0.adjoint(); }

  static RunConfig from_json(const nlohmann::json& j);
};

/// Applies "a.b.c=value" to a JSON document. The value is parsed as JSON when possible and
/// kept as a string otherwise; intermediate objects are created as needed.
void apply_override(nlohmann::json& doc, const std::string& assignment);

/// Reads a JSON file (strict: no comments, no trailing content).
nlohmann::json read_config_file(const std::string& path);

/// Git blob hash: sha1("blob <size>\0" + content), lowercase hex.
std::string git_blob_hash(const std::string& content);

}  // namespace nmqsd
