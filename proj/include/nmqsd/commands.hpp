#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "nmqsd/config.hpp"
#include "nmqsd/ensemble.hpp"

namespace nmqsd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

/// Minimum ensemble size accepted by the fidelity comparison.
inline constexpr std::size_t kFidelityMinTrajectories = 1000;

struct CommandContext {
  std::string output;    ///< overrides config.output_path when non-empty
  unsigned threads = 0;  ///< ensemble workers, 0 = auto
  std::ostream* log = nullptr;
};

/// Runs one of: ensemble, master, analytic, steady, sweep, fidelity. Maps ConfigError
/// (and malformed JSON) to exit 2 and NumericalError to exit 3; the message goes to ctx.log.
int run_command(std::string_view command, const nlohmann::json& config, const CommandContext& ctx);

/// Fidelity between an ensemble estimate and a reference series on the same grid, with a
/// conservative Monte Carlo band from the element standard errors.
struct FidelitySeries {
  std::vector<double> t;
  std::vector<double> F;
  std::vector<double> lower;
  std::vector<double> upper;

  std::size_t argmin() const;
};

/// Band: the Bures angle arccos F is a metric, so the true angle lies within
/// arccos(1 - D) of the estimate, with D = min(1, 3 sqrt(sum of squared element errors))
/// bounding the trace distance between estimate and true ensemble mean.
FidelitySeries fidelity_with_band(const EnsembleEstimate& est,
                                  const std::vector<DensityMatrix4>& reference);

/// Exact-model ensemble versus the zeroth-order master equation on the config grid.
/// Throws ConfigError when n_traj < kFidelityMinTrajectories.
FidelitySeries fidelity_compare(const RunConfig& cfg, unsigned threads);

/// Concurrence of each matrix in a series.
std::vector<double> concurrence_series(const std::vector<DensityMatrix4>& rho);

}  // namespace nmqsd
