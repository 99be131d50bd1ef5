#pragma once

#include <array>

#include "nmqsd/types.hpp"

namespace nmqsd {

/// A scalar figure of merit plus the eigenvalues it was computed from.
struct MetricValue {
  double value = 0.0;
  std::array<double, 4> eigenvalues{};
};

/// Eigenvalue floor applied before square roots.
inline constexpr double kClipThreshold = -1e-8;

/// Wootters concurrence max(0, sqrt(mu1) - sqrt(mu2) - sqrt(mu3) - sqrt(mu4)), mu the
/// decreasing eigenvalues of rho (sy x sy) rho* (sy x sy). Rejects input whose
/// Hermiticity deviation exceeds 1e-6.
MetricValue wootters_concurrence(const DensityMatrix4& rho);

/// Uhlmann fidelity Tr sqrt(sqrt(rho_a) rho_b sqrt(rho_a)). Rejects inputs with an
/// eigenvalue below -1e-6.
MetricValue fidelity(const DensityMatrix4& rho_a, const DensityMatrix4& rho_b);

/// Principal square root of a Hermitian PSD matrix, eigenvalues clipped at zero.
DensityMatrix4 psd_sqrt(const DensityMatrix4& rho);

double hermiticity_deviation(const DensityMatrix4& rho);

}  // namespace nmqsd
