#include "nmqsd/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "nmqsd/model.hpp"

namespace nmqsd {

double hermiticity_deviation(const DensityMatrix4& rho) {
  return (rho - rho.adjoint()).cwiseAbs().maxCoeff();
}

DensityMatrix4 psd_sqrt(const DensityMatrix4& rho) {
  const DensityMatrix4 h = 0.5 * (rho + rho.adjoint());
  Eigen::SelfAdjointEigenSolver<DensityMatrix4> es(h);
  const Eigen::Vector4d ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

MetricValue wootters_concurrence(const DensityMatrix4& rho) {
  const double dev = hermiticity_deviation(rho);
  if (dev > 1e-6) throw ConfigError(fmt::format("concurrence needs a Hermitian matrix (deviation {:.3g})", dev));
  const DensityMatrix4 h = 0.5 * (rho + rho.adjoint());
  // Eigenvalues of rho * rho~ equal those of sqrt(rho) rho~ sqrt(rho), which is Hermitian.
  const Operator4 yy = ops::spin_flip();
  const DensityMatrix4 flipped = yy * h.conjugate() * yy;
  const DensityMatrix4 s = psd_sqrt(h);
  const DensityMatrix4 m = s * flipped * s;
  Eigen::SelfAdjointEigenSolver<DensityMatrix4> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  std::array<double, 4> mu{};
  for (int i = 0; i < 4; ++i) mu[i] = std::max(0.0, es.eigenvalues()[i]);
  std::sort(mu.begin(), mu.end(), std::greater<>());
  const double c = std::sqrt(mu[0]) - std::sqrt(mu[1]) - std::sqrt(mu[2]) - std::sqrt(mu[3]);
  return {std::clamp(c, 0.0, 1.0), mu};
}

MetricValue fidelity(const DensityMatrix4& rho_a, const DensityMatrix4& rho_b) {
  for (const auto* r : {&rho_a, &rho_b}) {
    Eigen::SelfAdjointEigenSolver<DensityMatrix4> es(0.5 * (*r + r->adjoint()), Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -1e-6) {
      throw ConfigError(fmt::format("fidelity input has eigenvalue {:.3g} < -1e-6", es.eigenvalues().minCoeff()));
    }
  }
  const DensityMatrix4 s = psd_sqrt(rho_a);
  const DensityMatrix4 m = s * (0.5 * (rho_b + rho_b.adjoint())) * s;
  Eigen::SelfAdjointEigenSolver<DensityMatrix4> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  MetricValue out;
  double f = 0.0;
  for (int i = 0; i < 4; ++i) {
    const double e = std::max(0.0, es.eigenvalues()[i]);
    out.eigenvalues[i] = e;
    f += std::sqrt(e);
  }
  out.value = std::clamp(f, 0.0, 1.0);
  return out;
}

}  // namespace nmqsd
