#include "nmqsd/ensemble.hpp"

#include <atomic>
#include <cmath>
#include <map>
#include <mutex>
#include <ostream>
#include <thread>

#include <fmt/format.h>

namespace nmqsd {

namespace {

constexpr std::size_t kBlockSize = 64;

struct Accumulator {
  std::vector<DensityMatrix4> sum;
  std::vector<Eigen::Matrix4d> sum_sq;
  std::size_t count = 0;
  std::size_t aborted = 0;

  explicit Accumulator(std::size_t n_out)
      : sum(n_out, DensityMatrix4::Zero()), sum_sq(n_out, Eigen::Matrix4d::Zero()) {}

  void merge(const Accumulator& o) {
    for (std::size_t i = 0; i < sum.size(); ++i) {
      sum[i] += o.sum[i];
      sum_sq[i] += o.sum_sq[i];
    }
    count += o.count;
    aborted += o.aborted;
  }
};

// Pairwise combination in block order: a binary counter keeps at most log2(n) partials.
class PairwiseTree {
 public:
  void push(Accumulator acc) {
    std::size_t level = 0;
    while (!stack_.empty() && stack_.back().first == level) {
      stack_.back().second.merge(acc);
      acc = std::move(stack_.back().second);
      stack_.pop_back();
      ++level;
    }
    stack_.emplace_back(level, std::move(acc));
  }

  Accumulator finish(std::size_t n_out) {
    Accumulator total(n_out);
    for (auto it = stack_.rbegin(); it != stack_.rend(); ++it) {
      it->second.merge(total);
      total = std::move(it->second);
    }
    stack_.clear();
    return total;
  }

 private:
  std::vector<std::pair<std::size_t, Accumulator>> stack_;
};

}  // namespace

EnsembleEstimate run_ensemble(const PureState4& psi0, const ModelParams& p, ModelKind kind,
                              const EnsembleOptions& opt) {
  const std::size_t n = step_count(opt.dt, opt.T);
  const ModelTracks tracks(p, kind, 0.5 * opt.dt, opt.dt * static_cast<double>(n));
  return run_ensemble(psi0, tracks, opt);
}

EnsembleEstimate run_ensemble(const PureState4& psi0, const ModelTracks& tracks,
                              const EnsembleOptions& opt) {
  if (opt.n_traj == 0) throw ConfigError("n_traj must be >= 1");
  if (opt.stride == 0) throw ConfigError("stride must be >= 1");
  if (!(psi0.squaredNorm() > 0.0)) throw ConfigError("initial state has zero norm");
  const PureState4 psi_init = psi0.normalized();
  const std::size_t steps = step_count(opt.dt, opt.T);
  const std::size_t n_out = steps / opt.stride + 1;
  const ModelParams& p = tracks.params();

  const std::size_t n_blocks = (opt.n_traj + kBlockSize - 1) / kBlockSize;
  unsigned threads = opt.threads == 0 ? std::thread::hardware_concurrency() : opt.threads;
  threads = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(n_blocks)));

  std::atomic<std::size_t> next_block{0};
  std::mutex mu;
  std::map<std::size_t, Accumulator> pending;
  std::size_t next_merge = 0;
  PairwiseTree tree;
  std::exception_ptr failure;

  auto run_block = [&](std::size_t b) {
    Accumulator acc(n_out);
    const std::size_t lo = b * kBlockSize;
    const std::size_t hi = std::min(opt.n_traj, lo + kBlockSize);
    std::vector<DensityMatrix4> local(n_out);
    for (std::size_t i = lo; i < hi; ++i) {
      const NoisePath noise = sample_ou_path(p, opt.dt, opt.T, opt.seed, i);
      std::size_t out = 0;
      try {
        run_trajectory(psi_init, tracks, noise, opt.unraveling, opt.stride,
                       [&](const TrajectoryState& s) {
                         local[out++] = s.psi * s.psi.adjoint();
                       });
      } catch (const NumericalError&) {
        ++acc.aborted;
        continue;
      }
      for (std::size_t k = 0; k < n_out; ++k) {
        acc.sum[k] += local[k];
        acc.sum_sq[k] += local[k].cwiseAbs2();
      }
      ++acc.count;
    }
    return acc;
  };

  auto worker = [&] {
    for (;;) {
      const std::size_t b = next_block.fetch_add(1);
      if (b >= n_blocks) return;
      try {
        Accumulator acc = run_block(b);
        std::lock_guard lock(mu);
        pending.emplace(b, std::move(acc));
        while (!pending.empty() && pending.begin()->first == next_merge) {
          tree.push(std::move(pending.begin()->second));
          pending.erase(pending.begin());
          ++next_merge;
        }
      } catch (...) {
        std::lock_guard lock(mu);
        if (!failure) failure = std::current_exception();
        next_block.store(n_blocks);
        return;
      }
    }
  };

  if (threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (failure) std::rethrow_exception(failure);

  Accumulator total = tree.finish(n_out);
  const double abort_frac = static_cast<double>(total.aborted) / static_cast<double>(opt.n_traj);
  if (total.count == 0 || abort_frac > opt.max_abort_fraction) {
    throw NumericalError(fmt::format("{} of {} trajectories aborted (limit {:.3g}%)", total.aborted,
                                     opt.n_traj, 100.0 * opt.max_abort_fraction));
  }

  EnsembleEstimate est;
  est.n_traj = total.count;
  est.n_aborted = total.aborted;
  est.seed = opt.seed;
  const double inv = 1.0 / static_cast<double>(total.count);
  for (std::size_t k = 0; k < n_out; ++k) {
    est.t.push_back(opt.dt * static_cast<double>(k * opt.stride));
    const DensityMatrix4 mean = total.sum[k] * inv;
    const Eigen::Matrix4d var = (total.sum_sq[k] * inv - mean.cwiseAbs2()).cwiseMax(0.0);
    est.rho.push_back(mean);
    est.stderr_.push_back((var * inv).cwiseSqrt());
  }
  return est;
}

bool PhysicalityReport::ok(double tol) const {
  return hermiticity <= tol && trace_deviation <= tol && min_eigenvalue >= -tol;
}

PhysicalityReport rdm_physicality(const DensityMatrix4& rho) {
  PhysicalityReport r;
  r.hermiticity = (rho - rho.adjoint()).cwiseAbs().maxCoeff();
  r.trace_deviation = std::abs(rho.trace() - 1.0);
  Eigen::SelfAdjointEigenSolver<DensityMatrix4> es(0.5 * (rho + rho.adjoint()), Eigen::EigenvaluesOnly);
  r.min_eigenvalue = es.eigenvalues().minCoeff();
  return r;
}

namespace {

void rdm_header(std::ostream& os, bool with_err, bool with_c) {
  os << "t";
  for (int i = 1; i <= 4; ++i)
    for (int j = 1; j <= 4; ++j) os << fmt::format(",re_rho{}{},im_rho{}{}", i, j, i, j);
  if (with_err)
    for (int i = 1; i <= 4; ++i)
      for (int j = 1; j <= 4; ++j) os << fmt::format(",se_rho{}{}", i, j);
  if (with_c) os << ",concurrence";
  os << '\n';
}

void rdm_row(std::ostream& os, double t, const DensityMatrix4& r) {
  os << fmt::format("{:.17g}", t);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) os << fmt::format(",{:.17g},{:.17g}", r(i, j).real(), r(i, j).imag());
}

}  // namespace

void write_ensemble_csv(std::ostream& os, const EnsembleEstimate& est,
                        const std::vector<double>& concurrence) {
  rdm_header(os, true, !concurrence.empty());
  for (std::size_t k = 0; k < est.t.size(); ++k) {
    rdm_row(os, est.t[k], est.rho[k]);
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) os << fmt::format(",{:.17g}", est.stderr_[k](i, j));
    if (!concurrence.empty()) os << fmt::format(",{:.17g}", concurrence.at(k));
    os << '\n';
  }
}

void write_rdm_csv(std::ostream& os, const std::vector<double>& t,
                   const std::vector<DensityMatrix4>& rho,
                   const std::vector<double>& concurrence) {
  rdm_header(os, false, !concurrence.empty());
  for (std::size_t k = 0; k < t.size(); ++k) {
    rdm_row(os, t[k], rho[k]);
    if (!concurrence.empty()) os << fmt::format(",{:.17g}", concurrence.at(k));
    os << '\n';
  }
}

}  // namespace nmqsd
