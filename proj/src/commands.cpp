#include "nmqsd/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <sstream>

#include <fmt/format.h>

#include "nmqsd/deterministic.hpp"
#include "nmqsd/metrics.hpp"

namespace nmqsd {

namespace {

constexpr const char* kCsvSchema = "nmqsd-csv/1";

std::string output_base(std::string_view command, const RunConfig& cfg, const CommandContext& ctx,
                        std::string_view ext) {
  if (!ctx.output.empty()) return ctx.output;
  if (!cfg.output_path.empty()) return cfg.output_path;
  return fmt::format("{}.{}", command, ext);
}

std::string manifest_path(const std::string& out) {
  std::filesystem::path p(out);
  p.replace_extension(".manifest.json");
  return p.string();
}

std::ofstream open_out(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
  std::ofstream os(path, std::ios::binary);
  if (!os) throw ConfigError(fmt::format("cannot write '{}'", path));
  return os;
}

void write_manifest(std::string_view command, const nlohmann::json& doc, const RunConfig& cfg,
                    const std::string& out, nlohmann::json extra) {
  const std::string canonical = doc.dump();
  nlohmann::json m = {{"command", command},
                      {"csv_schema", kCsvSchema},
                      {"config_hash", git_blob_hash(canonical)},
                      {"config", doc},
                      {"params", cfg.params.to_json()},
                      {"seed", cfg.seed},
                      {"n_traj", cfg.n_traj},
                      {"dt", cfg.dt},
                      {"T", cfg.T},
                      {"output_stride", cfg.output_stride},
                      {"model", to_string(cfg.model)},
                      {"unraveling", cfg.unraveling == Unraveling::nonlinear ? "nonlinear" : "linear"},
                      {"initial_state", cfg.initial_state},
                      {"output", std::filesystem::path(out).filename().string()}};
  for (auto& [k, v] : extra.items()) m[k] = v;
  auto os = open_out(manifest_path(out));
  os << m.dump(2) << '\n';
}

EnsembleOptions ensemble_options(const RunConfig& cfg, unsigned threads) {
  EnsembleOptions o;
  o.n_traj = cfg.n_traj;
  o.seed = cfg.seed;
  o.dt = cfg.dt;
  o.T = cfg.T;
  o.stride = cfg.output_stride;
  o.threads = threads;
  o.unraveling = cfg.unraveling;
  return o;
}

int cmd_ensemble(const nlohmann::json& doc, const RunConfig& cfg, const CommandContext& ctx) {
  const EnsembleEstimate est = run_ensemble(cfg.psi0, cfg.params, cfg.model, ensemble_options(cfg, ctx.threads));
  const std::string out = output_base("ensemble", cfg, ctx, "csv");
  {
    auto os = open_out(out);
    write_ensemble_csv(os, est, concurrence_series(est.rho));
  }
  write_manifest("ensemble", doc, cfg, out, {{"n_completed", est.n_traj}, {"n_aborted", est.n_aborted}});
  return kExitOk;
}

int cmd_master(const nlohmann::json& doc, const RunConfig& cfg, const CommandContext& ctx) {
  const MasterResult res = integrate_master(cfg.rho0(), cfg.params, cfg.dt, cfg.T, cfg.output_stride);
  const std::string out = output_base("master", cfg, ctx, "csv");
  {
    auto os = open_out(out);
    write_rdm_csv(os, res.series.t, res.series.rho, concurrence_series(res.series.rho));
  }
  nlohmann::json extra = {{"solver", "master-zeroth"}};
  if (res.element_deviation) extra["element_crosscheck_max_deviation"] = *res.element_deviation;
  write_manifest("master", doc, cfg, out, extra);
  return kExitOk;
}

int cmd_analytic(const nlohmann::json& doc, const RunConfig& cfg, const CommandContext& ctx) {
  const DensityMatrix4 rho0 = cfg.rho0();
  if (!in_zero_11_family(rho0)) {
    throw ConfigError(fmt::format("analytic: initial state '{}' has |11> support", cfg.initial_state));
  }
  const std::size_t steps = step_count(cfg.dt, cfg.T);
  std::vector<double> t;
  std::vector<DensityMatrix4> rho;
  std::vector<double> c;
  for (std::size_t s = 0; s <= steps; s += cfg.output_stride) {
    const double ts = cfg.dt * static_cast<double>(s);
    t.push_back(ts);
    rho.push_back(analytic_rdm(rho0, ts, cfg.params));
    c.push_back(analytic_concurrence(rho0, ts, cfg.params));
  }
  const std::string out = output_base("analytic", cfg, ctx, "csv");
  {
    auto os = open_out(out);
    write_rdm_csv(os, t, rho, c);
  }
  write_manifest("analytic", doc, cfg, out, {{"solver", "closed-form"}});
  return kExitOk;
}

int cmd_steady(const nlohmann::json& doc, const RunConfig& cfg, const CommandContext& ctx) {
  const SteadyStateReport rep = steady_state(cfg.rho0(), cfg.params, cfg.t_ref, cfg.dt, cfg.horizon);
  const std::string out = output_base("steady", cfg, ctx, "json");
  {
    auto os = open_out(out);
    os << rep.to_json().dump(2) << '\n';
  }
  write_manifest("steady", doc, cfg, out, {{"solver", rep.closed_form ? "closed-form" : "master-long-time"}});
  return kExitOk;
}

int cmd_sweep(const nlohmann::json& doc, const RunConfig& cfg, const CommandContext& ctx) {
  if (!cfg.sweep.gamma && !cfg.sweep.delta) throw ConfigError("sweep: no axis given (sweep.gamma and/or sweep.delta)");
  const bool deterministic = cfg.n_traj == 0;
  if (deterministic && cfg.model != ModelKind::zeroth) {
    throw ConfigError(fmt::format("sweep: n_traj = 0 needs model zeroth, got {}", to_string(cfg.model)));
  }
  const std::vector<double> gammas = cfg.sweep.gamma.value_or(std::vector<double>{cfg.params.gamma()});
  const std::vector<double> deltas = cfg.sweep.delta.value_or(std::vector<double>{cfg.params.delta()});
  const std::string out = output_base("sweep", cfg, ctx, "csv");
  auto os = open_out(out);
  os << "gamma,delta,t,concurrence,fidelity,fidelity_lower,fidelity_upper\n";
  for (const double g : gammas) {
    for (const double d : deltas) {
      const ModelParams p = ModelParams::from_detuning(cfg.params.omega_s(), cfg.params.lambda(), g, d);
      const MasterResult ref = integrate_master(cfg.rho0(), p, cfg.dt, cfg.T, cfg.output_stride);
      if (deterministic) {
        const auto c = concurrence_series(ref.series.rho);
        for (std::size_t k = 0; k < ref.series.t.size(); ++k) {
          os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},1,1,1\n", g, d, ref.series.t[k], c[k]);
        }
        continue;
      }
      RunConfig point = cfg;
      point.params = p;
      const EnsembleEstimate est = run_ensemble(cfg.psi0, p, cfg.model, ensemble_options(point, ctx.threads));
      const auto c = concurrence_series(est.rho);
      const FidelitySeries f = fidelity_with_band(est, ref.series.rho);
      for (std::size_t k = 0; k < est.t.size(); ++k) {
        os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n", g, d, est.t[k], c[k],
                          f.F[k], f.lower[k], f.upper[k]);
      }
    }
  }
  os.close();
  write_manifest("sweep", doc, cfg, out,
                 {{"solver", deterministic ? "master-zeroth" : "ensemble"},
                  {"points", gammas.size() * deltas.size()}});
  return kExitOk;
}

int cmd_fidelity(const nlohmann::json& doc, const RunConfig& cfg, const CommandContext& ctx) {
  const FidelitySeries f = fidelity_compare(cfg, ctx.threads);
  const std::string out = output_base("fidelity", cfg, ctx, "csv");
  {
    auto os = open_out(out);
    os << "t,fidelity,fidelity_lower,fidelity_upper\n";
    for (std::size_t k = 0; k < f.t.size(); ++k) {
      os << fmt::format("{:.17g},{:.17g},{:.17g},{:.17g}\n", f.t[k], f.F[k], f.lower[k], f.upper[k]);
    }
  }
  const std::size_t i = f.argmin();
  write_manifest("fidelity", doc, cfg, out,
                 {{"min_fidelity", f.F[i]},
                  {"min_fidelity_t", f.t[i]},
                  {"min_fidelity_band", {f.lower[i], f.upper[i]}}});
  return kExitOk;
}

}  // namespace

std::size_t FidelitySeries::argmin() const {
  return static_cast<std::size_t>(std::min_element(F.begin(), F.end()) - F.begin());
}

std::vector<double> concurrence_series(const std::vector<DensityMatrix4>& rho) {
  std::vector<double> c;
  c.reserve(rho.size());
  for (const auto& r : rho) c.push_back(wootters_concurrence(r).value);
  return c;
}

FidelitySeries fidelity_with_band(const EnsembleEstimate& est,
                                  const std::vector<DensityMatrix4>& reference) {
  if (reference.size() != est.rho.size()) {
    throw ConfigError(fmt::format("fidelity: grids differ ({} vs {} points)", est.rho.size(), reference.size()));
  }
  FidelitySeries f;
  for (std::size_t k = 0; k < est.rho.size(); ++k) {
    const double F = fidelity(reference[k], est.rho[k]).value;
    const double D = std::min(1.0, 3.0 * est.stderr_[k].norm());
    const double widen = std::acos(1.0 - D);
    const double angle = std::acos(std::clamp(F, 0.0, 1.0));
    f.t.push_back(est.t[k]);
    f.F.push_back(F);
    f.lower.push_back(std::cos(std::min(0.5 * std::numbers::pi, angle + widen)));
    f.upper.push_back(std::cos(std::max(0.0, angle - widen)));
  }
  return f;
}

FidelitySeries fidelity_compare(const RunConfig& cfg, unsigned threads) {
  if (cfg.n_traj < kFidelityMinTrajectories) {
    throw ConfigError(fmt::format("fidelity: n_traj = {} is below the statistical floor of {}", cfg.n_traj,
                                  kFidelityMinTrajectories));
  }
  const EnsembleEstimate est = run_ensemble(cfg.psi0, cfg.params, ModelKind::exact, ensemble_options(cfg, threads));
  const MasterResult ref = integrate_master(cfg.rho0(), cfg.params, cfg.dt, cfg.T, cfg.output_stride);
  return fidelity_with_band(est, ref.series.rho);
}

int run_command(std::string_view command, const nlohmann::json& doc, const CommandContext& ctx) {
  std::ostream& log = ctx.log ? *ctx.log : std::cerr;
  try {
    const RunConfig cfg = RunConfig::from_json(doc);
    if (command == "ensemble") return cmd_ensemble(doc, cfg, ctx);
    if (command == "master") return cmd_master(doc, cfg, ctx);
    if (command == "analytic") return cmd_analytic(doc, cfg, ctx);
    if (command == "steady") return cmd_steady(doc, cfg, ctx);
    if (command == "sweep") return cmd_sweep(doc, cfg, ctx);
    if (command == "fidelity") return cmd_fidelity(doc, cfg, ctx);
    throw ConfigError(fmt::format("unknown command '{}'", command));
  } catch (const ConfigError& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const nlohmann::json::exception& e) {
    log << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericalError& e) {
    log << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  }
}

}  // namespace nmqsd
