#include "nmqsd/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <openssl/evp.h>

namespace nmqsd {

PureState4 preset_state(const std::string& name) {
  using namespace basis;
  const double h = 1.0 / std::sqrt(2.0);
  PureState4 v = PureState4::Zero();
  if (name == "11") v[k11] = 1.0;
  else if (name == "10") v[k10] = 1.0;
  else if (name == "01") v[k01] = 1.0;
  else if (name == "00") v[k00] = 1.0;
  else if (name == "singlet") { v[k10] = h; v[k01] = -h; }
  else if (name == "triplet") { v[k10] = h; v[k01] = h; }
  else if (name == "10+00") { v[k10] = h; v[k00] = h; }
  else if (name == "bell+") { v[k11] = h; v[k00] = h; }
  else if (name == "bell-" || name == "bell−") { v[k11] = h; v[k00] = -h; }
  else throw ConfigError(fmt::format("unknown initial_state preset '{}'", name));
  return v;
}

namespace {

double number(const nlohmann::json& j, const char* key) {
  if (!j.is_number()) throw ConfigError(fmt::format("'{}' must be a number", key));
  const double v = j.get<double>();
  if (!std::isfinite(v)) throw ConfigError(fmt::format("'{}' must be finite", key));
  return v;
}

std::uint64_t count(const nlohmann::json& j, const char* key) {
  if (!j.is_number_integer() || j.get<std::int64_t>() < 0) {
    throw ConfigError(fmt::format("'{}' must be a non-negative integer", key));
  }
  return j.get<std::uint64_t>();
}

ModelParams parse_params(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("'params' must be an object");
  nlohmann::json p = j;
  if (p.contains("delta")) {
    const double d = number(p.at("delta"), "params.delta");
    if (!p.contains("omega_s")) throw ConfigError("missing params key 'omega_s'");
    const double w = number(p.at("omega_s"), "params.omega_s");
    if (p.contains("Omega")) {
      const double om = number(p.at("Omega"), "params.Omega");
      if (std::abs(w - om - d) > 1e-12) {
        throw ConfigError("params.delta must equal omega_s - Omega when both are given");
      }
    } else {
      p["Omega"] = w - d;
    }
    p.erase("delta");
  }
  try {
    return ModelParams::from_json(p);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(fmt::format("invalid params: {}", e.what()));
  }
}

std::vector<double> axis(const nlohmann::json& j, const char* key) {
  if (!j.is_array()) throw ConfigError(fmt::format("sweep.{} must be a list", key));
  if (j.empty()) throw ConfigError(fmt::format("sweep.{} is empty", key));
  std::vector<double> v;
  for (const auto& x : j) v.push_back(number(x, key));
  return v;
}

}  // namespace

RunConfig RunConfig::from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  static const std::set<std::string> known{"params", "initial_state", "model", "unraveling", "dt",
                                           "T", "n_traj", "seed", "output_stride", "output_path",
                                           "t_ref", "horizon", "sweep"};
  for (const auto& [key, _] : j.items()) {
    if (!known.contains(key)) throw ConfigError(fmt::format("unknown config key '{}'", key));
  }
  if (!j.contains("params")) throw ConfigError("missing config key 'params'");

  RunConfig c;
  c.params = parse_params(j.at("params"));

  if (j.contains("initial_state")) {
    const auto& s = j.at("initial_state");
    if (s.is_string() || s.is_number_integer()) {
      // "10" and "11" arrive as integers from a bare --override initial_state=10.
      c.initial_state = s.is_string() ? s.get<std::string>() : std::to_string(s.get<std::int64_t>());
      c.psi0 = preset_state(c.initial_state);
    } else if (s.is_array()) {
      if (s.size() != 8) throw ConfigError("initial_state amplitude list needs 8 numbers");
      for (int i = 0; i < 4; ++i) {
        c.psi0[i] = cplx(number(s[2 * i], "initial_state"), number(s[2 * i + 1], "initial_state"));
      }
      const double n = c.psi0.norm();
      if (!(n > 0.0)) throw ConfigError("initial_state has zero norm");
      c.psi0 /= n;
      c.initial_state = "custom";
    } else {
      throw ConfigError("initial_state must be a preset name or an 8-number list");
    }
  } else {
    c.psi0 = preset_state(c.initial_state);
  }

  if (j.contains("model")) {
    if (!j.at("model").is_string()) throw ConfigError("'model' must be a string");
    c.model = parse_model_kind(j.at("model").get<std::string>());
  }
  if (j.contains("unraveling")) {
    const auto u = j.at("unraveling").is_string() ? j.at("unraveling").get<std::string>() : "";
    if (u == "nonlinear") c.unraveling = Unraveling::nonlinear;
    else if (u == "linear") c.unraveling = Unraveling::linear;
    else throw ConfigError("'unraveling' must be \"nonlinear\" or \"linear\"");
  }
  if (j.contains("dt")) c.dt = number(j.at("dt"), "dt");
  if (j.contains("T")) c.T = number(j.at("T"), "T");
  if (j.contains("n_traj")) c.n_traj = count(j.at("n_traj"), "n_traj");
  if (j.contains("seed")) c.seed = count(j.at("seed"), "seed");
  if (j.contains("output_stride")) c.output_stride = count(j.at("output_stride"), "output_stride");
  if (j.contains("output_path")) {
    if (!j.at("output_path").is_string()) throw ConfigError("'output_path' must be a string");
    c.output_path = j.at("output_path").get<std::string>();
  }
  if (j.contains("t_ref")) c.t_ref = number(j.at("t_ref"), "t_ref");
  if (j.contains("horizon")) c.horizon = number(j.at("horizon"), "horizon");
  if (j.contains("sweep")) {
    const auto& s = j.at("sweep");
    if (!s.is_object()) throw ConfigError("'sweep' must be an object");
    for (const auto& [key, value] : s.items()) {
      if (key == "gamma") c.sweep.gamma = axis(value, "gamma");
      else if (key == "delta") c.sweep.delta = axis(value, "delta");
      else throw ConfigError(fmt::format("unknown sweep axis '{}'", key));
    }
  }

  if (!(c.dt > 0.0)) throw ConfigError("dt must be > 0");
  if (!(c.T > 0.0)) throw ConfigError("T must be > 0");
  if (c.output_stride == 0) throw ConfigError("output_stride must be >= 1");
  if (c.horizon < 0.0) throw ConfigError("horizon must be >= 0");
  return c;
}

void apply_override(nlohmann::json& doc, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError(fmt::format("override '{}' is not of the form key=value", assignment));
  }
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value = nlohmann::json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;

  nlohmann::json* node = &doc;
  std::stringstream ss(path);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(ss, part, '.')) {
    if (part.empty()) throw ConfigError(fmt::format("override path '{}' has an empty segment", path));
    parts.push_back(part);
  }
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    if (!node->is_object()) throw ConfigError(fmt::format("override path '{}' crosses a non-object", path));
    node = &(*node)[parts[i]];
    if (node->is_null()) *node = nlohmann::json::object();
  }
  if (!node->is_object()) throw ConfigError(fmt::format("override path '{}' crosses a non-object", path));
  (*node)[parts.back()] = std::move(value);
}

nlohmann::json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open config '{}'", path));
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    return nlohmann::json::parse(buf.str());
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError(fmt::format("config '{}' is not valid JSON: {}", path, e.what()));
  }
}

std::string git_blob_hash(const std::string& content) {
  const std::string header = fmt::format("blob {}", content.size());
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha1(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size() + 1);  // includes the NUL
  EVP_DigestUpdate(ctx, content.data(), content.size());
  EVP_DigestFinal_ex(ctx, md, &len);
  EVP_MD_CTX_free(ctx);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) hex += fmt::format("{:02x}", md[i]);
  return hex;
}

}  // namespace nmqsd
