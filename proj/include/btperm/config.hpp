// SPDX-License-Identifier: Apache-2.0
#pragma once

// Flat key=value run configuration. Parsing is strict: every key must belong
// to the schema below, values are typed, and each command validates the full
// config before any side effect.

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "btperm/common.hpp"
#include "btperm/inversion.hpp"
#include "btperm/optimizer.hpp"
#include "btperm/permeability.hpp"
#include "btperm/shapes.hpp"

namespace btperm {

namespace detail {

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<double> parse_numbers(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::istringstream in(value);
  double x;
  while (in >> x) out.push_back(x);
  if (!in.eof()) throw ConfigError(key + ": malformed number list '" + value + "'");
  return out;
}

inline Eigen::Vector3d parse_vec3(const std::string& key, const std::string& value) {
  const auto nums = parse_numbers(key, value);
  if (nums.size() != 3) throw ConfigError(key + ": expected 3 numbers");
  return {nums[0], nums[1], nums[2]};
}

// "x y z; x y z; ..."
inline std::vector<Eigen::Vector3d> parse_vec3_list(const std::string& key,
                                                    const std::string& value) {
  std::vector<Eigen::Vector3d> out;
  std::string chunk;
  std::istringstream in(value);
  while (std::getline(in, chunk, ';')) {
    chunk = trim(chunk);
    if (chunk.empty()) continue;
    out.push_back(parse_vec3(key, chunk));
  }
  if (out.empty()) throw ConfigError(key + ": empty vector list");
  return out;
}

} // namespace detail

struct RunConfig {
  // grid
  int grid_n = 10;
  double half_extent = 13.6;

  // physics
  double diffusivity = 2.0; // um^2/ms
  double t2 = units::kInfiniteT2;
  double rho = 1.0;

  // permeability bounds and extraction threshold (mm/ms)
  SigmoidReparam reparam;
  double threshold = 1e-3;

  // protocol generation
  std::vector<Eigen::Vector3d> directions = default_directions();
  std::vector<double> bvalues = {0, 1000, 2000, 3000, 4000, 5000}; // s/mm^2
  double delta = 10.0;
  std::vector<double> Deltas = {20.0, 60.0};

  // optimization
  double eta0 = 0.75;
  int cycle = 200;
  int warmup = 50;
  double alpha = 0.1;
  double lambda_data = 100.0;
  double lambda_cont = 2.0;
  double lambda_man_max = 2.0;
  int lambda_man_ramp = 400;
  int t_switch = 200;
  int iters = 400;
  int neig = 60;
  int refresh_n = 50;
  double tau_sigma = 1.0;
  double tau_p = 0.5;
  double tau_m = 0.5;
  // Center of the soft barrier indicator in log10 kappa; NaN = log10(threshold).
  double p_non_center = std::numeric_limits<double>::quiet_NaN();
  unsigned seed = 0;
  ScheduleMode schedule = ScheduleMode::Staged;
  double eig_tol = 1e-8;

  // run
  std::string case_name = "case";
  int workers = 0; // 0 = all hardware threads

  // paths
  std::string mesh_path = "mesh.txt";
  std::string protocol_path = "protocol.txt";
  std::string signals_path = "signals.txt";
  std::string field_path = "field.txt";
  std::string interface_path = "interface.txt";
  std::string out_dir = "out";
  std::string ref_interface_path;

  // phantom shape (optional)
  bool has_shape = false;
  ShapeSpec shape;

  InversionSettings inversion_settings() const {
    InversionSettings s;
    s.iters = iters;
    s.t_switch = t_switch;
    s.schedule = schedule;
    s.eta0 = eta0;
    s.cycle = cycle;
    s.warmup = warmup;
    s.alpha = alpha;
    s.objective.lambda_data = lambda_data;
    s.objective.lambda_cont = lambda_cont;
    s.objective.lambda_man_max = lambda_man_max;
    s.objective.lambda_man_ramp = lambda_man_ramp;
    s.objective.tau_p = tau_p;
    s.objective.tau_m = tau_m;
    s.objective.k_thr =
        std::isnan(p_non_center) ? std::log10(threshold) : p_non_center;
    s.reparam = reparam;
    s.reparam.tau_sigma = tau_sigma;
    s.neig = neig;
    s.refresh_n = refresh_n;
    s.rho = rho;
    s.seed = seed;
    s.workers = resolve_workers(workers);
    s.eig_tol = eig_tol;
    return s;
  }

  Protocol build_protocol() const { return make_protocol(directions, bvalues, delta, Deltas); }

  static RunConfig from_file(const std::string& path);
  static RunConfig from_map(const std::map<std::string, std::string>& kv);
};

namespace detail {

inline std::map<std::string, std::string> parse_key_value_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    if (!kv.emplace(key, value).second)
      throw ConfigError("config line " + std::to_string(line_no) + ": duplicate key " + key);
  }
  return kv;
}

inline ShapeSpec parse_shape(const std::map<std::string, std::string>& kv,
                             const std::string& prefix, std::set<std::string>& consumed);

inline ShapeSpec parse_shape_fields(const std::map<std::string, std::string>& kv,
                                    const std::string& prefix, const std::string& kind,
                                    std::set<std::string>& consumed) {
  auto get = [&](const std::string& suffix) -> const std::string* {
    const auto it = kv.find(prefix + suffix);
    if (it == kv.end()) return nullptr;
    consumed.insert(it->first);
    return &it->second;
  };
  auto require = [&](const std::string& suffix) -> const std::string& {
    const std::string* v = get(suffix);
    if (!v) throw ConfigError("missing config key: " + prefix + suffix);
    return *v;
  };

  ShapeSpec s;
  s.kind = shape_kind_from_string(kind);
  switch (s.kind) {
    case ShapeKind::Sphere:
      s.radius = std::stod(require("radius"));
      if (const auto* v = get("center")) s.center = parse_vec3(prefix + "center", *v);
      break;
    case ShapeKind::Cylinder:
      s.radius = std::stod(require("radius"));
      s.p0 = parse_vec3(prefix + "p0", require("p0"));
      s.p1 = parse_vec3(prefix + "p1", require("p1"));
      break;
    case ShapeKind::BentCylinder:
      s.radius = std::stod(require("radius"));
      s.points = parse_vec3_list(prefix + "points", require("points"));
      break;
    case ShapeKind::Torus:
      s.radius = std::stod(require("radius"));
      s.major_radius = std::stod(require("major_radius"));
      if (const auto* v = get("center")) s.center = parse_vec3(prefix + "center", *v);
      if (const auto* v = get("axis")) s.axis = parse_vec3(prefix + "axis", *v);
      break;
    case ShapeKind::Union: {
      const int count = std::stoi(require("members"));
      if (count < 1) throw ConfigError(prefix + "members: must be >= 1");
      for (int i = 0; i < count; ++i)
        s.members.push_back(parse_shape(kv, prefix + std::to_string(i) + "_", consumed));
      break;
    }
  }
  return s;
}

inline ShapeSpec parse_shape(const std::map<std::string, std::string>& kv,
                             const std::string& prefix, std::set<std::string>& consumed) {
  const auto it = kv.find(prefix + "kind");
  if (it == kv.end()) throw ConfigError("missing config key: " + prefix + "kind");
  consumed.insert(it->first);
  return parse_shape_fields(kv, prefix, it->second, consumed);
}

} // namespace detail

inline RunConfig RunConfig::from_map(const std::map<std::string, std::string>& kv) {
  RunConfig cfg;
  std::set<std::string> consumed;
  auto get = [&](const std::string& key) -> const std::string* {
    const auto it = kv.find(key);
    if (it == kv.end()) return nullptr;
    consumed.insert(key);
    return &it->second;
  };
  auto get_double = [&](const std::string& key, double& target) {
    if (const auto* v = get(key)) {
      try {
        target = std::stod(*v);
      } catch (const std::exception&) {
        throw ConfigError(key + ": malformed number '" + *v + "'");
      }
    }
  };
  auto get_int = [&](const std::string& key, int& target) {
    if (const auto* v = get(key)) {
      try {
        target = std::stoi(*v);
      } catch (const std::exception&) {
        throw ConfigError(key + ": malformed integer '" + *v + "'");
      }
    }
  };
  auto get_string = [&](const std::string& key, std::string& target) {
    if (const auto* v = get(key)) target = *v;
  };

  get_int("grid_n", cfg.grid_n);
  get_double("half_extent", cfg.half_extent);
  get_double("diffusivity", cfg.diffusivity);
  if (const auto* v = get("t2"))
    cfg.t2 = (*v == "inf" || *v == "infinity") ? units::kInfiniteT2 : std::stod(*v);
  get_double("rho", cfg.rho);
  get_double("kappa_log10_min", cfg.reparam.k_min);
  get_double("kappa_log10_max", cfg.reparam.k_max);
  get_double("threshold", cfg.threshold);

  if (const auto* v = get("directions"))
    cfg.directions = detail::parse_vec3_list("directions", *v);
  if (const auto* v = get("bvalues")) cfg.bvalues = detail::parse_numbers("bvalues", *v);
  get_double("delta", cfg.delta);
  if (const auto* v = get("Deltas")) cfg.Deltas = detail::parse_numbers("Deltas", *v);

  get_double("eta0", cfg.eta0);
  get_int("cycle", cfg.cycle);
  get_int("warmup", cfg.warmup);
  get_double("alpha", cfg.alpha);
  get_double("lambda_data", cfg.lambda_data);
  get_double("lambda_cont", cfg.lambda_cont);
  get_double("lambda_man_max", cfg.lambda_man_max);
  get_int("lambda_man_ramp", cfg.lambda_man_ramp);
  get_int("t_switch", cfg.t_switch);
  get_int("iters", cfg.iters);
  get_int("neig", cfg.neig);
  get_int("refresh_n", cfg.refresh_n);
  get_double("tau_sigma", cfg.tau_sigma);
  cfg.reparam.tau_sigma = cfg.tau_sigma;
  get_double("tau_p", cfg.tau_p);
  get_double("tau_m", cfg.tau_m);
  get_double("p_non_center", cfg.p_non_center);
  if (const auto* v = get("seed")) cfg.seed = static_cast<unsigned>(std::stoul(*v));
  if (const auto* v = get("schedule")) cfg.schedule = schedule_mode_from_string(*v);
  get_double("eig_tol", cfg.eig_tol);

  get_string("case", cfg.case_name);
  get_int("workers", cfg.workers);

  get_string("mesh_path", cfg.mesh_path);
  get_string("protocol_path", cfg.protocol_path);
  get_string("signals_path", cfg.signals_path);
  get_string("field_path", cfg.field_path);
  get_string("interface_path", cfg.interface_path);
  get_string("out_dir", cfg.out_dir);
  get_string("ref_interface_path", cfg.ref_interface_path);

  if (kv.count("shape_kind")) {
    cfg.has_shape = true;
    cfg.shape = detail::parse_shape(kv, "shape_", consumed);
  }

  for (const auto& [key, value] : kv)
    if (!consumed.count(key)) throw ConfigError("unknown config key: " + key);

  if (cfg.grid_n < 1) throw ConfigError("grid_n must be >= 1");
  if (!(cfg.half_extent > 0)) throw ConfigError("half_extent must be positive");
  if (cfg.iters < 1) throw ConfigError("iters must be >= 1");
  if (cfg.neig < 1) throw ConfigError("neig must be >= 1");
  if (cfg.refresh_n < 1) throw ConfigError("refresh_n must be >= 1");
  if (!(cfg.threshold > std::pow(10.0, cfg.reparam.k_min) &&
        cfg.threshold < std::pow(10.0, cfg.reparam.k_max)))
    throw ConfigError("threshold must lie strictly inside the permeability range");
  return cfg;
}

inline RunConfig RunConfig::from_file(const std::string& path) {
  return from_map(detail::parse_key_value_file(path));
}

} // namespace btperm
