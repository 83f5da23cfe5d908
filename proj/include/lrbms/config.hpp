#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "lrbms/data.hpp"
#include "lrbms/grid.hpp"

namespace lrbms {

using Json = nlohmann::json;

struct ConfigIssue {
  std::string path;  // dotted field path, e.g. "online.delta"
  std::string message;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<ConfigIssue> issues)
      : std::runtime_error(format(issues)), issues_(std::move(issues)) {}
  const std::vector<ConfigIssue>& issues() const { return issues_; }

  static std::string format(const std::vector<ConfigIssue>& issues) {
    std::string s = std::to_string(issues.size()) + " config error(s):";
    for (const auto& i : issues) s += "\n  " + (i.path.empty() ? std::string("<root>") : i.path) + ": " + i.message;
    return s;
  }

 private:
  std::vector<ConfigIssue> issues_;
};

struct GridLevel {
  GridDims coarse{1, 1};
  GridDims fine_per_coarse{8, 8};
  int triangles() const { return 2 * coarse.count() * fine_per_coarse.count(); }
};

struct ExperimentConfig {
  struct ProblemBlock {
    std::string name = "academic";  // "academic" | "channel"
    std::optional<std::string> permeability_file;
    int cols = 100, rows = 20;  // layout of the permeability file
    Parameter lower{0.1}, upper{1.0};
  } problem;

  struct GridBlock {
    GridLevel level;                // used by greedy / online
    std::vector<GridLevel> ladder;  // used by convergence
  } grid;

  struct DiscretizationBlock {
    int order = 1;
    std::optional<double> sigma;  // default 8 k^2
    int theta = 1;                // symmetrization on subdomain interiors: 1, 0 or -1
  } discretization;

  struct EstimatorBlock {
    Parameter mu{1.0}, mu_bar{1.0}, mu_hat{1.0};
    std::vector<Parameter> c_eps_sample;  // empty: box vertices and training set
    std::string indicators = "published"; // or "bound_preserving"
  } estimator;

  struct ReductionBlock {
    int k_H = 1;
    bool tensor = true;
    double delta_greedy = 0.0;
    int n_greedy = 0;
    std::vector<Parameter> training;
    double gs_tolerance = 1e-10;
    std::optional<std::string> basis_import;  // manifest of an earlier greedy run
  } reduction;

  struct OnlineBlock {
    std::optional<double> delta;  // empty: delta_factor * max eta of the detailed solutions
    double delta_factor = 1.1;
    int n_online = 50;
    std::string strategy = "uniform";  // "uniform" | "doerfler_age" | "uniform_doerfler_age"
    double theta_doerf = 0.85;
    int n_age = 4;
    double theta_uni = 10.0;
    std::vector<Parameter> parameters;  // empty: `count` uniform samples drawn with `seed`
    std::uint64_t seed = 42;
    int count = 10;
  } online;

  std::string output = "out";
};

namespace config_detail {

inline std::size_t edit_distance(const std::string& a, const std::string& b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

// closest known key; prefix matches count as close ("sigma_penalty" -> "sigma")
inline std::optional<std::string> suggest(const std::string& key, const std::vector<std::string>& known) {
  std::optional<std::string> best;
  std::size_t best_d = std::string::npos;
  for (const auto& k : known) {
    std::size_t d = edit_distance(key, k);
    if (key.rfind(k, 0) == 0 || k.rfind(key, 0) == 0) d = std::min<std::size_t>(d, 1);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  if (best && best_d <= std::max<std::size_t>(2, key.size() / 3)) return best;
  return std::nullopt;
}

class Reader {
 public:
  std::vector<ConfigIssue> issues;
  std::filesystem::path base_dir;

  void error(const std::string& path, const std::string& msg) { issues.push_back({path, msg}); }

  // Flags keys of `obj` not in `known`.
  void check_keys(const Json& obj, const std::string& path, const std::vector<std::string>& known) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::find(known.begin(), known.end(), it.key()) != known.end()) continue;
      std::string msg = "unknown key '" + it.key() + "'";
      if (auto s = suggest(it.key(), known)) msg += " (did you mean '" + *s + "'?)";
      error(join(path, it.key()), msg);
    }
  }

  const Json* section(const Json& root, const std::string& name, const std::vector<std::string>& known) {
    if (!root.contains(name)) return nullptr;
    const Json& s = root[name];
    if (!s.is_object()) {
      error(name, "expected an object");
      return nullptr;
    }
    check_keys(s, name, known);
    return &s;
  }

  static std::string join(const std::string& a, const std::string& b) { return a.empty() ? b : a + "." + b; }

  void get(const Json* s, const std::string& path, const char* key, double& out) {
    if (!s || !s->contains(key)) return;
    const Json& v = (*s)[key];
    if (!v.is_number()) return error(join(path, key), "expected a number, got " + std::string(v.type_name()));
    out = v.get<double>();
  }
  void get(const Json* s, const std::string& path, const char* key, int& out) {
    if (!s || !s->contains(key)) return;
    const Json& v = (*s)[key];
    if (!v.is_number_integer()) return error(join(path, key), "expected an integer, got " + std::string(v.type_name()));
    out = v.get<int>();
  }
  void get(const Json* s, const std::string& path, const char* key, std::uint64_t& out) {
    if (!s || !s->contains(key)) return;
    const Json& v = (*s)[key];
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
      return error(join(path, key), "expected a nonnegative integer, got " + std::string(v.type_name()));
    out = v.get<std::uint64_t>();
  }
  void get(const Json* s, const std::string& path, const char* key, bool& out) {
    if (!s || !s->contains(key)) return;
    const Json& v = (*s)[key];
    if (!v.is_boolean()) return error(join(path, key), "expected a boolean, got " + std::string(v.type_name()));
    out = v.get<bool>();
  }
  void get(const Json* s, const std::string& path, const char* key, std::string& out) {
    if (!s || !s->contains(key)) return;
    const Json& v = (*s)[key];
    if (!v.is_string()) return error(join(path, key), "expected a string, got " + std::string(v.type_name()));
    out = v.get<std::string>();
  }
  void get(const Json* s, const std::string& path, const char* key, std::optional<std::string>& out) {
    if (!s || !s->contains(key) || (*s)[key].is_null()) return;
    std::string v;
    const auto before = issues.size();
    get(s, path, key, v);
    if (issues.size() == before) out = v;
  }
  void get(const Json* s, const std::string& path, const char* key, std::optional<double>& out) {
    if (!s || !s->contains(key) || (*s)[key].is_null()) return;
    double v = 0.0;
    const auto before = issues.size();
    get(s, path, key, v);
    if (issues.size() == before) out = v;
  }

  std::optional<Parameter> parameter(const Json& v, const std::string& path) {
    if (v.is_number()) return Parameter{v.get<double>()};
    if (!v.is_array() || v.empty()) {
      error(path, "expected a parameter (number or nonempty array of numbers)");
      return std::nullopt;
    }
    Parameter p;
    for (const auto& x : v) {
      if (!x.is_number()) {
        error(path, "expected a number inside the parameter, got " + std::string(x.type_name()));
        return std::nullopt;
      }
      p.push_back(x.get<double>());
    }
    return p;
  }
  void get(const Json* s, const std::string& path, const char* key, Parameter& out) {
    if (!s || !s->contains(key)) return;
    if (auto p = parameter((*s)[key], join(path, key))) out = *p;
  }
  void get(const Json* s, const std::string& path, const char* key, std::vector<Parameter>& out) {
    if (!s || !s->contains(key)) return;
    const Json& v = (*s)[key];
    if (!v.is_array()) return error(join(path, key), "expected an array of parameters");
    out.clear();
    for (std::size_t i = 0; i < v.size(); ++i)
      if (auto p = parameter(v[i], join(path, key) + "[" + std::to_string(i) + "]")) out.push_back(*p);
  }

  std::optional<GridDims> dims(const Json& v, const std::string& path) {
    if (v.is_number_integer()) return GridDims{v.get<int>(), v.get<int>()};
    if (v.is_array() && v.size() == 2 && v[0].is_number_integer() && v[1].is_number_integer())
      return GridDims{v[0].get<int>(), v[1].get<int>()};
    error(path, "expected an integer or a pair of integers");
    return std::nullopt;
  }
  void get(const Json* s, const std::string& path, const char* key, GridDims& out) {
    if (!s || !s->contains(key)) return;
    if (auto d = dims((*s)[key], join(path, key))) out = *d;
  }

  std::string existing_file(const std::string& path, const std::string& file) {
    std::filesystem::path p(file);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    if (!std::filesystem::is_regular_file(p)) error(path, "file not found: " + p.string());
    return p.string();
  }
};

}  // namespace config_detail

/// Documented defaults; the problem name decides the grid and reduction defaults.
inline ExperimentConfig default_config(const std::string& problem = "academic") {
  ExperimentConfig c;
  c.problem.name = problem;
  if (problem == "channel") {
    c.problem.lower = {0.1};
    c.problem.upper = {1.0};
    c.grid.level = {{25, 5}, {8, 8}};
    c.grid.ladder = {c.grid.level};
    c.estimator.mu = c.estimator.mu_bar = c.estimator.mu_hat = {1.0};
    c.reduction.training = {{0.1}, {1.0}};
    c.reduction.n_greedy = 2;
  } else {
    c.grid.level = {{8, 8}, {8, 8}};
    c.grid.ladder = {{{1, 1}, {8, 8}}, {{1, 1}, {16, 16}}, {{1, 1}, {32, 32}}, {{1, 1}, {64, 64}}};
  }
  return c;
}

/// Parses and checks a config document. All problems are collected and thrown together.
inline ExperimentConfig parse_config(const Json& root, const std::filesystem::path& base_dir = {}) {
  config_detail::Reader rd;
  rd.base_dir = base_dir;
  if (!root.is_object()) throw ConfigError(std::vector<ConfigIssue>{{"", "top level must be an object"}});
  rd.check_keys(root, "", {"problem", "grid", "discretization", "estimator", "reduction", "online", "output"});

  std::string name = "academic";
  const Json* pb = rd.section(root, "problem", {"name", "permeability_file", "layout", "parameter_box"});
  rd.get(pb, "problem", "name", name);
  if (name != "academic" && name != "channel") {
    rd.error("problem.name", "expected \"academic\" or \"channel\", got \"" + name + "\"");
    name = "academic";
  }
  ExperimentConfig c = default_config(name);

  rd.get(pb, "problem", "permeability_file", c.problem.permeability_file);
  if (c.problem.permeability_file) {
    if (name != "channel") rd.error("problem.permeability_file", "only the channel problem reads a permeability file");
    c.problem.permeability_file = rd.existing_file("problem.permeability_file", *c.problem.permeability_file);
  }
  if (pb && pb->contains("layout")) {
    const Json* lay = &(*pb)["layout"];
    if (!lay->is_object()) {
      rd.error("problem.layout", "expected an object");
    } else {
      rd.check_keys(*lay, "problem.layout", {"cols", "rows"});
      rd.get(lay, "problem.layout", "cols", c.problem.cols);
      rd.get(lay, "problem.layout", "rows", c.problem.rows);
      if (c.problem.cols <= 0 || c.problem.rows <= 0) rd.error("problem.layout", "cols and rows must be positive");
    }
  }
  if (pb && pb->contains("parameter_box")) {
    const Json* box = &(*pb)["parameter_box"];
    if (!box->is_object()) {
      rd.error("problem.parameter_box", "expected an object");
    } else {
      rd.check_keys(*box, "problem.parameter_box", {"lower", "upper"});
      rd.get(box, "problem.parameter_box", "lower", c.problem.lower);
      rd.get(box, "problem.parameter_box", "upper", c.problem.upper);
    }
  }
  bool box_ok = c.problem.lower.size() == c.problem.upper.size();
  for (std::size_t i = 0; box_ok && i < c.problem.lower.size(); ++i) box_ok = c.problem.lower[i] <= c.problem.upper[i];
  if (!box_ok) rd.error("problem.parameter_box", "lower and upper must have equal length with lower <= upper");
  if (c.problem.lower.size() != 1) rd.error("problem.parameter_box", "the built-in problems take a scalar parameter");
  const ParameterSpace box(box_ok ? c.problem.lower : Parameter{0.0}, box_ok ? c.problem.upper : Parameter{1.0});
  auto check_param = [&](const std::string& path, const Parameter& mu) {
    if (mu.size() != box.dim()) rd.error(path, "parameter dimension " + std::to_string(mu.size()) + ", expected " + std::to_string(box.dim()));
    else if (box_ok && !box.contains(mu)) rd.error(path, "parameter " + to_string(mu) + " outside the parameter box");
  };

  const Json* gb = rd.section(root, "grid", {"coarse", "fine_per_coarse", "ladder"});
  rd.get(gb, "grid", "coarse", c.grid.level.coarse);
  rd.get(gb, "grid", "fine_per_coarse", c.grid.level.fine_per_coarse);
  auto check_level = [&](const std::string& path, const GridLevel& l) {
    if (l.coarse.nx <= 0 || l.coarse.ny <= 0 || l.fine_per_coarse.nx <= 0 || l.fine_per_coarse.ny <= 0)
      rd.error(path, "grid counts must be positive");
  };
  check_level("grid", c.grid.level);
  if (gb && gb->contains("ladder")) {
    const Json& lad = (*gb)["ladder"];
    if (!lad.is_array() || lad.empty()) {
      rd.error("grid.ladder", "expected a nonempty array of {coarse, fine_per_coarse}");
    } else {
      c.grid.ladder.clear();
      for (std::size_t i = 0; i < lad.size(); ++i) {
        const std::string path = "grid.ladder[" + std::to_string(i) + "]";
        if (!lad[i].is_object()) {
          rd.error(path, "expected an object");
          continue;
        }
        rd.check_keys(lad[i], path, {"coarse", "fine_per_coarse"});
        GridLevel l = c.grid.level;
        rd.get(&lad[i], path, "coarse", l.coarse);
        rd.get(&lad[i], path, "fine_per_coarse", l.fine_per_coarse);
        check_level(path, l);
        c.grid.ladder.push_back(l);
      }
    }
  }
  for (std::size_t i = 1; i < c.grid.ladder.size(); ++i)
    if (c.grid.ladder[i].triangles() <= c.grid.ladder[i - 1].triangles())
      rd.error("grid.ladder[" + std::to_string(i) + "]", "ladder must be strictly increasing in the number of triangles (" +
                                                          std::to_string(c.grid.ladder[i - 1].triangles()) + " then " +
                                                          std::to_string(c.grid.ladder[i].triangles()) + ")");

  const Json* db = rd.section(root, "discretization", {"order", "sigma", "theta"});
  rd.get(db, "discretization", "order", c.discretization.order);
  rd.get(db, "discretization", "sigma", c.discretization.sigma);
  rd.get(db, "discretization", "theta", c.discretization.theta);
  if (c.discretization.order < 1) rd.error("discretization.order", "must be at least 1");
  if (c.discretization.sigma && !(*c.discretization.sigma > 0.0)) rd.error("discretization.sigma", "must be positive");
  if (c.discretization.theta < -1 || c.discretization.theta > 1) rd.error("discretization.theta", "must be -1, 0 or 1");

  const Json* eb = rd.section(root, "estimator", {"mu", "mu_bar", "mu_hat", "c_eps_sample", "indicators"});
  rd.get(eb, "estimator", "mu", c.estimator.mu);
  rd.get(eb, "estimator", "mu_bar", c.estimator.mu_bar);
  rd.get(eb, "estimator", "mu_hat", c.estimator.mu_hat);
  rd.get(eb, "estimator", "c_eps_sample", c.estimator.c_eps_sample);
  rd.get(eb, "estimator", "indicators", c.estimator.indicators);
  check_param("estimator.mu", c.estimator.mu);
  check_param("estimator.mu_bar", c.estimator.mu_bar);
  check_param("estimator.mu_hat", c.estimator.mu_hat);
  for (std::size_t i = 0; i < c.estimator.c_eps_sample.size(); ++i)
    check_param("estimator.c_eps_sample[" + std::to_string(i) + "]", c.estimator.c_eps_sample[i]);
  if (c.estimator.indicators != "published" && c.estimator.indicators != "bound_preserving")
    rd.error("estimator.indicators", "expected \"published\" or \"bound_preserving\"");

  const Json* rb = rd.section(root, "reduction",
                              {"k_H", "tensor", "delta_greedy", "n_greedy", "training", "gs_tolerance", "basis_import"});
  rd.get(rb, "reduction", "k_H", c.reduction.k_H);
  rd.get(rb, "reduction", "tensor", c.reduction.tensor);
  rd.get(rb, "reduction", "delta_greedy", c.reduction.delta_greedy);
  rd.get(rb, "reduction", "n_greedy", c.reduction.n_greedy);
  rd.get(rb, "reduction", "training", c.reduction.training);
  rd.get(rb, "reduction", "gs_tolerance", c.reduction.gs_tolerance);
  rd.get(rb, "reduction", "basis_import", c.reduction.basis_import);
  if (c.reduction.k_H < 0) rd.error("reduction.k_H", "must be nonnegative");
  if (c.reduction.delta_greedy < 0.0) rd.error("reduction.delta_greedy", "must be nonnegative");
  if (c.reduction.n_greedy < 0) rd.error("reduction.n_greedy", "must be nonnegative");
  if (!(c.reduction.gs_tolerance > 0.0)) rd.error("reduction.gs_tolerance", "must be positive");
  if (c.reduction.n_greedy > 0 && c.reduction.training.empty())
    rd.error("reduction.training", "needed when n_greedy > 0");
  for (std::size_t i = 0; i < c.reduction.training.size(); ++i)
    check_param("reduction.training[" + std::to_string(i) + "]", c.reduction.training[i]);
  if (c.reduction.basis_import)
    c.reduction.basis_import = rd.existing_file("reduction.basis_import", *c.reduction.basis_import);

  const Json* ob = rd.section(root, "online", {"delta", "delta_factor", "n_online", "strategy", "theta_doerf", "n_age",
                                               "theta_uni", "parameters", "seed", "count"});
  if (ob && ob->contains("delta") && (*ob)["delta"].is_string()) {
    if ((*ob)["delta"].get<std::string>() != "auto") rd.error("online.delta", "expected a number or \"auto\"");
  } else {
    rd.get(ob, "online", "delta", c.online.delta);
  }
  rd.get(ob, "online", "delta_factor", c.online.delta_factor);
  rd.get(ob, "online", "n_online", c.online.n_online);
  rd.get(ob, "online", "strategy", c.online.strategy);
  rd.get(ob, "online", "theta_doerf", c.online.theta_doerf);
  rd.get(ob, "online", "n_age", c.online.n_age);
  rd.get(ob, "online", "theta_uni", c.online.theta_uni);
  rd.get(ob, "online", "parameters", c.online.parameters);
  rd.get(ob, "online", "seed", c.online.seed);
  rd.get(ob, "online", "count", c.online.count);
  if (c.online.delta && *c.online.delta < 0.0) rd.error("online.delta", "out of range: must be nonnegative");
  if (!(c.online.delta_factor > 0.0)) rd.error("online.delta_factor", "out of range: must be positive");
  if (c.online.n_online < 0) rd.error("online.n_online", "must be nonnegative");
  if (c.online.strategy != "uniform" && c.online.strategy != "doerfler_age" && c.online.strategy != "uniform_doerfler_age")
    rd.error("online.strategy", "expected \"uniform\", \"doerfler_age\" or \"uniform_doerfler_age\"");
  if (!(c.online.theta_doerf > 0.0 && c.online.theta_doerf <= 1.0)) rd.error("online.theta_doerf", "must lie in (0, 1]");
  if (c.online.n_age < 0) rd.error("online.n_age", "must be nonnegative");
  if (!(c.online.theta_uni > 0.0)) rd.error("online.theta_uni", "must be positive");
  if (c.online.count < 0) rd.error("online.count", "must be nonnegative");
  for (std::size_t i = 0; i < c.online.parameters.size(); ++i)
    check_param("online.parameters[" + std::to_string(i) + "]", c.online.parameters[i]);

  if (root.contains("output")) {
    const Json& o = root["output"];
    if (o.is_string()) {
      c.output = o.get<std::string>();
    } else if (o.is_object()) {
      rd.check_keys(o, "output", {"directory"});
      rd.get(&o, "output", "directory", c.output);
    } else {
      rd.error("output", "expected a directory string or {\"directory\": ...}");
    }
  }

  if (!rd.issues.empty()) throw ConfigError(std::move(rd.issues));
  return c;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(std::vector<ConfigIssue>{{"", "cannot read config file " + path.string()}});
  Json root;
  try {
    root = Json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::vector<ConfigIssue>{{"", std::string("syntax error: ") + e.what()}});
  }
  return parse_config(root, path.parent_path());
}

inline Json to_json(const GridDims& d) { return Json::array({d.nx, d.ny}); }

/// Fully resolved config, defaults included.
inline Json to_json(const ExperimentConfig& c) {
  Json j;
  j["problem"] = {{"name", c.problem.name},
                  {"permeability_file", c.problem.permeability_file ? Json(*c.problem.permeability_file) : Json()},
                  {"layout", {{"cols", c.problem.cols}, {"rows", c.problem.rows}}},
                  {"parameter_box", {{"lower", c.problem.lower}, {"upper", c.problem.upper}}}};
  Json ladder = Json::array();
  for (const auto& l : c.grid.ladder) ladder.push_back({{"coarse", to_json(l.coarse)}, {"fine_per_coarse", to_json(l.fine_per_coarse)}});
  j["grid"] = {{"coarse", to_json(c.grid.level.coarse)}, {"fine_per_coarse", to_json(c.grid.level.fine_per_coarse)}, {"ladder", ladder}};
  j["discretization"] = {{"order", c.discretization.order},
                         {"sigma", c.discretization.sigma ? Json(*c.discretization.sigma) : Json()},
                         {"theta", c.discretization.theta}};
  j["estimator"] = {{"mu", c.estimator.mu},
                    {"mu_bar", c.estimator.mu_bar},
                    {"mu_hat", c.estimator.mu_hat},
                    {"c_eps_sample", c.estimator.c_eps_sample},
                    {"indicators", c.estimator.indicators}};
  j["reduction"] = {{"k_H", c.reduction.k_H},
                    {"tensor", c.reduction.tensor},
                    {"delta_greedy", c.reduction.delta_greedy},
                    {"n_greedy", c.reduction.n_greedy},
                    {"training", c.reduction.training},
                    {"gs_tolerance", c.reduction.gs_tolerance},
                    {"basis_import", c.reduction.basis_import ? Json(*c.reduction.basis_import) : Json()}};
  j["online"] = {{"delta", c.online.delta ? Json(*c.online.delta) : Json("auto")},
                 {"delta_factor", c.online.delta_factor},
                 {"n_online", c.online.n_online},
                 {"strategy", c.online.strategy},
                 {"theta_doerf", c.online.theta_doerf},
                 {"n_age", c.online.n_age},
                 {"theta_uni", c.online.theta_uni},
                 {"parameters", c.online.parameters},
                 {"seed", c.online.seed},
                 {"count", c.online.count}};
  j["output"] = {{"directory", c.output}};
  return j;
}

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char ch : s) {
    h ^= ch;
    h *= 1099511628211ull;
  }
  return h;
}

/// Hash of everything that influences results (the output directory does not).
inline std::uint64_t config_hash(const ExperimentConfig& c) {
  Json j = to_json(c);
  j.erase("output");
  return fnv1a(j.dump());
}

inline std::string hex64(std::uint64_t h) {
  std::ostringstream s;
  s << std::hex;
  s.width(16);
  s.fill('0');
  s << h;
  return s.str();
}

}  // namespace lrbms
