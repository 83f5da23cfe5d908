#include <gtest/gtest.h>

#include <filesystem>

#include "lrbms/config.hpp"
#include "lrbms/experiments.hpp"
#include "lrbms/io/csv.hpp"

using namespace lrbms;
namespace fs = std::filesystem;

namespace {

std::vector<ConfigIssue> issues_of(const Json& j) {
  try {
    parse_config(j);
  } catch (const ConfigError& e) {
    return e.issues();
  }
  return {};
}

bool has_issue(const std::vector<ConfigIssue>& v, const std::string& path, const std::string& needle) {
  for (const auto& i : v)
    if (i.path == path && i.message.find(needle) != std::string::npos) return true;
  return false;
}

fs::path scratch(const std::string& name) {
  const auto p = fs::temp_directory_path() / ("lrbms_cfg_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Config, MinimalResolvesDefaults) {
  const auto c = parse_config(Json::parse(R"({"problem": {"name": "academic"}})"));
  EXPECT_EQ(c.grid.level.coarse.nx, 8);
  EXPECT_EQ(c.grid.ladder.size(), 4u);
  EXPECT_EQ(c.grid.ladder.back().triangles(), 8192);
  EXPECT_FALSE(c.discretization.sigma);
  EXPECT_FALSE(c.online.delta);
  EXPECT_EQ(c.online.strategy, "uniform");
  EXPECT_EQ(c.online.seed, 42u);
  EXPECT_EQ(c.output, "out");
  const auto ch = parse_config(Json::parse(R"({"problem": {"name": "channel"}})"));
  EXPECT_EQ(ch.grid.level.coarse.nx, 25);
  EXPECT_EQ(ch.reduction.n_greedy, 2);
  EXPECT_EQ(parse_config(Json::object()).problem.name, "academic");
}

TEST(Config, UnknownKeySuggestsNearest) {
  const auto v = issues_of(Json::parse(R"({"discretization": {"sigma_penalty": 16}})"));
  ASSERT_EQ(v.size(), 1u);
  EXPECT_EQ(v[0].path, "discretization.sigma_penalty");
  EXPECT_NE(v[0].message.find("did you mean 'sigma'"), std::string::npos) << v[0].message;
  EXPECT_EQ(config_detail::suggest("onlin", {"grid", "online"}), "online");
  EXPECT_FALSE(config_detail::suggest("zzzzzz", {"grid", "online"}));
}

TEST(Config, RangeAndTypeErrors) {
  EXPECT_TRUE(has_issue(issues_of(Json::parse(R"({"online": {"delta": -1}})")), "online.delta", "out of range"));
  EXPECT_TRUE(has_issue(issues_of(Json::parse(R"({"online": {"delta": "soon"}})")), "online.delta", ""));
  const auto t = issues_of(Json::parse(R"({"reduction": {"k_H": "one"}})"));
  ASSERT_EQ(t.size(), 1u);
  EXPECT_EQ(t[0].path, "reduction.k_H");
  EXPECT_TRUE(has_issue(issues_of(Json::parse(R"({"estimator": {"mu": [2.0]}})")), "estimator.mu", "outside"));
  EXPECT_TRUE(has_issue(issues_of(Json::parse(R"({"estimator": {"mu": [0.5, 0.5]}})")), "estimator.mu", "dimension"));
}

TEST(Config, MissingFile) {
  const auto v = issues_of(Json::parse(R"({"problem": {"name": "channel", "permeability_file": "/no/such/file.txt"}})"));
  EXPECT_TRUE(has_issue(v, "problem.permeability_file", ""));
  EXPECT_THROW(load_config("/no/such/config.json"), ConfigError);
}

TEST(Config, LadderMustIncrease) {
  const auto v = issues_of(Json::parse(R"({"grid": {"ladder": [
      {"coarse": [1, 1], "fine_per_coarse": [16, 16]},
      {"coarse": [2, 2], "fine_per_coarse": [8, 8]}]}})"));
  EXPECT_TRUE(has_issue(v, "grid.ladder[1]", "strictly increasing"));
}

TEST(Config, AllErrorsCollected) {
  const auto v = issues_of(Json::parse(R"({
      "discretization": {"order": 0, "sigma_penalty": 1},
      "online": {"delta": -1, "strategy": "random"},
      "reduction": {"n_greedy": -3}})"));
  EXPECT_EQ(v.size(), 5u);
  try {
    parse_config(Json::parse(R"({"online": {"delta": -1, "n_online": -1}})"));
    FAIL();
  } catch (const ConfigError& e) {
    const std::string w = e.what();
    EXPECT_NE(w.find("online.delta"), std::string::npos);
    EXPECT_NE(w.find("online.n_online"), std::string::npos);
  }
}

TEST(Config, CommentsAndHash) {
  const auto dir = scratch("comments");
  io::write_file(dir / "a.json", "{\n  // coarse study\n  \"grid\": {\"coarse\": [2, 2]},\n  \"output\": \"x\"\n}\n");
  io::write_file(dir / "b.json", "{\"grid\": {\"coarse\": [2, 2]}, \"output\": \"y\"}\n");
  const auto a = load_config(dir / "a.json"), b = load_config(dir / "b.json");
  EXPECT_EQ(a.grid.level.coarse.nx, 2);
  EXPECT_EQ(config_hash(a), config_hash(b));
  auto c = b;
  c.online.seed = 7;
  EXPECT_NE(config_hash(b), config_hash(c));
  // the resolved config parses back to itself
  EXPECT_EQ(config_hash(parse_config(to_json(a))), config_hash(a));
}

TEST(Convergence, SingleLevelHasNoEocRow) {
  auto c = default_config("academic");
  c.grid.ladder = {{{1, 1}, {4, 4}}};
  const auto t = run_convergence_study(c);
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_FALSE(t.eoc);
  const auto csv = convergence_csv(t, config_hash(c));
  EXPECT_EQ(csv.find("EOC"), std::string::npos);
  EXPECT_EQ(csv.rfind("# config_hash: ", 0), 0u);
}

TEST(Convergence, RunsAreReproducible) {
  auto c = default_config("academic");
  c.grid.ladder = {{{1, 1}, {4, 4}}, {{1, 1}, {8, 8}}};
  const auto a = convergence_csv(run_convergence_study(c), config_hash(c));
  const auto b = convergence_csv(run_convergence_study(c), config_hash(c));
  EXPECT_EQ(io::csv_body(a), io::csv_body(b));
  EXPECT_NE(a.find("EOC"), std::string::npos);
}

TEST(Enrichment, ReproducibleWithSeedAndLogged) {
  auto c = default_config("academic");
  c.grid.level = {{2, 2}, {4, 4}};
  c.estimator.mu_bar = c.estimator.mu_hat = {0.1};
  c.online.count = 3;
  const auto s1 = run_enrichment_study(c), s2 = run_enrichment_study(c);
  EXPECT_EQ(s1.parameters, s2.parameters);
  const auto l1 = io::enrichment_log_csv(s1.logs, config_hash(c)), l2 = io::enrichment_log_csv(s2.logs, config_hash(c));
  EXPECT_EQ(io::csv_body(l1), io::csv_body(l2));
  EXPECT_NE(l1.find("param_index,step,eta,n_marked,total_basis_size"), std::string::npos);
  EXPECT_EQ(s1.final_sizes, s2.final_sizes);
  c.online.seed = 43;
  EXPECT_NE(online_parameters(c), s1.parameters);
}

TEST(Bases, ExportImportRoundTrip) {
  auto c = default_config("channel");
  c.grid.level = {{5, 1}, {2, 2}};
  const auto s = build_reduced_setup(c);
  const auto dir = scratch("bases");
  io::export_bases(dir, *s->disc->space, s->model->bases, s->model->mu_bar);
  Parameter bar;
  const auto back = io::import_bases(dir / "manifest.json", *s->disc->space, &bar);
  EXPECT_EQ(bar, s->model->mu_bar);
  ASSERT_EQ(back.size(), s->model->bases.size());
  for (std::size_t T = 0; T < back.size(); ++T) {
    EXPECT_EQ(back[T].T, s->model->bases[T].T);
    EXPECT_EQ(back[T].vectors, s->model->bases[T].vectors);
  }
  // import through the config path reproduces the reduced solution
  auto c2 = c;
  c2.reduction.basis_import = (dir / "manifest.json").string();
  const auto s2 = build_reduced_setup(c2);
  const ReducedSystem r1(*s->disc->sys, s->model->bases), r2(*s2->disc->sys, s2->model->bases);
  EXPECT_EQ(r1.solve({0.4}), r2.solve({0.4}));
  // mismatched grid
  const auto other = discretize(channel_problem(), {5, 1}, {4, 4});
  EXPECT_THROW(io::import_bases(dir / "manifest.json", *other->space), InvalidArgument);
}
