// lrbms: batch driver for convergence tables, greedy basis generation and online enrichment.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "lrbms/config.hpp"
#include "lrbms/experiments.hpp"
#include "lrbms/io/csv.hpp"
#include "lrbms/parallel.hpp"

namespace fs = std::filesystem;
using namespace lrbms;

namespace {

struct Options {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

ExperimentConfig resolve(const Options& o) {
  ExperimentConfig cfg = load_config(o.config);
  if (o.out) cfg.output = *o.out;
  if (o.seed) cfg.online.seed = *o.seed;
  return cfg;
}

Json manifest_base(const ExperimentConfig& cfg, const std::string& command, const std::string& started) {
  return {{"command", command},
          {"config_hash", hex64(config_hash(cfg))},
          {"config", to_json(cfg)},
          {"threads", num_threads()},
          {"started", started}};
}

void finish(const fs::path& dir, Json m) {
  m["finished"] = io::timestamp();
  io::write_file(dir / "manifest.json", m.dump(2) + "\n");
}

int cmd_convergence(const ExperimentConfig& cfg) {
  const std::string started = io::timestamp();
  const auto tab = run_convergence_study(cfg);
  const fs::path dir = cfg.output;
  io::write_file(dir / "convergence.csv", convergence_csv(tab, config_hash(cfg)));
  for (const auto& r : tab.rows)
    std::cout << r.triangles << " triangles, " << r.coarse << " subdomains: error " << io::num(r.error) << ", eta "
              << io::num(r.eta) << ", efficiency " << io::num(r.efficiency) << "\n";
  if (tab.eoc) std::cout << "EOC error " << io::num(tab.eoc->error) << ", eta " << io::num(tab.eoc->eta) << "\n";
  Json m = manifest_base(cfg, "convergence", started);
  m["resolved"] = {{"sigma", tab.sigma}, {"reference", tab.rows.empty() ? "" : tab.rows.front().reference}};
  m["outputs"] = {"convergence.csv"};
  finish(dir, m);
  return 0;
}

int cmd_greedy(const ExperimentConfig& cfg) {
  const std::string started = io::timestamp();
  const auto s = build_reduced_setup(cfg);
  const fs::path dir = cfg.output;
  const auto h = config_hash(cfg);
  io::write_file(dir / "greedy_log.csv", io::greedy_log_csv(s->greedy, h));
  io::write_file(dir / "basis_sizes.csv", io::basis_size_matrix_csv(*s->disc->grid, s->model->sizes(), h));
  io::export_bases(dir / "bases", *s->disc->space, s->model->bases, s->model->mu_bar);
  std::cout << "greedy: " << s->greedy.log.size() << " iterations (" << s->greedy.termination << "), total basis size "
            << s->model->total_size() << "\n";
  Json m = manifest_base(cfg, "greedy", started);
  m["resolved"] = {{"sigma", s->disc->sys->sigma}, {"grid_hash", hex64(s->disc->grid->hash())},
                   {"triangles", s->disc->grid->num_triangles()}};
  m["outputs"] = {"greedy_log.csv", "basis_sizes.csv", "bases/manifest.json"};
  finish(dir, m);
  return 0;
}

int cmd_online(const ExperimentConfig& cfg) {
  const std::string started = io::timestamp();
  const auto st = run_enrichment_study(cfg);
  const fs::path dir = cfg.output;
  const auto h = config_hash(cfg);
  Json outputs = Json::array();
  io::write_file(dir / "enrichment_log.csv", io::enrichment_log_csv(st.logs, h));
  outputs.push_back("enrichment_log.csv");
  for (std::size_t i = 0; i < st.logs.size(); ++i) {
    const std::string name = "enrichment_" + std::to_string(i) + ".csv";
    io::write_file(dir / name, io::enrichment_log_csv({st.logs[i]}, h));
    outputs.push_back(name);
  }
  io::write_file(dir / "basis_sizes.csv", io::basis_size_matrix_csv(*st.setup->disc->grid, st.final_sizes, h));
  outputs.push_back("basis_sizes.csv");
  for (std::size_t i = 0; i < st.logs.size(); ++i)
    std::cout << "mu " << to_string(st.parameters[i]) << ": " << st.logs[i].enrichment_steps() << " steps, eta "
              << io::num(st.logs[i].initial_eta()) << " -> " << io::num(st.logs[i].final_eta()) << " ("
              << st.logs[i].termination << ")\n";
  std::cout << "delta_online " << io::num(st.delta_online) << ", total basis size " << st.total_size() << "\n";
  Json params = Json::array();
  for (const auto& mu : st.parameters) params.push_back(mu);
  Json m = manifest_base(cfg, "online", started);
  m["resolved"] = {{"sigma", st.setup->disc->sys->sigma},
                   {"delta_online", st.delta_online},
                   {"delta_online_source", cfg.online.delta ? "config" : "auto"},
                   {"max_detailed_eta", st.max_detailed_eta},
                   {"seed", cfg.online.seed},
                   {"online_parameters", params},
                   {"grid_hash", hex64(st.setup->disc->grid->hash())},
                   {"total_basis_size", st.total_size()}};
  m["outputs"] = outputs;
  finish(dir, m);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Localized reduced-basis multiscale solver: experiment driver"};
  app.require_subcommand(1);
  Options o;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides output.directory)");
    sub->add_option("--seed", o.seed, "seed for the online parameter sample (overrides online.seed)");
    sub->add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  };
  auto* conv = app.add_subcommand("convergence", "error / estimator table over the grid ladder");
  auto* greedy = app.add_subcommand("greedy", "coarse bases plus weak greedy; exports the bases");
  auto* online = app.add_subcommand("online", "greedy (or import) followed by adaptive online enrichment");
  auto* validate = app.add_subcommand("validate", "check a config and print it with all defaults resolved");
  for (auto* s : {conv, greedy, online, validate}) add_common(s);
  CLI11_PARSE(app, argc, argv);

  set_num_threads(o.threads);
  try {
    const ExperimentConfig cfg = resolve(o);
    if (*validate) {
      std::cout << to_json(cfg).dump(2) << "\n# config_hash: " << hex64(config_hash(cfg)) << "\n";
      return 0;
    }
    if (*conv) return cmd_convergence(cfg);
    if (*greedy) return cmd_greedy(cfg);
    return cmd_online(cfg);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
