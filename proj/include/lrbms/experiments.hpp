#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "lrbms/config.hpp"
#include "lrbms/enrich.hpp"
#include "lrbms/estimate.hpp"
#include "lrbms/io/csv.hpp"
#include "lrbms/problems.hpp"

namespace lrbms {

inline Problem make_problem(const ExperimentConfig& cfg) {
  Problem p = cfg.problem.name == "channel"
                  ? channel_problem(cfg.problem.permeability_file, cfg.problem.cols, cfg.problem.rows)
                  : academic_problem();
  p.parameters = ParameterSpace(cfg.problem.lower, cfg.problem.upper);
  p.parameters.training = cfg.reduction.training;
  return p;
}

inline AssemblyOptions assembly_options(const ExperimentConfig& cfg, GridDims coarse) {
  AssemblyOptions o;
  o.sigma = cfg.discretization.sigma;
  if (cfg.discretization.theta != 1) o.theta_sym.assign(static_cast<std::size_t>(coarse.count()), cfg.discretization.theta);
  return o;
}

inline IndicatorVariant indicator_variant(const ExperimentConfig& cfg) {
  return cfg.estimator.indicators == "bound_preserving" ? IndicatorVariant::bound_preserving : IndicatorVariant::published;
}

inline std::vector<Parameter> c_eps_sample(const ExperimentConfig& cfg, const Problem& p) {
  return cfg.estimator.c_eps_sample.empty() ? default_c_eps_sample(p.parameters) : cfg.estimator.c_eps_sample;
}

inline MarkingStrategy marking_strategy(const ExperimentConfig& cfg) {
  const auto& o = cfg.online;
  if (o.strategy == "doerfler_age") return MarkingStrategy::doerfler_age(o.theta_doerf, o.n_age);
  if (o.strategy == "uniform_doerfler_age") return MarkingStrategy::uniform_doerfler_age(o.theta_uni, o.theta_doerf, o.n_age);
  return MarkingStrategy::uniform();
}

// ---------------------------------------------------------------- convergence

struct ConvergenceRow {
  int triangles = 0, coarse = 0;
  double error = 0, nc = 0, r = 0, df = 0, eta = 0, efficiency = 0;
  std::string reference;  // "exact" or "refined"
};

struct ConvergenceEOC {
  double error = 0, nc = 0, r = 0, df = 0, eta = 0;
};

struct ConvergenceTable {
  std::vector<ConvergenceRow> rows;
  std::optional<ConvergenceEOC> eoc;  // only for two or more rows
  double sigma = 0.0;
};

// Mean over consecutive levels of log(e_i/e_{i+1}) / log(h_i/h_{i+1}), h ~ |tau_h|^{-1/2}.
inline double mean_eoc(const std::vector<ConvergenceRow>& rows, double ConvergenceRow::*field) {
  double s = 0.0;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double hr = std::sqrt(static_cast<double>(rows[i].triangles) / rows[i - 1].triangles);
    s += std::log(rows[i - 1].*field / rows[i].*field) / std::log(hr);
  }
  return s / static_cast<double>(rows.size() - 1);
}

inline ConvergenceTable run_convergence_study(const ExperimentConfig& cfg) {
  const Problem prob = make_problem(cfg);
  // errors are measured in the mu_bar energy norm, the norm the estimator bounds
  const Parameter& mu = cfg.estimator.mu;
  const bool exact = prob.exact_gradient && prob.exact_parameter && *prob.exact_parameter == mu;
  ConvergenceTable tab;
  for (const auto& level : cfg.grid.ladder) {
    const auto d = discretize(prob, level.coarse, level.fine_per_coarse, cfg.discretization.order,
                              assembly_options(cfg, level.coarse));
    tab.sigma = d->sys->sigma;
    const auto ctx = d->estimator(c_eps_sample(cfg, prob));
    const Eigen::VectorXd p = solve_detailed(*d->sys, mu);
    const auto rep = estimate(ctx, p, mu, cfg.estimator.mu_bar, cfg.estimator.mu_hat, indicator_variant(cfg));
    ConvergenceRow row;
    row.triangles = d->grid->num_triangles();
    row.coarse = d->grid->num_coarse();
    if (exact) {
      row.error = energy_error_exact(*d->sys, d->kappa, p, prob.exact_gradient, cfg.estimator.mu_bar);
      row.reference = "exact";
    } else {
      const GridDims f2{2 * level.fine_per_coarse.nx, 2 * level.fine_per_coarse.ny};
      const auto ref = discretize(prob, level.coarse, f2, cfg.discretization.order, assembly_options(cfg, level.coarse));
      const auto loc = energy_error_reference(*ref, solve_detailed(*ref->sys, mu), *d, p, cfg.estimator.mu_bar);
      row.error = EstimatorReport::l2(loc);
      row.reference = "refined";
    }
    row.nc = rep.total_nc();
    row.r = rep.total_r();
    row.df = rep.total_df();
    row.eta = rep.eta;
    row.efficiency = rep.eta / row.error;
    tab.rows.push_back(row);
  }
  if (tab.rows.size() >= 2) {
    ConvergenceEOC e;
    e.error = mean_eoc(tab.rows, &ConvergenceRow::error);
    e.nc = mean_eoc(tab.rows, &ConvergenceRow::nc);
    e.r = mean_eoc(tab.rows, &ConvergenceRow::r);
    e.df = mean_eoc(tab.rows, &ConvergenceRow::df);
    e.eta = mean_eoc(tab.rows, &ConvergenceRow::eta);
    tab.eoc = e;
  }
  return tab;
}

inline std::string convergence_csv(const ConvergenceTable& t, std::uint64_t config_hash) {
  using io::num;
  std::string s = io::hash_line(config_hash) + "triangles,coarse,error,eta_nc,eta_r,eta_df,eta,efficiency\n";
  for (const auto& r : t.rows)
    s += std::to_string(r.triangles) + "," + std::to_string(r.coarse) + "," + num(r.error) + "," + num(r.nc) + "," +
         num(r.r) + "," + num(r.df) + "," + num(r.eta) + "," + num(r.efficiency) + "\n";
  if (t.eoc)
    s += "EOC,," + num(t.eoc->error) + "," + num(t.eoc->nc) + "," + num(t.eoc->r) + "," + num(t.eoc->df) + "," +
         num(t.eoc->eta) + ",\n";
  return s;
}

// ---------------------------------------------------------------- reduction

/// A discretization with estimator and reduced model, kept alive together.
struct ReducedSetup {
  Problem problem;
  std::unique_ptr<Discretization> disc;
  std::unique_ptr<EstimatorContext> estimator;
  std::unique_ptr<ReducedModel> model;
  GreedyResult greedy;
};

inline std::unique_ptr<ReducedSetup> build_reduced_setup(const ExperimentConfig& cfg) {
  auto s = std::make_unique<ReducedSetup>();
  s->problem = make_problem(cfg);
  const auto& lv = cfg.grid.level;
  s->disc = discretize(s->problem, lv.coarse, lv.fine_per_coarse, cfg.discretization.order, assembly_options(cfg, lv.coarse));
  s->estimator = std::make_unique<EstimatorContext>(s->disc->estimator(c_eps_sample(cfg, s->problem)));
  Parameter mu_bar = cfg.estimator.mu_bar;
  std::vector<LocalReducedBasis> imported;
  if (cfg.reduction.basis_import) {
    Parameter stored;
    imported = io::import_bases(*cfg.reduction.basis_import, *s->disc->space, &stored);
    if (stored != mu_bar) throw InvalidArgument("imported bases were orthonormalized for mu_bar = " + to_string(stored));
  }
  s->model = std::make_unique<ReducedModel>(*s->disc->sys, *s->estimator, mu_bar, cfg.estimator.mu_hat,
                                            cfg.reduction.gs_tolerance);
  s->model->indicators = indicator_variant(cfg);
  if (cfg.reduction.basis_import) {
    s->model->bases = std::move(imported);
    s->greedy.termination = "imported";
  } else {
    s->greedy = greedy_offline(*s->model, cfg.reduction.training, cfg.reduction.delta_greedy, cfg.reduction.n_greedy,
                               cfg.reduction.k_H, cfg.reduction.tensor);
  }
  return s;
}

inline std::vector<Parameter> online_parameters(const ExperimentConfig& cfg) {
  if (!cfg.online.parameters.empty()) return cfg.online.parameters;
  return ParameterSpace(cfg.problem.lower, cfg.problem.upper)
      .sample_uniform(static_cast<std::size_t>(cfg.online.count), cfg.online.seed);
}

struct EnrichmentStudy {
  std::unique_ptr<ReducedSetup> setup;
  std::vector<Parameter> parameters;
  double max_detailed_eta = 0.0;  // only computed for automatic delta
  double delta_online = 0.0;
  std::vector<EnrichmentLog> logs;
  std::vector<int> final_sizes;
  int total_size() const {
    int s = 0;
    for (int v : final_sizes) s += v;
    return s;
  }
};

/// Greedy (or import), then adaptive enrichment over the online parameters in order;
/// bases and marking ages carry over from one parameter to the next.
inline EnrichmentStudy run_enrichment_study(const ExperimentConfig& cfg) {
  EnrichmentStudy st;
  st.setup = build_reduced_setup(cfg);
  st.parameters = online_parameters(cfg);
  auto& s = *st.setup;
  if (cfg.online.delta) {
    st.delta_online = *cfg.online.delta;
  } else {
    for (const auto& mu : st.parameters) {
      const Eigen::VectorXd p = solve_detailed(*s.disc->sys, mu);
      st.max_detailed_eta =
          std::max(st.max_detailed_eta, estimate(*s.estimator, p, mu, cfg.estimator.mu_bar, cfg.estimator.mu_hat).eta);
    }
    st.delta_online = cfg.online.delta_factor * st.max_detailed_eta;
  }
  MarkingStrategy strategy = marking_strategy(cfg);
  for (std::size_t i = 0; i < st.parameters.size(); ++i)
    st.logs.push_back(
        enrich_online(*s.model, st.parameters[i], st.delta_online, cfg.online.n_online, strategy, static_cast<int>(i)).log);
  st.final_sizes = s.model->sizes();
  return st;
}

}  // namespace lrbms
