#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "lrbms/data.hpp"
#include "lrbms/estimate.hpp"
#include "lrbms/grid.hpp"
#include "lrbms/parallel.hpp"
#include "lrbms/reduce.hpp"
#include "lrbms/swipdg.hpp"

namespace lrbms {

struct MarkingStrategy {
  enum class Kind { uniform, doerfler_age, uniform_doerfler_age };
  Kind kind = Kind::uniform;
  double theta_doerf = 1.0;
  int n_age = 4;
  double theta_uni = 10.0;
  std::vector<int> ages;  // grown on first use

  static MarkingStrategy uniform() { return {}; }
  static MarkingStrategy doerfler_age(double theta_doerf, int n_age) {
    MarkingStrategy s;
    s.kind = Kind::doerfler_age;
    s.theta_doerf = theta_doerf;
    s.n_age = n_age;
    return s;
  }
  static MarkingStrategy uniform_doerfler_age(double theta_uni, double theta_doerf, int n_age) {
    MarkingStrategy s = doerfler_age(theta_doerf, n_age);
    s.kind = Kind::uniform_doerfler_age;
    s.theta_uni = theta_uni;
    return s;
  }
  std::string name() const {
    switch (kind) {
      case Kind::uniform: return "uniform";
      case Kind::doerfler_age: return "doerfler_age";
      default: return "uniform_doerfler_age";
    }
  }
};

/// Minimal prefix of ids sorted by descending indicator^2 (ties: lower id first)
/// whose squared sum reaches theta * total.
inline std::vector<int> doerfler_set(const std::vector<double>& indicators, double theta) {
  std::vector<int> order(indicators.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return indicators[static_cast<std::size_t>(a)] * indicators[static_cast<std::size_t>(a)] >
           indicators[static_cast<std::size_t>(b)] * indicators[static_cast<std::size_t>(b)];
  });
  double total = 0.0;
  for (int T : order) total += indicators[static_cast<std::size_t>(T)] * indicators[static_cast<std::size_t>(T)];
  std::vector<int> out;
  if (!(total > 0.0)) return out;
  double acc = 0.0;
  for (int T : order) {
    const double v = indicators[static_cast<std::size_t>(T)];
    if (acc >= theta * total || !(v > 0.0)) break;
    out.push_back(T);
    acc += v * v;
  }
  return out;
}

inline std::vector<int> mark(const std::vector<double>& indicators, MarkingStrategy& s, double global_eta,
                             double delta_online) {
  const std::size_t n = indicators.size();
  for (double v : indicators)
    if (!(v >= 0.0)) throw InvalidArgument("mark: indicators must be nonnegative");
  if (s.ages.size() != n) s.ages.assign(n, 0);
  std::vector<char> marked(n, 0);
  const bool uniform = s.kind == MarkingStrategy::Kind::uniform ||
                       (s.kind == MarkingStrategy::Kind::uniform_doerfler_age && global_eta > s.theta_uni * delta_online);
  if (uniform) {
    std::fill(marked.begin(), marked.end(), 1);
  } else {
    for (int T : doerfler_set(indicators, s.theta_doerf)) marked[static_cast<std::size_t>(T)] = 1;
    for (std::size_t T = 0; T < n; ++T)
      if (s.ages[T] > s.n_age) marked[T] = 1;
  }
  std::vector<int> out;
  for (std::size_t T = 0; T < n; ++T) {
    if (marked[T]) {
      s.ages[T] = 0;
      out.push_back(static_cast<int>(T));
    } else {
      ++s.ages[T];
    }
  }
  return out;
}

/// Everything needed to run reduced solves and estimates for one discretization.
struct ReducedModel {
  const AssembledSystem* sys = nullptr;
  const EstimatorContext* estimator = nullptr;
  BasisProducts products;
  Parameter mu_bar, mu_hat;
  std::vector<LocalReducedBasis> bases;
  double gs_tolerance = 1e-10;
  IndicatorVariant indicators = IndicatorVariant::published;

  ReducedModel(const AssembledSystem& s, const EstimatorContext& e, Parameter bar, Parameter hat,
               double gs_tol = 1e-10)
      : sys(&s), estimator(&e), products(s, bar), mu_bar(std::move(bar)), mu_hat(std::move(hat)), gs_tolerance(gs_tol) {}

  ReducedModel(const ReducedModel&) = delete;
  ReducedModel& operator=(const ReducedModel&) = delete;

  int total_size() const {
    int s = 0;
    for (const auto& b : bases) s += b.size();
    return s;
  }
  std::vector<int> sizes() const {
    std::vector<int> s;
    for (const auto& b : bases) s.push_back(b.size());
    return s;
  }
};

struct GreedyRecord {
  int iteration = 0;
  double max_eta = 0.0;
  int argmax = kNone;
  int total_basis_size = 0;
};

struct GreedyResult {
  std::vector<GreedyRecord> log;
  std::vector<Parameter> snapshots;
  std::string termination;
};

/// Weak greedy: coarse initialization, then snapshots at the worst-estimated training parameter.
inline GreedyResult greedy_offline(ReducedModel& model, const std::vector<Parameter>& training, double delta_greedy,
                                   int n_greedy, int k_H, bool tensor = true) {
  if (training.empty() && n_greedy > 0) throw InvalidArgument("greedy_offline: empty training set");
  const DGSpace& space = *model.sys->space;
  model.bases = initialize_bases(model.products, space, k_H, tensor, model.gs_tolerance);
  GreedyResult res;
  for (int n = 0;; ++n) {
    if (n >= n_greedy) {
      res.termination = "max_iterations";
      break;
    }
    ReducedSystem rsys(*model.sys, model.bases);
    GreedyRecord rec;
    rec.iteration = n;
    rec.total_basis_size = model.total_size();
    rec.max_eta = -1.0;
    for (std::size_t i = 0; i < training.size(); ++i) {
      const auto p = rsys.reconstruct(rsys.solve(training[i]));
      const double eta = estimate(*model.estimator, p, training[i], model.mu_bar, model.mu_hat).eta;
      if (eta > rec.max_eta) {
        rec.max_eta = eta;
        rec.argmax = static_cast<int>(i);
      }
    }
    res.log.push_back(rec);
    if (rec.max_eta <= delta_greedy) {
      res.termination = "tolerance";
      break;
    }
    const Parameter& mu = training[static_cast<std::size_t>(rec.argmax)];
    const Eigen::VectorXd snapshot = solve_detailed(*model.sys, mu);
    res.snapshots.push_back(mu);
    for (auto& b : model.bases) model.products.extend(b, restrict_to(space, snapshot, b.T), model.gs_tolerance);
  }
  return res;
}

/// Patch solve on the union of `patch` with the exterior values of p_red as boundary data.
inline Eigen::VectorXd solve_oversampled(const DGSpace& space, const SparseMatrix& B, const Eigen::VectorXd& L,
                                         const std::vector<int>& patch, const Eigen::VectorXd& p_red,
                                         bool symmetric = true) {
  const PatchSystem ps = assemble_patch(space, B, L, patch, p_red);
  const Eigen::VectorXd local = solve_sparse(ps.matrix, ps.load, symmetric);
  return ps.to_global(local, space.size());
}

inline Eigen::VectorXd solve_oversampled(const AssembledSystem& sys, const Parameter& mu, const std::vector<int>& patch,
                                         const Eigen::VectorXd& p_red) {
  return solve_oversampled(*sys.space, sys.matrix(mu), sys.load(mu), patch, p_red, is_symmetric_form(sys));
}

struct EnrichmentStep {
  int param_index = 0;
  int step = 0;
  double eta = 0.0;
  std::vector<int> marked;
  int accepted = 0;
  std::vector<int> basis_sizes;
  int total_basis_size = 0;
};

struct EnrichmentLog {
  std::vector<EnrichmentStep> steps;
  std::string termination;  // "tolerance" or "max_iterations"
  int enrichment_steps() const { return steps.empty() ? 0 : steps.back().step; }
  double initial_eta() const { return steps.front().eta; }
  double final_eta() const { return steps.back().eta; }
};

struct OnlineResult {
  Eigen::VectorXd p_red;
  EnrichmentLog log;
};

/// Adaptive enrichment for one parameter; bases in `model` are extended in place.
inline OnlineResult enrich_online(ReducedModel& model, const Parameter& mu, double delta_online, int n_online,
                                  MarkingStrategy& strategy, int param_index = 0) {
  const AssembledSystem& sys = *model.sys;
  const DGSpace& space = *sys.space;
  const auto& grid = space.grid();
  ReducedSystem rsys(sys, model.bases);
  const SparseMatrix B = sys.matrix(mu);
  const Eigen::VectorXd L = sys.load(mu);
  const bool symmetric = is_symmetric_form(sys);
  OnlineResult out;
  for (int n = 0;; ++n) {
    out.p_red = rsys.reconstruct(rsys.solve(mu));
    const EstimatorReport rep = estimate(*model.estimator, out.p_red, mu, model.mu_bar, model.mu_hat, model.indicators);
    EnrichmentStep rec;
    rec.param_index = param_index;
    rec.step = n;
    rec.eta = rep.eta;
    rec.basis_sizes = model.sizes();
    rec.total_basis_size = model.total_size();
    if (rep.eta <= delta_online) {
      out.log.steps.push_back(rec);
      out.log.termination = "tolerance";
      break;
    }
    if (n >= n_online) {
      out.log.steps.push_back(rec);
      out.log.termination = "max_iterations";
      break;
    }
    rec.marked = mark(rep.indicators, strategy, rep.eta, delta_online);
    std::vector<Eigen::VectorXd> updates(rec.marked.size());
    parallel_for(rec.marked.size(), [&](std::size_t i) {
      const int T = rec.marked[i];
      const auto patch = grid.oversampling_patch(T);
      updates[i] = restrict_to(space, solve_oversampled(space, B, L, patch, out.p_red, symmetric), T);
    });
    for (std::size_t i = 0; i < rec.marked.size(); ++i) {
      const int T = rec.marked[i];
      if (model.products.extend(model.bases[static_cast<std::size_t>(T)], updates[i], model.gs_tolerance)) {
        ++rec.accepted;
        rsys.refresh(T);
      }
    }
    out.log.steps.push_back(rec);
  }
  return out;
}

}  // namespace lrbms
