#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>

#include "lrbms/enrich.hpp"
#include "lrbms/problems.hpp"

using namespace lrbms;

namespace {

struct Fixture {
  Problem prob;
  std::unique_ptr<Discretization> d;
  EstimatorContext ctx;
  ReducedModel model;
  Fixture(Problem p, GridDims coarse, GridDims fine, Parameter bar = {0.1}, Parameter hat = {0.1})
      : prob(std::move(p)),
        d(discretize(prob, coarse, fine)),
        ctx(d->estimator(default_c_eps_sample(prob.parameters))),
        model(*d->sys, ctx, bar, hat) {}
  double detailed_eta(const Parameter& mu) const {
    return estimate(ctx, solve_detailed(*d->sys, mu), mu, model.mu_bar, model.mu_hat).eta;
  }
};

}  // namespace

TEST(Marking, Uniform) {
  auto s = MarkingStrategy::uniform();
  EXPECT_EQ(mark({0.1, 0, 3, 2, 1}, s, 1.0, 0.5), (std::vector<int>{0, 1, 2, 3, 4}));
}

TEST(Marking, DoerflerUsesSquaredIndicators) {
  // squares 9 4 1 1 1, total 16: a third is reached by the largest alone
  const std::vector<double> v{3, 2, 1, 1, 1};
  EXPECT_EQ(doerfler_set(v, 1.0 / 3.0), std::vector<int>{0});
  EXPECT_EQ(doerfler_set(v, 0.8), (std::vector<int>{0, 1}));
  EXPECT_EQ(doerfler_set(v, 0.85), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(doerfler_set({0, 2, 0, 1}, 1.0), (std::vector<int>{1, 3}));
  EXPECT_TRUE(doerfler_set({0, 0}, 0.5).empty());
  // ties go to the lower id
  EXPECT_EQ(doerfler_set({1, 1, 1}, 0.3), std::vector<int>{0});
}

TEST(Marking, AgesForceMarking) {
  auto s = MarkingStrategy::doerfler_age(0.5, 2);
  const std::vector<double> v{3, 1, 1};
  for (int call = 0; call < 3; ++call) EXPECT_EQ(mark(v, s, 1.0, 1.0), std::vector<int>{0}) << call;
  EXPECT_EQ(s.ages, (std::vector<int>{0, 3, 3}));
  EXPECT_EQ(mark(v, s, 1.0, 1.0), (std::vector<int>{0, 1, 2}));
  EXPECT_EQ(s.ages, (std::vector<int>{0, 0, 0}));
  EXPECT_THROW(mark({-1.0, 1.0, 1.0}, s, 1.0, 1.0), InvalidArgument);
}

TEST(Marking, UniformPhaseFarFromTolerance) {
  auto s = MarkingStrategy::uniform_doerfler_age(10.0, 0.5, 4);
  const std::vector<double> v{3, 1, 1};
  EXPECT_EQ(mark(v, s, 11.0, 1.0).size(), 3u);
  EXPECT_EQ(mark(v, s, 9.0, 1.0), std::vector<int>{0});
  EXPECT_EQ(s.name(), "uniform_doerfler_age");
}

TEST(Greedy, NoIterationsKeepsInitialization) {
  Fixture f(academic_problem(), {2, 2}, {2, 2});
  const auto res = greedy_offline(f.model, {{0.5}}, 0.0, 0, 1);
  EXPECT_TRUE(res.log.empty());
  EXPECT_EQ(res.termination, "max_iterations");
  EXPECT_EQ(f.model.total_size(), 16);
}

TEST(Greedy, SnapshotMatchesDetailedEstimate) {
  Fixture f(academic_problem(), {2, 2}, {4, 4});
  const Parameter mu{0.45};
  const auto res = greedy_offline(f.model, {mu}, 0.0, 1, 1);
  ASSERT_EQ(res.snapshots.size(), 1u);
  const ReducedSystem rs(*f.d->sys, f.model.bases);
  const auto p = rs.reconstruct(rs.solve(mu));
  const double eta_red = estimate(f.ctx, p, mu, f.model.mu_bar, f.model.mu_hat).eta;
  EXPECT_NEAR(eta_red, f.detailed_eta(mu), 1e-6 * f.detailed_eta(mu));
}

TEST(Greedy, InfiniteToleranceStopsImmediately) {
  Fixture f(channel_problem(), {5, 1}, {2, 2});
  const auto res = greedy_offline(f.model, {{0.1}, {1.0}}, std::numeric_limits<double>::infinity(), 5, 1);
  ASSERT_EQ(res.log.size(), 1u);
  EXPECT_EQ(res.termination, "tolerance");
  EXPECT_TRUE(res.snapshots.empty());
}

TEST(Online, ToleranceAlreadyMet) {
  Fixture f(academic_problem(), {2, 2}, {2, 2});
  greedy_offline(f.model, {}, 0.0, 0, 1);
  auto s = MarkingStrategy::uniform();
  const auto out = enrich_online(f.model, {0.3}, std::numeric_limits<double>::infinity(), 50, s);
  EXPECT_EQ(out.log.enrichment_steps(), 0);
  EXPECT_EQ(out.log.termination, "tolerance");
  EXPECT_EQ(f.model.total_size(), 16);
}

TEST(Online, ZeroIterationBudget) {
  Fixture f(academic_problem(), {2, 2}, {2, 2});
  greedy_offline(f.model, {}, 0.0, 0, 1);
  auto s = MarkingStrategy::uniform();
  const auto out = enrich_online(f.model, {0.3}, 0.0, 0, s);
  EXPECT_EQ(out.log.enrichment_steps(), 0);
  EXPECT_EQ(out.log.termination, "max_iterations");
  EXPECT_EQ(out.log.steps.size(), 1u);
}

TEST(Online, UniformMarkingKeepsSizesEqual) {
  Fixture f(academic_problem(), {4, 4}, {4, 4}, {1.0}, {1.0});
  greedy_offline(f.model, {}, 0.0, 0, 1);
  auto s = MarkingStrategy::uniform();
  const Parameter mu{1.0};
  const double delta = 1.1 * f.detailed_eta(mu);
  const auto out = enrich_online(f.model, mu, delta, 20, s);
  EXPECT_EQ(out.log.termination, "tolerance");
  EXPECT_GT(out.log.enrichment_steps(), 0);
  EXPECT_LE(out.log.final_eta(), delta);
  const auto sz = f.model.sizes();
  EXPECT_EQ(*std::min_element(sz.begin(), sz.end()), *std::max_element(sz.begin(), sz.end()));
  for (const auto& st : out.log.steps)
    if (st.step < out.log.enrichment_steps()) {
      EXPECT_EQ(st.marked.size(), 16u);
    }
}

TEST(PatchSolve, DetailedDataGivesNothingNew) {
  Fixture f(academic_problem(), {3, 3}, {2, 2});
  const Parameter mu{0.8};
  const Eigen::VectorXd ph = solve_detailed(*f.d->sys, mu);
  // the patch problem is solved by the restriction of p_h
  for (int T : {0, 4, 7}) {
    const auto patch = f.d->grid->oversampling_patch(T);
    const Eigen::VectorXd u = solve_oversampled(*f.d->sys, mu, patch, ph);
    for (int S : patch)
      EXPECT_LE((restrict_to(*f.d->space, u, S) - restrict_to(*f.d->space, ph, S)).norm(), 1e-9 * ph.norm());
  }
  const int T = 4;
  auto bases = initialize_bases(f.model.products, *f.d->space, 1);
  ASSERT_TRUE(f.model.products.extend(bases[T], restrict_to(*f.d->space, ph, T)));
  const Eigen::VectorXd u = solve_oversampled(*f.d->sys, mu, f.d->grid->oversampling_patch(T), ph);
  EXPECT_FALSE(f.model.products.extend(bases[T], restrict_to(*f.d->space, u, T)));
}

TEST(PatchSolve, WholeDomainIsDetailedSolve) {
  Fixture f(channel_problem(), {5, 2}, {2, 2});
  const Parameter mu{0.2};
  std::vector<int> all(10);
  std::iota(all.begin(), all.end(), 0);
  const Eigen::VectorXd ph = solve_detailed(*f.d->sys, mu);
  const Eigen::VectorXd u = solve_oversampled(*f.d->sys, mu, all, Eigen::VectorXd::Zero(ph.size()));
  EXPECT_LE((u - ph).norm(), 1e-9 * ph.norm());
}

TEST(PatchSolve, ZeroDataZeroSolution) {
  TwoLevelGrid g({0, 0, 1, 1}, {3, 3}, {2, 2});
  DGSpace space(g, 1);
  const auto sys = assemble(space, AffineParametricScalar::constant(1.0), DiffusionTensor::uniform(g, Eigen::Matrix2d::Identity()),
                            {SpatialFunction::constant(0.0), 0});
  const Eigen::VectorXd u = solve_oversampled(sys, {0.0}, g.oversampling_patch(4), Eigen::VectorXd::Zero(space.size()));
  EXPECT_EQ(u.norm(), 0.0);
}
