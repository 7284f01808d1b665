#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <random>

#include "erl/experts.hpp"
#include "support.hpp"

namespace erl {
namespace {

Vector s(double v) { return Vector::Constant(1, v); }

TEST(Robust, PlaysTheMinimizer) {
  const NormHittingCost f(0.2, 2.0);
  EXPECT_EQ(robust_action(s(7.3), f)[0], 7.3);
  Vector y(2);
  y << 1.0, 2.0;
  EXPECT_EQ(robust_action(y, f), y);

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n(0.0, 5.0);
  for (int k = 0; k < 1000; ++k) {
    Vector yy(3), x(3);
    for (int i = 0; i < 3; ++i) {
      yy[i] = n(rng);
      x[i] = n(rng);
    }
    EXPECT_LE(f.value(robust_action(yy, f), yy), f.value(x, yy));
  }
}

class NoMinimizer final : public HittingCost {
 public:
  double value(const Vector&, const Vector&) const override { return 0.0; }
  std::optional<Vector> minimizer(const Vector&) const override { return std::nullopt; }
  Vector subgradient(const Vector& x, const Vector&) const override { return Vector::Zero(x.size()); }
  Matrix hessian(const Vector& x, const Vector&) const override { return Matrix::Zero(x.size(), x.size()); }
  double sharpness() const override { return 0.0; }
};

TEST(Robust, RejectsModelWithoutMinimizer) {
  EXPECT_THROW(robust_action(s(1.0), NoMinimizer{}), UnsupportedError);
}

TEST(Greedy, ScalarSignAnalysis) {
  const auto spec = MemorySpec::single_step(1);
  // alpha < 1: moving one unit costs 1 - alpha more than it saves.
  EXPECT_NEAR(greedy_action(s(10.0), {s(0.0)}, spec, 0.2)[0], 0.0, 1e-9);
  EXPECT_NEAR(greedy_action(s(10.0), {s(0.0)}, spec, 2.0)[0], 10.0, 1e-9);
  EXPECT_EQ(greedy_action(s(4.0), {s(4.0)}, spec, 0.5)[0], 4.0);
  // alpha = 1: flat between the two points; the no-move point wins.
  EXPECT_EQ(greedy_action(s(10.0), {s(3.0)}, spec, 1.0)[0], 3.0);
}

TEST(Greedy, MatchesGridSearchScalar) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-10.0, 10.0), a(0.1, 3.0);
  const auto spec = MemorySpec::scaled_identity(1, {2.0, -1.0});
  for (int k = 0; k < 200; ++k) {
    const double y = u(rng), h1 = u(rng), h2 = u(rng), alpha = a(rng);
    const double x = greedy_action(s(y), {s(h1), s(h2)}, spec, alpha)[0];
    auto obj = [&](double z) { return alpha * std::abs(z - y) + std::abs(z - 2 * h1 + h2); };
    double best = 1e300;
    for (int i = 0; i <= 20000; ++i) best = std::min(best, obj(-40.0 + 80.0 * i / 20000.0));
    EXPECT_LE(obj(x), best + 1e-8);
  }
}

TEST(Greedy, VectorNoWorseThanEndpoints) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> n(0.0, 3.0);
  const auto spec = MemorySpec::single_step(2);
  const NormHittingCost f(1.3, 2.0);
  for (int k = 0; k < 50; ++k) {
    Vector y(2), h(2);
    y << n(rng), n(rng);
    h << n(rng), n(rng);
    const Vector x = greedy_action(y, {h}, spec, f);
    auto obj = [&](const Vector& z) { return f.value(z, y) + (z - h).norm(); };
    EXPECT_LE(obj(x), std::min(obj(y), obj(h)) + 1e-8);
  }
}

TEST(ExpertRunner, WindowHoldsNewestFirst) {
  Instance inst;
  inst.memory = MemorySpec::scaled_identity(1, {2.0, -1.0});
  inst.initial = {s(1.0), s(2.0)};
  inst.contexts = {s(5.0), s(6.0), s(7.0)};
  inst.alpha = 0.5;
  RobustExpert robust;
  ExpertRunner run(inst, robust);
  run.step();
  ASSERT_EQ(run.window().size(), 3u);
  EXPECT_EQ(run.window()[0][0], 5.0);
  EXPECT_EQ(run.window()[1][0], 2.0);
  EXPECT_EQ(run.window()[2][0], 1.0);
  run.step();
  EXPECT_EQ(run.window()[0][0], 6.0);
  EXPECT_EQ(run.window()[1][0], 5.0);
  EXPECT_EQ(run.window()[2][0], 2.0);
  // |5 - (2*2 - 1)| + |6 - (2*5 - 2)|
  EXPECT_DOUBLE_EQ(run.ledger().total(), 2.0 + 2.0);
}

TEST(RunExpert, DeterministicReplay) {
  std::mt19937_64 rng(10);
  const Instance inst = test::random_scalar(rng, 24, 0.6);
  GreedyExpert g;
  const auto a = run_expert(inst, g);
  const auto b = run_expert(inst, g);
  EXPECT_EQ(a.ledger.total(), b.ledger.total());
  EXPECT_EQ(evaluate(inst, a.actions).ledger.total(), a.ledger.total());
}

TEST(AuditCr, Arithmetic) {
  EXPECT_TRUE(audit_cr(10, 10, 1, 0).satisfied);
  EXPECT_FALSE(audit_cr(15, 10, 1.4, 0).satisfied);
  EXPECT_TRUE(audit_cr(14, 10, 1.4, 0).satisfied);
  EXPECT_TRUE(audit_cr(15, 10, 1.4, 1).satisfied);
  EXPECT_DOUBLE_EQ(audit_cr(15, 10, 1.4, 0).ratio, 1.5);
}

TEST(AuditCr, CsvRow) {
  EXPECT_EQ(cr_csv_header(), "instance_id,algorithm,cost,opt_cost,ratio,bound,satisfied");
  EXPECT_EQ(cr_csv_row("3", "ERL", audit_cr(14, 10, 1.4, 0)), "3,ERL,14,10,1.3999999999999999,1.3999999999999999,1");
}

TEST(RobustCrBound, Values) {
  EXPECT_DOUBLE_EQ(robust_cr_bound(0.2, MemorySpec::single_step(1)), 10.0);
  EXPECT_DOUBLE_EQ(robust_cr_bound(3.0, MemorySpec::single_step(1)), 1.0);
  EXPECT_DOUBLE_EQ(robust_cr_bound(0.5, MemorySpec::scaled_identity(1, {1.0, 1.0})), 6.0);
  EXPECT_THROW(robust_cr_bound(0.0, MemorySpec::single_step(1)), DomainError);
}

TEST(OfflineDp, ConstantContexts) {
  const Instance inst = Instance::scalar(3.0, std::vector<double>(10, 3.0), 0.2);
  const auto tr = offline_opt_dp(inst);
  EXPECT_EQ(tr.ledger.total(), 0.0);
  for (const auto& x : tr.actions) EXPECT_EQ(x[0], 3.0);
}

TEST(OfflineDp, TwoStepExample) {
  EXPECT_NEAR(offline_opt_dp(Instance::scalar(0.0, {10.0, 10.0}, 0.2)).ledger.total(), 4.0, 1e-12);
}

// For q = 1, an optimal solution only uses x0 and the contexts, so
// enumerating that finite set is an exact oracle.
TEST(OfflineDp, MatchesBreakpointEnumeration) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> a(0.1, 3.0);
  for (int trial = 0; trial < 40; ++trial) {
    const Instance inst = test::random_scalar(rng, 5, a(rng));
    std::vector<double> cand{inst.initial[0][0]};
    for (const auto& y : inst.contexts) cand.push_back(y[0]);
    double best = 1e300;
    std::vector<double> xs(5);
    std::function<void(int)> rec = [&](int t) {
      if (t == 5) {
        best = std::min(best, evaluate(inst, to_vectors(xs)).ledger.total());
        return;
      }
      for (double c : cand) {
        xs[static_cast<std::size_t>(t)] = c;
        rec(t + 1);
      }
    };
    rec(0);
    EXPECT_NEAR(offline_opt_dp(inst).ledger.total(), best, 1e-9 * (1.0 + best));
  }
}

TEST(OfflineDp, GridRefinement) {
  std::mt19937_64 rng(12);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = test::random_scalar_memory(rng, 24, 0.8, {2.0, -1.0});
    GridSpec coarse, fine;
    coarse.n = 101;
    fine.n = 201;
    const double c = offline_opt_dp(inst, coarse).ledger.total();
    const double f = offline_opt_dp(inst, fine).ledger.total();
    const double slack = 2.0 * dp_grid_spacing(inst, coarse) * inst.horizon();
    EXPECT_NEAR(c, f, slack);
    EXPECT_LE(f, run_expert(inst, RobustExpert{}).ledger.total() + 1e-9);
  }
}

TEST(OfflineDp, SingleStepGridRefinement) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = test::random_scalar(rng, 24, 0.4);
    GridSpec g2001, g4001;
    g4001.n = 4001;
    const double a = offline_opt_dp(inst, g2001).ledger.total();
    const double b = offline_opt_dp(inst, g4001).ledger.total();
    EXPECT_NEAR(a, b, 2.0 * dp_grid_spacing(inst, g2001) * inst.horizon());
  }
}

TEST(OfflineDp, Errors) {
  std::mt19937_64 rng(14);
  EXPECT_THROW(offline_opt_dp(test::random_vector(rng, 3, 2, 0.5)), UnsupportedError);
  const Instance q3 = test::random_scalar_memory(rng, 4, 0.5, {1.0, 0.5, 0.25});
  GridSpec big;
  big.n = 2001;
  EXPECT_THROW(offline_opt_dp(q3, big), UnsupportedError);
}

TEST(OfflineSubgrad, AgreesWithDpAndRobust) {
  std::mt19937_64 rng(15);
  std::uniform_real_distribution<double> a(0.1, 3.0);
  for (int trial = 0; trial < 10; ++trial) {
    const Instance inst = test::random_scalar(rng, 24, a(rng));
    const double dp = offline_opt_dp(inst).ledger.total();
    const double sg = offline_opt_subgrad(inst).ledger.total();
    EXPECT_NEAR(sg, dp, 1e-2 * (1.0 + dp));
    EXPECT_LE(sg, run_expert(inst, RobustExpert{}).ledger.total() + 1e-12);
  }
}

TEST(OfflineSubgrad, ConstantContextsAndVectors) {
  const Instance flat = Instance::scalar(2.0, std::vector<double>(8, 2.0), 0.3);
  EXPECT_LE(offline_opt_subgrad(flat).ledger.total(), 1e-6);
  std::mt19937_64 rng(16);
  const Instance v = test::random_vector(rng, 10, 3, 0.4);
  EXPECT_LE(offline_opt_subgrad(v).ledger.total(), run_expert(v, RobustExpert{}).ledger.total() + 1e-12);
}

}  // namespace
}  // namespace erl
