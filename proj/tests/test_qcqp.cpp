#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"
#include "gridflow/error.hpp"
#include "gridflow/qcqp.hpp"
#include "gridflow/reduce.hpp"
#include "gridflow/solver.hpp"

using namespace gridflow;
using fixtures::single_arc;

TEST(Evaluate, ZeroFlowZeroDemand) {
  auto q = single_arc(10, 1, 0, 0);
  auto e = evaluate(q, FlowPoint::zeros(1));
  EXPECT_EQ(e.objective, 0.0);
  EXPECT_TRUE(e.feasible());
  EXPECT_EQ(static_cast<int>(e.residuals.size()), q.num_constraints());
}

TEST(Evaluate, LossRowResidual) {
  auto q = single_arc(10, 1, 0, 0, 0.1);
  auto e = evaluate(q, {{1.0}, {1.0}});
  EXPECT_NEAR(e.residuals[0], 0.1, 1e-15);
  EXPECT_FALSE(e.feasible());
}

TEST(Evaluate, GreedyOptimalPoint) {
  BuiltQcqp b = build_qcqp(fixtures::greedy_spgg());
  const auto& q = b.qcqp;
  // rates 1/2 per source: s1 uses its cheap piece, s2 its only piece
  FlowPoint z = FlowPoint::zeros(q.num_arcs());
  for (int a = 0; a < q.num_arcs(); ++a) {
    const Tag& t = b.prov.arcs[a];
    double v = 0.0;
    if (t.origin == Origin::Production) v = (t.source == 0 && t.piece == 1) ? 0.0 : 0.5;
    if (t.origin == Origin::Delegation) v = (t.source == 0 && t.piece == 1) ? 0.0 : 0.5;
    if (t.origin == Origin::GridEdge) v = 0.5;
    z.x[a] = z.y[a] = v;
  }
  auto e = evaluate(q, z);
  EXPECT_NEAR(e.objective, 3.0, 1e-12);
  EXPECT_LE(e.max_residual(), 1e-12);
}

TEST(Evaluate, ConstraintCountAndOrder) {
  std::mt19937_64 rng(1);
  auto q = fixtures::random_qcqp(rng);
  const int A = q.num_arcs();
  int transit = static_cast<int>(q.transit_nodes().size());
  EXPECT_EQ(q.num_constraints(), 3 * A + transit + static_cast<int>(q.sinks.size()));
  auto labels = row_labels(q);
  ASSERT_EQ(static_cast<int>(labels.size()), q.num_constraints());
  EXPECT_EQ(labels[0].family, RowFamily::Loss);
  EXPECT_EQ(labels[A].family, RowFamily::Capacity);
  EXPECT_EQ(labels[2 * A].family, RowFamily::NonNegativity);
  EXPECT_EQ(labels[3 * A].family, RowFamily::Conservation);
  EXPECT_EQ(labels.back().family, RowFamily::Demand);
  for (int i = 3 * A + 1; i < 3 * A + transit; ++i) EXPECT_LT(labels[i - 1].index, labels[i].index);
}

TEST(Derivatives, Examples) {
  auto q = single_arc(10, 1.5, 0.25, 1, 0.05);
  q.arcs[0].rho = 0.8;
  auto d = derivatives(q, FlowPoint::zeros(1));
  // loss row is first, its x entry carries -rho at the origin
  for (int k = d.row_ptr[0]; k < d.row_ptr[1]; ++k)
    if (d.cols[k] == x_var(0)) EXPECT_DOUBLE_EQ(d.grad[k], -0.8);
  EXPECT_DOUBLE_EQ(d.obj_hess_diag[x_var(0)], 0.5);
  EXPECT_DOUBLE_EQ(d.obj_grad[x_var(0)], 1.5);
}

TEST(Derivatives, MatchCentralDifferences) {
  std::mt19937_64 rng(42);
  for (int rep = 0; rep < 20; ++rep) {
    auto q = fixtures::random_qcqp(rng, 3, true);
    FlowPoint z = fixtures::random_point(rng, q);
    auto d = derivatives(q, z);
    auto v = pack(z);
    const double h = 1e-6;
    auto at = [&](const std::vector<double>& w) { return evaluate(q, unpack(w, q.num_arcs())); };
    auto rel = [](double a, double b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); };
    for (int j = 0; j < q.num_vars(); ++j) {
      auto p = v, m = v;
      p[j] += h;
      m[j] -= h;
      auto ep = at(p), em = at(m);
      EXPECT_LE(rel(d.obj_grad[j], (ep.objective - em.objective) / (2 * h)), 1e-5);
      // Hessian diagonal as a central difference of the analytic gradient
      auto dp = derivatives(q, unpack(p, q.num_arcs())), dm = derivatives(q, unpack(m, q.num_arcs()));
      EXPECT_LE(rel(d.obj_hess_diag[j], (dp.obj_grad[j] - dm.obj_grad[j]) / (2 * h)), 1e-5);
      for (std::size_t i = 0; i + 1 < d.row_ptr.size(); ++i) {
        double g = 0.0, hh = 0.0, gp = 0.0, gm = 0.0;
        for (int k = d.row_ptr[i]; k < d.row_ptr[i + 1]; ++k)
          if (d.cols[k] == j) {
            g = d.grad[k];
            hh = d.hess_diag[k];
            gp = dp.grad[k];
            gm = dm.grad[k];
          }
        EXPECT_LE(rel(g, (ep.residuals[i] - em.residuals[i]) / (2 * h)), 1e-5);
        EXPECT_LE(rel(hh, (gp - gm) / (2 * h)), 1e-5);
        EXPECT_GE(hh, 0.0);  // convex rows
      }
    }
  }
}

TEST(Harden, ShiftsEveryResidual) {
  std::mt19937_64 rng(9);
  auto q = fixtures::random_qcqp(rng);
  EXPECT_EQ(harden(q, 0.0), q);
  auto h = harden(q, 0.25);
  for (int rep = 0; rep < 10; ++rep) {
    FlowPoint z = fixtures::random_point(rng, q);
    auto a = evaluate(q, z), b = evaluate(h, z);
    EXPECT_EQ(a.objective, b.objective);
    for (std::size_t i = 0; i < a.residuals.size(); ++i) EXPECT_NEAR(b.residuals[i], a.residuals[i] + 0.25, 1e-14);
  }
  EXPECT_THROW(harden(q, -1.0), ParameterError);
}

TEST(Harden, CapacityAndDemandRows) {
  auto q = harden(single_arc(10, 1, 0, 4), 0.5);
  // x = 9.5 sits on the hardened capacity bound, y = 4.5 on the demand bound
  auto e = evaluate(q, {{9.5}, {4.5}});
  EXPECT_NEAR(e.residuals[1], 0.0, 1e-14);
  EXPECT_NEAR(e.residuals.back(), 0.0, 1e-14);
}

TEST(SlackProgram, SignAndShift) {
  auto feasible = single_arc(10, 1, 0, 4);
  double b0 = slack_optimum(feasible, 1e-9);
  EXPECT_LT(b0, 0.0);
  EXPECT_NEAR(slack_optimum(harden(feasible, 0.3), 1e-9), b0 + 0.3, 1e-6);
  auto infeasible = single_arc(2, 1, 0, 3);
  EXPECT_GT(slack_optimum(infeasible, 1e-9), 0.0);
}

TEST(SlackProgram, Structure) {
  auto q = single_arc(10, 1, 0, 4);
  auto s = slack_program(q, 0.1);
  EXPECT_EQ(s.slack, q.num_vars());
  EXPECT_EQ(s.program.n, q.num_vars() + 1);
  EXPECT_EQ(s.program.rows(), q.num_constraints());
  EXPECT_EQ(s.program.obj_lin[s.slack], 1.0);
}

TEST(Constants, SingleArc) {
  auto c = constants(single_arc(10, 1, 0, 4));
  EXPECT_NEAR(c.sigma, 10 * std::sqrt(2.0), 1e-12);
  EXPECT_DOUBLE_EQ(c.F, 4.0);
  EXPECT_DOUBLE_EQ(c.iota_product, 1.0);
  EXPECT_DOUBLE_EQ(c.gamma_bound, std::sqrt(2.0));
  EXPECT_DOUBLE_EQ(c.R_bound, std::sqrt(2.0) * 10);
  EXPECT_DOUBLE_EQ(c.M_bound, 10.0);
  EXPECT_GT(c.W, 0.0);
}

TEST(Constants, QEpsAndIota) {
  auto c = constants(single_arc(10, 1, 0, 4));
  EXPECT_NEAR(c.q_eps(1.0), 1.0 / 6.0, 1e-15);
  auto lossy = constants(single_arc(10, 1, 0, 4, 0.04));
  EXPECT_NEAR(lossy.iota_product, 5.0, 1e-12);
  EXPECT_THROW(constants(single_arc(10, 1, 0, 4, 0.05)), InvariantError);
}

TEST(Gamma, InverseAndIota) {
  QcqpArc a{0, 1, 1.0, 0.1, 2.0, 0, 0};
  EXPECT_NEAR(gamma_inverse(a, 0.8), (1 - std::sqrt(0.68)) / 0.2, 1e-14);
  EXPECT_NEAR(gamma(a, gamma_inverse(a, 0.5)), 0.5, 1e-14);
  EXPECT_NEAR(iota(a), 0.6, 1e-15);
  QcqpArc lin{0, 1, 0.5, 0.0, 2.0, 0, 0};
  EXPECT_DOUBLE_EQ(gamma_inverse(lin, 0.3), 0.6);
}

TEST(ValidateQcqp, RejectsBadArcs) {
  auto q = single_arc(10, 1, 0, 4);
  q.arcs[0].u = 0.0;
  EXPECT_THROW(validate_qcqp(q), ValidationError);
  q = single_arc(10, 1, 0, 4);
  q.arcs.push_back({1, 0, 1, 0, 1, 0, 0});
  EXPECT_THROW(validate_qcqp(q), ValidationError);
}

TEST(Properties, FeasibleImpliesOrdered) {
  std::mt19937_64 rng(12);
  auto q = fixtures::random_qcqp(rng);
  int hits = 0;
  for (int rep = 0; rep < 2000; ++rep) {
    FlowPoint z = fixtures::random_point(rng, q);
    if (!evaluate(q, z).feasible()) continue;
    ++hits;
    for (int a = 0; a < q.num_arcs(); ++a) {
      EXPECT_GE(z.y[a], 0.0);
      EXPECT_LE(z.y[a], z.x[a]);
      EXPECT_LE(z.x[a], q.arcs[a].u);
    }
  }
  SUCCEED() << hits << " feasible samples";
}

TEST(Properties, OptAtLeastF) {
  std::mt19937_64 rng(21);
  for (int rep = 0; rep < 5; ++rep) {
    auto q = fixtures::random_qcqp(rng);
    auto r = barrier_solve(q, 1e-6);
    EXPECT_GE(r.objective + 1e-6, constants(q).F);
  }
}
