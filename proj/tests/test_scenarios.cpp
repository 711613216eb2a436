#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "carnot/io.hpp"
#include "carnot/scenarios.hpp"
#include "oracles.hpp"

using namespace carnot;

namespace {

double lambda4_closed_form(const EmainParams& p, double t) {
  return oracle::lambda4_closed_form(p.lambda5, p.lambda6, p.lambda4_0, p.sign_branch, t);
}

EmainParams params(double l5, double l6, double l40 = 0.0, int sign = 1, double T = 2.0, double dt = 1e-4) {
  EmainParams p;
  p.lambda5 = l5;
  p.lambda6 = l6;
  p.lambda4_0 = l40;
  p.sign_branch = sign;
  p.T = T;
  p.dt = dt;
  return p;
}

}  // namespace

TEST(EmainSolve, InitialRate) {
  const auto s = emain_solve(params(1, 1));
  EXPECT_EQ(s.lambda4[0], 0.0);
  EXPECT_EQ(s.lambda4_rate[0], 1.0);
  EXPECT_EQ(s.gamma1[0], 1.0);
  EXPECT_EQ(s.gamma2[0], 0.0);
  EXPECT_EQ(s.grid.count, 20001);
}

TEST(EmainSolve, ArcLengthAndConservation) {
  for (const auto& p : {params(1, 1), params(2, 1), params(1, 3), params(-1.5, 0.5, 0.3), params(1, -2, -1, -1),
                        params(0.2, 4, 2, 1, 5.0)}) {
    const auto s = emain_solve(p);
    double arc = 0.0, invariant = 0.0;
    bool same_sign = true;
    for (int k = 0; k < s.grid.count; ++k) {
      const double l4 = s.lambda4[k], d = s.lambda4_rate[k];
      arc = std::max(arc, std::abs(s.gamma1[k] * s.gamma1[k] + s.gamma2[k] * s.gamma2[k] - 1.0));
      invariant = std::max(invariant, std::abs(d * d * (l4 * l4 + p.lambda5 * p.lambda5) -
                                       p.lambda5 * p.lambda5 * p.lambda6 * p.lambda6));
      same_sign = same_sign && (d * s.lambda4_rate[0] > 0.0);
    }
    EXPECT_LE(arc, 1e-10);
    EXPECT_LE(invariant, 1e-10);
    EXPECT_TRUE(same_sign);
  }
}

TEST(EmainSolve, ClosedFormOracle) {
  for (const auto& [l5, l6] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{1.0, 3.0}}) {
    for (double T : {1.0, 2.0}) {
      const auto p = params(l5, l6, 0.0, 1, T);
      const auto s = emain_solve(p);
      EXPECT_NEAR(s.lambda4[s.grid.count - 1], lambda4_closed_form(p, T), 1e-8) << l5 << ' ' << l6 << ' ' << T;
    }
  }
  // lambda_5 = lambda_6 = 1: (u/2) sqrt(u^2 + 1) + asinh(u)/2 = t
  const auto s = emain_solve(params(1, 1, 0.0, 1, 1.0));
  const double u = s.lambda4[s.grid.count - 1];
  EXPECT_NEAR(0.5 * u * std::sqrt(u * u + 1) + 0.5 * std::asinh(u), 1.0, 1e-8);
}

TEST(EmainSolve, OtherBranchesAndStarts) {
  for (const auto& p : {params(1, 1, 0.5, -1, 1.5), params(-2, 1, -0.7, 1, 1.0), params(1, -3, 1.0, -1, 1.0)}) {
    const auto s = emain_solve(p);
    EXPECT_NEAR(s.lambda4[s.grid.count - 1], lambda4_closed_form(p, p.T), 1e-8);
  }
}

TEST(EmainSolve, SecondDerivativeFormula) {
  const auto p = params(1.3, 0.7, -0.4);
  const auto s = emain_solve(p);
  for (int k = 0; k < s.grid.count; k += 997) {
    const double l4 = s.lambda4[k], d = s.lambda4_rate[k];
    EXPECT_NEAR(s.lambda4_accel[k], -l4 * std::pow(d, 4) / (p.lambda5 * p.lambda5 * p.lambda6 * p.lambda6), 1e-14);
  }
}

TEST(EmainSolve, RejectsDegenerateParameters) {
  EXPECT_THROW(emain_solve(params(0, 1)), PreconditionError);
  EXPECT_THROW(emain_solve(params(1, 0)), PreconditionError);
  EXPECT_THROW(emain_solve(params(1, 1, 0, 2)), InputError);
  EXPECT_THROW(emain_solve(params(1, 1, 0, 1, 1.0, 0.0)), InputError);
  EXPECT_THROW(emain_solve(params(1, 1, 0, 1, -1.0)), InputError);
}

TEST(RunPaper6, DefaultParametersPassEveryCheck) {
  const auto rep = run_paper6(params(1, 1));
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " = " << c.value;
  EXPECT_TRUE(rep.pass());
  EXPECT_LE(rep.residual("abnormal").max_sup(), 1e-8);
  EXPECT_LE(rep.check("lambda4_invariant").value, 1e-10);
  EXPECT_LE(rep.check("lambda4pp_consistency").value, 1e-6);
  EXPECT_LE(rep.check("h3_consistency").value, 1e-6);
  EXPECT_GT(rep.check("gamma1_variation").value, 0.01);
  ASSERT_EQ(rep.classifications.size(), 1u);
  EXPECT_EQ(rep.classifications[0].second, "regular");
}

TEST(RunPaper6, ConstantCovectorComponents) {
  const auto rep = run_paper6(params(1, 1));
  ASSERT_TRUE(rep.lift_csv);
  const auto& lam = rep.lift_csv->coeffs;
  EXPECT_TRUE((lam.col(4).array() == 1.0).all());
  EXPECT_TRUE((lam.col(5).array() == 1.0).all());
  EXPECT_TRUE((lam.leftCols(3).array() == 0.0).all());
  EXPECT_EQ(rep.residual("abnormal").at("costate_5").sup, 0.0);
  EXPECT_EQ(rep.residual("abnormal").at("costate_6").sup, 0.0);
  ASSERT_TRUE(rep.trajectory);
  EXPECT_EQ(rep.trajectory->lift_kind, LiftKind::abnormal);
  EXPECT_EQ(rep.trajectory->size(), 20001);
}

TEST(RunPaper6, OtherParameters) {
  for (const auto& p : {params(2, 1), params(1, 3), params(1, 1, 0.5, -1), params(-1, 2, 0, 1, 0.5, 1e-3)}) {
    const auto rep = run_paper6(p);
    for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " = " << c.value;
  }
}

TEST(RunPaper6, SampledDerivativesAgree) {
  const auto rep = run_paper6(params(1, 1));
  double l4pp_fd = -1.0, h3_fd = -1.0;
  for (const auto& [k, v] : rep.metrics) {
    if (k == "lambda4pp_finite_difference") l4pp_fd = v;
    if (k == "h3_finite_difference") h3_fd = v;
  }
  EXPECT_GE(l4pp_fd, 0.0);
  EXPECT_LE(l4pp_fd, 1e-6);
  EXPECT_GE(h3_fd, 0.0);
  EXPECT_LE(h3_fd, 1e-6);
}

TEST(RunPaper6, RejectsZeroLambda5) {
  EXPECT_THROW(run_paper6(params(0, 1)), PreconditionError);
}

TEST(RunFree24, BothLiftsPass) {
  const auto rep = run_free24();
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " = " << c.value;
  EXPECT_LE(rep.residual("abnormal").max_sup(), 1e-12);
  EXPECT_LE(rep.residual("normal").max_sup(), 1e-12);
  EXPECT_EQ(rep.residual("abnormal").grid.count, 1024);
  ASSERT_TRUE(rep.trajectory);
  ASSERT_TRUE(rep.lift_csv_h);
}

TEST(RunEngel, Verdicts) {
  const auto rep = run_engel();
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " = " << c.value;
  EXPECT_EQ(rep.residual("abnormal_e2").max_sup(), 0.0);
  EXPECT_TRUE(rep.residual("normal_e2").pass);
  EXPECT_FALSE(rep.residual("abnormal_e1").pass);
  EXPECT_EQ(rep.residual("abnormal_e1").at("costate_3").sup, 1.0);
}

TEST(RunHeisenbergKernel, Verdicts) {
  const auto rep = run_heisenberg_kernel();
  for (const auto& c : rep.checks) EXPECT_TRUE(c.pass) << c.name << " = " << c.value;
  EXPECT_EQ(rep.check("nontrivial_kernels").value, 0.0);
  EXPECT_EQ(rep.check("zero_covector_kernel_dim").value, 2.0);
}

TEST(Scenarios, ReportsAreDeterministic) {
  EXPECT_EQ(to_json(run_engel(7)).dump(), to_json(run_engel(7)).dump());
  EXPECT_EQ(to_json(run_heisenberg_kernel(7)).dump(), to_json(run_heisenberg_kernel(7)).dump());
  EXPECT_EQ(to_json(run_paper6(params(1, 1, 0, 1, 0.5, 1e-3))).dump(),
            to_json(run_paper6(params(1, 1, 0, 1, 0.5, 1e-3))).dump());
}

TEST(Scenarios, FailedCheckFailsReport) {
  ScenarioReport rep;
  EXPECT_FALSE(rep.pass());
  rep.checks.push_back(check_at_most("a", 1.0, 2.0));
  EXPECT_TRUE(rep.pass());
  rep.checks.push_back(check_above("b", 1.0, 2.0));
  EXPECT_FALSE(rep.pass());
}

TEST(Io, ResidualReportJson) {
  const auto rep = run_free24(64);
  const auto j = to_json(rep.residual("normal"));
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_EQ(j["tolerance"], 1e-12);
  EXPECT_TRUE(j.contains("costate_5"));
  EXPECT_TRUE(j["costate_5"].contains("sup"));
  EXPECT_TRUE(j["costate_5"].contains("l2"));
}

TEST(Io, LiftCsvRoundTrip) {
  const auto rep = run_free24(64);
  std::ostringstream os;
  write_lift_csv(os, rep.lift_csv->grid, rep.lift_csv->gamma, &rep.lift_csv->coeffs, &*rep.lift_csv_h);
  const auto back = parse_lift_csv(os.str(), 8, 2);
  EXPECT_EQ(back.gamma, rep.lift_csv->gamma);
  ASSERT_TRUE(back.lambda);
  ASSERT_TRUE(back.h);
  EXPECT_EQ(*back.lambda, rep.lift_csv->coeffs);
  EXPECT_EQ(*back.h, *rep.lift_csv_h);
  EXPECT_EQ(back.grid.count, 64);
  EXPECT_NEAR(back.grid.dt, rep.lift_csv->grid.dt, 1e-15);
}

TEST(Io, LiftCsvColumnOrderIsFree) {
  const auto f = parse_lift_csv("l3,t,g2,g1,l1,l2\n1,0,0,1,0,0\n1,0.5,0,1,0,0\n1,1,0,1,0,0\n", 3, 2);
  EXPECT_EQ(f.gamma(0, 0), 1.0);
  EXPECT_EQ((*f.lambda)(2, 2), 1.0);
  EXPECT_FALSE(f.h);
}

TEST(Io, LiftCsvErrors) {
  const auto line_of = [](const std::string& text) {
    try {
      parse_lift_csv(text, 3, 2);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("t,g1,g2\n0,1,0\n1,1,0\n"), 1);          // no lift columns
  EXPECT_EQ(line_of("t,g1,l1,l2,l3\n0,1,0,0,1\n"), 1);       // missing g2
  EXPECT_EQ(line_of("t,g1,g2,l1,l2,l3,x\n"), 1);             // unknown column
  EXPECT_EQ(line_of("t,g1,g2,l1,l2,l3\n0,1,0,0,0,1\n0.5,1,0,0,0\n"), 3);
  EXPECT_EQ(line_of("t,g1,g2,l1,l2,l3\n0,1,0,0,0,1\n0.5,1,zero,0,0,1\n"), 3);
  EXPECT_THROW(parse_lift_csv("t,g1,g2,l1,l2,l3\n0,1,0,0,0,1\n0.1,1,0,0,0,1\n1,1,0,0,0,1\n", 3, 2), ParseError);
}

TEST(Io, TrajectoryCsvHeaderAndPrecision) {
  const auto a = builtin("heisenberg3");
  const auto tr = integrate_normal(a, Vector::Zero(3), Vector{{1.0, 0.0, 1.0}}, IntegratorConfig{0.1, 0.2});
  std::ostringstream os;
  write_trajectory_csv(os, tr);
  std::istringstream in(os.str());
  std::string header, row;
  std::getline(in, header);
  EXPECT_EQ(header, "t,x1,x2,x3,g1,g2,h1,h2,h3");
  std::getline(in, row);
  std::getline(in, row);
  // 0.1 needs 17 significant digits to round-trip
  EXPECT_EQ(row.substr(0, row.find(',')), "0.10000000000000001");
  const auto meta = trajectory_metadata(tr);
  EXPECT_EQ(meta["lift_kind"], "normal");
  EXPECT_EQ(meta["integrator_order"], 4);
  EXPECT_EQ(meta["samples"], 3);
}
