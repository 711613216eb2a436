#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "carnot/equations.hpp"
#include "carnot/flag.hpp"
#include "carnot/integrate.hpp"
#include "carnot/two_step.hpp"

namespace carnot {

/// Parameters of the strictly abnormal family on paper6, where lambda_4
/// solves (lambda_4')^2 (lambda_4^2 + lambda_5^2) = lambda_5^2 lambda_6^2.
struct EmainParams {
  double lambda5 = 1.0;
  double lambda6 = 1.0;
  double lambda4_0 = 0.0;
  int sign_branch = 1;
  double T = 2.0;
  double dt = 1e-4;

  void validate() const {
    if (lambda5 == 0.0) throw PreconditionError("lambda5 must be nonzero");
    if (lambda6 == 0.0) throw PreconditionError("lambda6 must be nonzero");
    if (!std::isfinite(lambda5) || !std::isfinite(lambda6)) throw InputError("lambda5 and lambda6 must be finite");
    if (!std::isfinite(lambda4_0)) throw InputError("lambda4(0) must be finite");
    if (sign_branch != 1 && sign_branch != -1) throw InputError("sign branch must be +1 or -1");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw InputError("dt must be positive");
    if (!(T > 0.0) || !std::isfinite(T)) throw InputError("T must be positive");
  }

  /// lambda_4' as a function of lambda_4 (explicit square-root branch).
  double rate(double lambda4) const {
    return sign_branch * lambda5 * lambda6 / std::sqrt(lambda4 * lambda4 + lambda5 * lambda5);
  }

  /// lambda_4'' by the chain rule through rate().
  double accel(double lambda4) const {
    const double q = lambda4 * lambda4 + lambda5 * lambda5;
    return -sign_branch * lambda5 * lambda6 * lambda4 * rate(lambda4) / (q * std::sqrt(q));
  }
};

struct EmainSolution {
  EmainParams params;
  UniformGrid grid;
  Vector lambda4;
  Vector lambda4_rate;
  Vector lambda4_accel;
  Vector gamma1;  ///< lambda_4' / lambda_6
  Vector gamma2;  ///< -lambda_4 lambda_4' / (lambda_5 lambda_6)
};

inline EmainSolution emain_solve(const EmainParams& p) {
  p.validate();
  const long steps = std::max(1L, std::lround(p.T / p.dt));
  const int m = static_cast<int>(steps + 1);
  EmainSolution s{p, {0.0, p.dt, m}, Vector(m), Vector(m), Vector(m), Vector(m), Vector(m)};
  double y = p.lambda4_0;
  for (int k = 0; k < m; ++k) {
    s.lambda4[k] = y;
    s.lambda4_rate[k] = p.rate(y);
    s.lambda4_accel[k] = p.accel(y);
    s.gamma1[k] = s.lambda4_rate[k] / p.lambda6;
    s.gamma2[k] = -y * s.lambda4_rate[k] / (p.lambda5 * p.lambda6);
    if (k + 1 == m) break;
    const double k1 = p.rate(y);
    const double k2 = p.rate(y + 0.5 * p.dt * k1);
    const double k3 = p.rate(y + 0.5 * p.dt * k2);
    const double k4 = p.rate(y + p.dt * k3);
    y += p.dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return s;
}

/// One quantitative verdict: value compared against threshold.
struct Check {
  std::string name;
  double value = 0.0;
  double threshold = 0.0;
  std::string relation;  ///< "<=", ">" or "=="
  bool pass = false;
};

inline Check check_at_most(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, "<=", value <= threshold};
}
inline Check check_above(std::string name, double value, double threshold) {
  return {std::move(name), value, threshold, ">", value > threshold};
}
inline Check check_equal(std::string name, double value, double expected) {
  return {std::move(name), value, expected, "==", value == expected};
}

struct ScenarioReport {
  std::string name;
  std::vector<std::pair<std::string, ResidualReport>> residuals;
  std::vector<std::pair<std::string, std::string>> classifications;
  std::vector<Check> checks;
  std::vector<std::pair<std::string, double>> metrics;  ///< informational, no verdict
  std::vector<std::pair<std::string, double>> config;
  std::vector<std::string> notes;
  std::vector<std::string> artifacts;
  std::optional<Trajectory> trajectory;
  std::optional<LiftSamples> lift_csv;  ///< lift emitted as a CSV artifact
  std::optional<Matrix> lift_csv_h;     ///< optional second (normal) covector for the CSV

  bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
  }

  const Check& check(const std::string& n) const {
    for (const auto& c : checks)
      if (c.name == n) return c;
    throw InputError("no check named '" + n + "'");
  }

  const ResidualReport& residual(const std::string& n) const {
    for (const auto& [k, r] : residuals)
      if (k == n) return r;
    throw InputError("no residual report named '" + n + "'");
  }

  /// A residual report that must pass; also recorded as a check.
  void add_residual(std::string key, ResidualReport rep, bool expect_pass = true) {
    const double bound = rep.tolerance;
    const double worst = rep.max_sup();
    checks.push_back({key + (expect_pass ? "_residual" : "_residual_fails"), worst, bound,
                      expect_pass ? "<=" : ">", rep.pass == expect_pass});
    residuals.emplace_back(std::move(key), std::move(rep));
  }
};

/// Strictly abnormal curve on paper6 built from a solution of the lambda_4
/// equation, with every computable condition checked.
inline ScenarioReport run_paper6(const EmainParams& p) {
  p.validate();
  const auto a = builtin("paper6");
  const auto sol = emain_solve(p);
  const int m = sol.grid.count;
  const double l5 = p.lambda5, l6 = p.lambda6;

  ScenarioReport rep;
  rep.name = "paper6";
  rep.config = {{"lambda5", l5}, {"lambda6", l6}, {"lambda4_0", p.lambda4_0},
                {"sign_branch", p.sign_branch}, {"T", p.T}, {"dt", p.dt}};

  LiftSamples lift{sol.grid, Matrix(m, 2), Matrix::Zero(m, 6), Matrix::Zero(m, 6)};
  lift.gamma.col(0) = sol.gamma1;
  lift.gamma.col(1) = sol.gamma2;
  lift.coeffs.col(3) = sol.lambda4;
  lift.coeffs.col(4).setConstant(l5);
  lift.coeffs.col(5).setConstant(l6);
  lift.coeff_rates->col(3) = sol.lambda4_rate;

  // (a) abnormal equations with analytic lambda_4'
  rep.add_residual("abnormal", abnormal_residual(a, lift, 1e-8));

  // (b) lambda in (D^2)^perp - (D^3)^perp along the whole curve
  const auto cls = classify_regular(compute_flag(a), lift.coeffs, 1e-10);
  rep.classifications.push_back({"regularity", cls.regular ? "regular" : "not regular"});
  rep.checks.push_back({"regular", cls.regular ? 1.0 : 0.0, 1.0, "==", cls.regular});
  rep.metrics.push_back({"min_d3_pairing", cls.min_d3_pairing});

  // (c) the lambda_4 relation and arc length
  double invariant = 0.0, arclen = 0.0, l4pp = 0.0, h3 = 0.0, l4pp_fd = 0.0, h3_fd = 0.0;
  double min_rate = std::numeric_limits<double>::infinity(), max_rate = -min_rate;
  Matrix rates(m, 1), gamma2(m, 1);
  rates.col(0) = sol.lambda4_rate;
  gamma2.col(0) = sol.gamma2;
  const bool have_fd = m >= 5;
  const Matrix rate_fd = have_fd ? finite_diff(rates, p.dt) : Matrix::Zero(m, 1);
  const Matrix gamma2_fd = have_fd ? finite_diff(gamma2, p.dt) : Matrix::Zero(m, 1);
  for (int k = 0; k < m; ++k) {
    const double l4 = sol.lambda4[k], d1 = sol.lambda4_rate[k], d2 = sol.lambda4_accel[k];
    invariant = std::max(invariant, std::abs(d1 * d1 * (l4 * l4 + l5 * l5) - l5 * l5 * l6 * l6));
    arclen = std::max(arclen, std::abs(sol.gamma1[k] * sol.gamma1[k] + sol.gamma2[k] * sol.gamma2[k] - 1.0));
    min_rate = std::min(min_rate, d1);
    max_rate = std::max(max_rate, d1);
    // (d) lambda_4'' = -lambda_4 (lambda_4')^4 / (lambda_5^2 lambda_6^2)
    const double l4pp_formula = -l4 * std::pow(d1, 4) / (l5 * l5 * l6 * l6);
    l4pp = std::max(l4pp, std::abs(d2 - l4pp_formula));
    l4pp_fd = std::max(l4pp_fd, std::abs(rate_fd(k, 0) - l4pp_formula));
    // h_3 = gamma_2' / gamma_1 = -(lambda_4')^3 / (lambda_5 lambda_6^2)
    const double gamma2_rate = -(d1 * d1 + l4 * d2) / (l5 * l6);
    const double h3_formula = -std::pow(d1, 3) / (l5 * l6 * l6);
    h3 = std::max(h3, std::abs(gamma2_rate / sol.gamma1[k] - h3_formula));
    h3_fd = std::max(h3_fd, std::abs(gamma2_fd(k, 0) / sol.gamma1[k] - h3_formula));
  }
  rep.checks.push_back(check_at_most("lambda4_invariant", invariant, 1e-10));
  rep.checks.push_back(check_at_most("arc_length", arclen, 1e-10));
  rep.checks.push_back(check_above("lambda4_rate_keeps_sign", min_rate * max_rate, 0.0));
  rep.checks.push_back(check_at_most("lambda4pp_consistency", l4pp, 1e-6));
  rep.checks.push_back(check_at_most("h3_consistency", h3, 1e-6));
  if (have_fd) {
    rep.metrics.push_back({"lambda4pp_finite_difference", l4pp_fd});
    rep.metrics.push_back({"h3_finite_difference", h3_fd});
  }
  rep.notes.push_back(
      "gamma_2' is evaluated as -((lambda_4')^2 + lambda_4 lambda_4'')/(lambda_5 lambda_6); a derivation written "
      "with (gamma_4')^2 in place of (lambda_4')^2 is read as a typo, since gamma has no fourth component");

  // (e) the controls are not constant over a horizon of at least 1
  const double horizon = std::max(p.T, 1.0);
  EmainSolution longer = sol;
  if (horizon > p.T) {
    auto q = p;
    q.T = horizon;
    longer = emain_solve(q);
  }
  double variation = 0.0;
  for (int k = 0; k < longer.grid.count; ++k)
    variation = std::max(variation, std::abs(longer.gamma1[k] - longer.gamma1[0]));
  rep.checks.push_back(check_above("gamma1_variation", variation, 0.01));
  rep.metrics.push_back({"gamma1_variation_horizon", horizon});

  // the curve itself, from x(0) = 0
  IntegratorConfig cfg{p.dt, (m - 1) * p.dt};
  auto tr = integrate_horizontal(a, ControlSamples{sol.grid, lift.gamma}, Vector::Zero(6), cfg);
  tr.lift = lift.coeffs;
  tr.lift_kind = LiftKind::abnormal;
  double x1_err = 0.0;
  for (int k = 0; k < m; ++k) {
    // lambda_4' = gamma_1 lambda_6 integrates to lambda_4 - lambda_4(0) = lambda_6 x_1
    x1_err = std::max(x1_err, std::abs(l6 * tr.x(k, 0) - (sol.lambda4[k] - p.lambda4_0)));
  }
  rep.checks.push_back(check_at_most("x1_tracks_lambda4", x1_err, 1e-8));
  rep.trajectory = std::move(tr);
  rep.lift_csv = std::move(lift);
  return rep;
}

/// The free step-4 algebra on two generators: the curve with controls
/// (-sin t, cos t) carries both an abnormal and a normal lift.
inline ScenarioReport run_free24(int samples = 1024, double dt = 1e-3) {
  const auto a = builtin("free24");
  const double two_pi = 2.0 * std::numbers::pi;
  const auto grid = UniformGrid::spanning(0.0, two_pi, samples);
  const auto gamma = [](double t) { return Vector{{-std::sin(t), std::cos(t)}}; };

  AnalyticLift abnormal{gamma,
                        [](double t) { return Vector{{0, 0, 0, std::cos(t), std::sin(t), 1, 0, 1}}; },
                        [](double t) { return Vector{{0, 0, 0, -std::sin(t), std::cos(t), 0, 0, 0}}; }};
  AnalyticLift normal{gamma,
                      [](double t) {
                        return Vector{{-std::sin(t), std::cos(t), 1, std::cos(t), std::sin(t), 1, 0, 1}};
                      },
                      [](double t) {
                        return Vector{{-std::cos(t), -std::sin(t), 0, -std::sin(t), std::cos(t), 0, 0, 0}};
                      }};

  ScenarioReport rep;
  rep.name = "free24";
  rep.config = {{"samples", samples}, {"t_end", two_pi}, {"dt", dt}};
  const auto ab = sample(abnormal, grid);
  const auto no = sample(normal, grid);
  rep.add_residual("abnormal", abnormal_residual(a, ab, 1e-12));
  rep.add_residual("normal", normal_residual(a, no, 1e-12));

  double hmax = 0.0;
  for (int k = 0; k < grid.count; ++k) hmax = std::max(hmax, std::abs(hamiltonian(a, no.coeffs.row(k).transpose()) - 0.5));
  rep.checks.push_back(check_at_most("hamiltonian_is_half", hmax, 1e-15));

  IntegratorConfig cfg{dt, two_pi};
  auto tr = integrate_horizontal(a, gamma, Vector::Zero(8), cfg);
  double first_layer = 0.0;
  for (int k = 0; k < tr.size(); ++k) {
    const double t = tr.time(k);
    first_layer = std::max({first_layer, std::abs(tr.x(k, 0) - (std::cos(t) - 1.0)), std::abs(tr.x(k, 1) - std::sin(t))});
  }
  rep.checks.push_back(check_at_most("first_layer_matches_quadrature", first_layer, 1e-8));
  tr.lift = Matrix(tr.size(), 8);
  for (int k = 0; k < tr.size(); ++k) tr.lift.row(k) = abnormal.coeffs(tr.time(k)).transpose();
  tr.lift_kind = LiftKind::abnormal;
  rep.trajectory = std::move(tr);
  rep.lift_csv = LiftSamples{grid, ab.gamma, ab.coeffs, std::nullopt};
  rep.lift_csv_h = no.coeffs;
  rep.notes.push_back("residuals use closed-form derivatives; the integrated trajectory is for inspection");
  return rep;
}

/// Engel algebra: abnormal curves are tangent to e_2, and those are also normal.
inline ScenarioReport run_engel(unsigned seed = 1, int trials = 100) {
  const auto a = builtin("engel4");
  ScenarioReport rep;
  rep.name = "engel";
  rep.config = {{"seed", static_cast<double>(seed)}, {"trials", trials}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mag(0.1, 2.0), angle(0.0, 2.0 * std::numbers::pi);
  std::bernoulli_distribution coin;

  const auto grid = UniformGrid::spanning(0.0, 1.0, 11);
  const auto constant_lift = [&](const Vector& g, const Vector& c) {
    return LiftSamples{grid, g.transpose().replicate(grid.count, 1), c.transpose().replicate(grid.count, 1),
                       Matrix::Zero(grid.count, c.size())};
  };

  double worst_gamma1 = 0.0;
  int wrong_dims = 0, unexpected_pass = 0;
  for (int t = 0; t < trials; ++t) {
    const double l4 = (coin(rng) ? 1.0 : -1.0) * mag(rng);
    const Vector lambda{{0.0, 0.0, 0.0, l4}};
    const Matrix k = constant_abnormal_controls(a, lambda);
    if (k.cols() != 1) ++wrong_dims;
    if (k.cols() >= 1) worst_gamma1 = std::max(worst_gamma1, k.row(0).cwiseAbs().maxCoeff());

    // a random direction off e_2 violates the (now algebraic) third equation
    double th = angle(rng);
    while (std::abs(std::cos(th)) <= 1e-3) th = angle(rng);
    const Vector g{{std::cos(th), std::sin(th)}};
    if (abnormal_residual(a, constant_lift(g, lambda), 1e-10).pass) ++unexpected_pass;
  }
  rep.checks.push_back(check_equal("kernel_dimension_one_failures", wrong_dims, 0));
  rep.checks.push_back(check_at_most("admissible_gamma1", worst_gamma1, 1e-12));
  rep.checks.push_back(check_equal("off_axis_controls_passing", unexpected_pass, 0));

  const Vector e2{{0.0, 1.0}};
  rep.add_residual("abnormal_e2", abnormal_residual(a, constant_lift(e2, Vector{{0, 0, 0, 1}}), 1e-10));
  rep.checks.push_back(check_equal("abnormal_e2_exact", rep.residual("abnormal_e2").max_sup(), 0.0));
  rep.add_residual("normal_e2", normal_residual(a, constant_lift(e2, Vector{{0, 1, 0, 0}}), 1e-10));
  rep.add_residual("abnormal_e1", abnormal_residual(a, constant_lift(Vector{{1.0, 0.0}}, Vector{{0, 0, 0, 1}}), 1e-10),
                   false);
  rep.classifications.push_back({"gamma=(0,1)", rep.residual("abnormal_e2").pass && rep.residual("normal_e2").pass
                                                    ? "both"
                                                    : "unexpected"});
  return rep;
}

/// Heisenberg group: the 2-step kernel is trivial for every nonzero covector.
inline ScenarioReport run_heisenberg_kernel(unsigned seed = 1, int trials = 100) {
  const auto a = builtin("heisenberg3");
  ScenarioReport rep;
  rep.name = "heisenberg-kernel";
  rep.config = {{"seed", static_cast<double>(seed)}, {"trials", trials}};
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);

  int nontrivial = 0;
  double worst_asym = 0.0;
  for (int t = 0; t < trials; ++t) {
    double c = u(rng);
    while (std::abs(c) < 1e-3) c = u(rng);
    const Vector lambda{{0.0, 0.0, c}};
    const auto m = two_step_matrix(a, lambda);
    worst_asym = std::max(worst_asym, (m.m + m.m.transpose()).cwiseAbs().maxCoeff());
    if (kernel(m).cols() != 0) ++nontrivial;
  }
  rep.checks.push_back(check_equal("nontrivial_kernels", nontrivial, 0));
  rep.checks.push_back(check_equal("matrix_antisymmetry", worst_asym, 0.0));
  rep.checks.push_back(check_equal("zero_covector_kernel_dim",
                                   static_cast<double>(kernel(two_step_matrix(a, Vector::Zero(3))).cols()), 2.0));

  const auto beta = beta_left_inverse(a);
  rep.checks.push_back(check_at_most("left_inverse_defect", beta.defect, 1e-10));
  rep.metrics.push_back({"beta_123", beta.beta(1, 2, 3)});
  rep.metrics.push_back({"beta_213", beta.beta(2, 1, 3)});
  return rep;
}

inline const std::vector<std::string>& scenario_names() {
  static const std::vector<std::string> names{"paper6", "free24", "engel", "heisenberg-kernel"};
  return names;
}

}  // namespace carnot
