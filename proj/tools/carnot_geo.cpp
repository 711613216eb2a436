// carnot-geo: structure-constant driven normal/abnormal geodesic toolkit.
//
// Exit codes: 0 success, 1 checks ran and failed, 2 usage or input error.

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "carnot/carnot.hpp"

namespace fs = std::filesystem;
using namespace carnot;

namespace {

constexpr int kOk = 0;
constexpr int kFail = 1;
constexpr int kUsage = 2;

struct AlgebraSource {
  std::string builtin_name;
  std::string file;

  void attach(CLI::App* cmd) {
    auto* b = cmd->add_option("--builtin", builtin_name, "built-in algebra: heisenberg3, engel4, paper6, free24");
    auto* f = cmd->add_option("--file", file, "algebra file");
    b->excludes(f);
    f->excludes(b);
  }

  LieAlgebra load() const {
    if (builtin_name.empty() == file.empty()) throw InputError("give exactly one of --builtin or --file");
    if (!builtin_name.empty()) return builtin(builtin_name);
    return parse_algebra(read_file(file));
  }
};

double default_tolerance() {
  const char* env = std::getenv("CARNOT_GEO_TOL");
  if (env && !detail::trim(env).empty()) {
    double v = 0.0;
    if (!detail::parse_double(detail::trim(env), v) || !(v > 0.0))
      throw InputError("CARNOT_GEO_TOL must be a positive number");
    return v;
  }
  return 1e-8;
}

Vector parse_list(const std::string& text, const char* what) {
  std::vector<double> v;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    double x = 0.0;
    if (!detail::parse_double(detail::trim(cell), x))
      throw InputError(std::string(what) + ": bad number '" + cell + "'");
    v.push_back(x);
  }
  return Eigen::Map<Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

int cmd_algebra(const AlgebraSource& src, bool check, bool as_json) {
  const auto a = src.load();
  const auto val = validate(a);
  const auto flag = compute_flag(a);
  if (as_json) {
    json j{{"algebra", a.name()}, {"dim", a.dim()}, {"rank", a.rank()}, {"entries", a.entries().size()}};
    j["flag"] = to_json(flag);
    j["jacobi"] = val.valid ? "ok" : "violated";
    j["jacobi_violations"] = json::array();
    for (const auto& v : val.jacobi_violations)
      j["jacobi_violations"].push_back({{"i", v.i}, {"j", v.j}, {"l", v.l}, {"k", v.k}, {"value", v.value}});
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "algebra            " << a.name() << "\n"
              << "dimension          " << a.dim() << "\n"
              << "rank               " << a.rank() << "\n"
              << "growth vector      (" << join(flag.growth_vector) << ")\n"
              << "step               " << flag.step << "\n"
              << "bracket-generating " << std::boolalpha << flag.bracket_generating << "\n"
              << "graded             " << flag.graded << "\n"
              << "nilpotent          " << flag.nilpotent;
    if (flag.nilpotent) std::cout << " (class " << flag.nilpotency_class << ")";
    std::cout << "\n2-step             " << flag.two_step() << "\n";
    if (flag.step_cap_reached) std::cout << "warning            step cap reached before the flag stabilized\n";
    std::cout << "jacobi             " << (val.valid ? "ok" : "VIOLATED") << "\n";
    const std::size_t shown = check ? val.jacobi_violations.size() : std::min<std::size_t>(val.jacobi_violations.size(), 5);
    for (std::size_t i = 0; i < shown; ++i) {
      const auto& v = val.jacobi_violations[i];
      std::cout << "  triple (" << v.i << "," << v.j << "," << v.l << ") component " << v.k << ": "
                << format_shortest(v.value) << "\n";
    }
  }
  return val.valid ? kOk : kFail;
}

void write_trajectory(const Trajectory& tr, const std::string& prefix) {
  std::ostringstream csv;
  write_trajectory_csv(csv, tr);
  write_file_atomic(prefix + ".csv", csv.str());
  write_file_atomic(prefix + ".json", trajectory_metadata(tr).dump(2) + "\n");
}

struct IntegrateOptions {
  AlgebraSource src;
  std::string h0, x0, gamma, controls, out;
  double dt = 1e-3, T = 1.0;
  bool as_json = false;
};

int cmd_integrate_normal(const IntegrateOptions& o) {
  const auto a = o.src.load();
  const Vector h0 = parse_list(o.h0, "--h0");
  if (h0.size() != a.dim()) throw InputError("--h0 needs " + std::to_string(a.dim()) + " components");
  const Vector x0 = o.x0.empty() ? Vector::Zero(a.dim()) : parse_list(o.x0, "--x0");
  const auto tr = integrate_normal(a, x0, h0, {o.dt, o.T});
  const double h_start = hamiltonian(a, h0);
  double drift = 0.0;
  for (int k = 0; k < tr.size(); ++k)
    drift = std::max(drift, std::abs(hamiltonian(a, tr.lift.row(k).transpose()) - h_start));
  if (!o.out.empty()) write_trajectory(tr, o.out);
  if (o.as_json) {
    json j{{"algebra", a.name()}, {"samples", tr.size()}, {"H0", h_start}, {"H_drift", drift}};
    std::vector<double> xe(static_cast<std::size_t>(a.dim()));
    for (int i = 0; i < a.dim(); ++i) xe[static_cast<std::size_t>(i)] = tr.x(tr.size() - 1, i);
    j["x_end"] = xe;
    std::cout << j.dump(2) << "\n";
  } else {
    std::cout << "samples  " << tr.size() << "\nH(0)     " << format_shortest(h_start) << "\nH drift  "
              << format_shortest(drift) << "\nx(T)     ";
    for (int i = 0; i < a.dim(); ++i) std::cout << (i ? "," : "") << format17(tr.x(tr.size() - 1, i));
    std::cout << "\n";
    if (!o.out.empty()) std::cout << "wrote    " << o.out << ".csv, " << o.out << ".json\n";
  }
  return kOk;
}

int cmd_integrate_horizontal(const IntegrateOptions& o) {
  const auto a = o.src.load();
  const Vector x0 = o.x0.empty() ? Vector::Zero(a.dim()) : parse_list(o.x0, "--x0");
  if (o.gamma.empty() == o.controls.empty()) throw InputError("give exactly one of --gamma or --controls");
  Trajectory tr;
  if (!o.gamma.empty()) {
    const Vector g = parse_list(o.gamma, "--gamma");
    if (g.size() != a.rank()) throw InputError("--gamma needs " + std::to_string(a.rank()) + " components");
    tr = integrate_horizontal(a, [g](double) { return g; }, x0, {o.dt, o.T});
  } else {
    const auto text = read_file(o.controls);
    // controls file: header line, then t,g1..gr per row
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<double>> rows;
    int line_no = 0;
    std::getline(in, line);
    ++line_no;
    while (std::getline(in, line)) {
      ++line_no;
      if (detail::trim(line).empty()) continue;
      std::vector<double> row;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) {
        double v = 0.0;
        if (!detail::parse_double(detail::trim(cell), v)) throw ParseError(line_no, "bad number '" + cell + "'");
        row.push_back(v);
      }
      if (static_cast<int>(row.size()) != a.rank() + 1)
        throw ParseError(line_no, "expected t plus " + std::to_string(a.rank()) + " controls");
      rows.push_back(std::move(row));
    }
    if (rows.size() < 4) throw InputError("controls file needs at least 4 samples");
    const int m = static_cast<int>(rows.size());
    ControlSamples cs{{rows[0][0], (rows.back()[0] - rows[0][0]) / (m - 1), m}, Matrix(m, a.rank())};
    for (int k = 0; k < m; ++k) {
      if (std::abs(rows[k][0] - cs.grid.time(k)) > 1e-6 * cs.grid.dt) throw InputError("controls grid is not uniform");
      for (int i = 0; i < a.rank(); ++i) cs.values(k, i) = rows[k][static_cast<std::size_t>(i) + 1];
    }
    tr = integrate_horizontal(a, cs, x0, {o.dt, o.T}, cs.grid.t0);
  }
  if (!o.out.empty()) write_trajectory(tr, o.out);
  std::cout << "samples  " << tr.size() << "\nx(T)     ";
  for (int i = 0; i < a.dim(); ++i) std::cout << (i ? "," : "") << format17(tr.x(tr.size() - 1, i));
  std::cout << "\n";
  return kOk;
}

struct ClassifyOptions {
  AlgebraSource src;
  std::string lift;
  std::optional<double> tol;
  bool as_json = false;
};

int cmd_classify(const ClassifyOptions& o) {
  const auto a = o.src.load();
  const double tol = o.tol ? *o.tol : default_tolerance();
  const auto file = parse_lift_csv(read_file(o.lift), a.dim(), a.rank());

  json j{{"algebra", a.name()}, {"tolerance", tol}, {"samples", file.grid.count}};
  std::optional<bool> normal_ok, abnormal_ok, regular;
  if (file.h) {
    const auto rep = normal_residual(a, file.normal(), tol);
    normal_ok = rep.pass;
    j["normal"] = to_json(rep);
  }
  if (file.lambda) {
    try {
      const auto rep = abnormal_residual(a, file.abnormal(), tol);
      abnormal_ok = rep.pass;
      j["abnormal"] = to_json(rep);
    } catch (const InvalidLift& e) {
      abnormal_ok = false;
      j["abnormal"] = {{"verdict", "fail"}, {"error", e.what()}};
    }
    if (*abnormal_ok) {
      const auto cls = classify_regular(compute_flag(a), *file.lambda, tol);
      regular = cls.regular;
      j["regularity"] = to_json(cls);
    }
  }
  std::string verdict;
  const bool n_ok = normal_ok.value_or(false), a_ok = abnormal_ok.value_or(false);
  if (n_ok && a_ok) verdict = "both";
  else if (n_ok) verdict = "normal";
  else if (a_ok) verdict = regular.value_or(false) ? "regular abnormal" : "abnormal (not regular)";
  else verdict = "neither";
  j["verdict"] = verdict;

  if (o.as_json) {
    std::cout << j.dump(2) << "\n";
  } else {
    if (normal_ok) std::cout << "normal equations    " << (*normal_ok ? "pass" : "fail") << "\n";
    if (abnormal_ok) std::cout << "abnormal equations  " << (*abnormal_ok ? "pass" : "fail") << "\n";
    if (regular) std::cout << "regular             " << std::boolalpha << *regular << "\n";
    std::cout << "verdict             " << verdict << "\n";
  }
  return verdict == "neither" ? kFail : kOk;
}

struct ReproduceOptions {
  std::string name;
  EmainParams emain;
  unsigned seed = 1;
  std::string out = "artifacts";
  bool as_json = false;
};

ScenarioReport run_scenario(const std::string& name, const ReproduceOptions& o) {
  if (name == "paper6") return run_paper6(o.emain);
  if (name == "free24") return run_free24();
  if (name == "engel") return run_engel(o.seed);
  if (name == "heisenberg-kernel") return run_heisenberg_kernel(o.seed);
  throw InputError("unknown scenario '" + name + "' (available: paper6, free24, engel, heisenberg-kernel, all)");
}

void print_report(const ScenarioReport& r) {
  std::cout << "== " << r.name << ": " << (r.pass() ? "PASS" : "FAIL") << "\n";
  for (const auto& c : r.checks)
    std::cout << "  [" << (c.pass ? "pass" : "FAIL") << "] " << c.name << "  " << format_shortest(c.value) << ' '
              << c.relation << ' ' << format_shortest(c.threshold) << "\n";
  for (const auto& [k, v] : r.classifications) std::cout << "  " << k << ": " << v << "\n";
  for (const auto& a : r.artifacts) std::cout << "  wrote " << a << "\n";
}

int cmd_reproduce(const ReproduceOptions& o) {
  std::vector<std::string> names;
  if (o.name == "all") {
    names = scenario_names();
  } else {
    const auto& known = scenario_names();
    if (std::find(known.begin(), known.end(), o.name) == known.end())
      throw InputError("unknown scenario '" + o.name + "' (available: paper6, free24, engel, heisenberg-kernel, all)");
    names = {o.name};
  }
  const fs::path dir(o.out);
  bool all_pass = true;
  json combined = json::array();
  for (const auto& name : names) {
    auto rep = run_scenario(name, o);
    if (rep.trajectory) {
      const auto prefix = (dir / (name + ".trajectory")).string();
      write_trajectory(*rep.trajectory, prefix);
      rep.artifacts.push_back(prefix + ".csv");
      rep.artifacts.push_back(prefix + ".json");
    }
    if (rep.lift_csv) {
      std::ostringstream csv;
      const Matrix* h = rep.lift_csv_h ? &*rep.lift_csv_h : nullptr;
      write_lift_csv(csv, rep.lift_csv->grid, rep.lift_csv->gamma, &rep.lift_csv->coeffs, h);
      const auto path = (dir / (name + ".lift.csv")).string();
      write_file_atomic(path, csv.str());
      rep.artifacts.push_back(path);
    }
    const auto report_path = (dir / (name + ".report.json")).string();
    rep.artifacts.push_back(report_path);
    const auto j = to_json(rep);
    write_file_atomic(report_path, j.dump(2) + "\n");
    if (o.as_json) combined.push_back(j);
    else print_report(rep);
    all_pass = all_pass && rep.pass();
  }
  if (o.as_json) std::cout << (names.size() == 1 ? combined[0] : combined).dump(2) << "\n";
  return all_pass ? kOk : kFail;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Normal and abnormal geodesics from Lie algebra structure constants"};
  app.require_subcommand(1);

  // algebra
  auto* algebra = app.add_subcommand("algebra", "inspect or validate an algebra");
  algebra->require_subcommand(1);
  AlgebraSource alg_src;
  bool alg_json = false;
  auto* info = algebra->add_subcommand("info", "dimension, flag and Jacobi verdict");
  auto* check = algebra->add_subcommand("check", "validate and list every Jacobi violation");
  for (auto* c : {info, check}) {
    alg_src.attach(c);
    c->add_flag("--json", alg_json, "machine-readable output");
  }

  // integrate
  auto* integrate = app.add_subcommand("integrate", "integrate curves in exponential coordinates");
  integrate->require_subcommand(1);
  IntegrateOptions int_opt;
  auto* normal = integrate->add_subcommand("normal", "normal geodesic from an initial covector");
  auto* horizontal = integrate->add_subcommand("horizontal", "horizontal curve from controls");
  for (auto* c : {normal, horizontal}) {
    int_opt.src.attach(c);
    c->add_option("--x0", int_opt.x0, "initial point, comma separated (default 0)");
    c->add_option("--dt", int_opt.dt, "step size")->check(CLI::PositiveNumber);
    c->add_option("--T", int_opt.T, "horizon")->check(CLI::PositiveNumber);
    c->add_option("--out", int_opt.out, "output prefix for <prefix>.csv and <prefix>.json");
    c->add_flag("--json", int_opt.as_json, "machine-readable output");
  }
  normal->add_option("--h0", int_opt.h0, "initial covector, comma separated")->required();
  horizontal->add_option("--gamma", int_opt.gamma, "constant controls, comma separated");
  horizontal->add_option("--controls", int_opt.controls, "CSV with columns t,g1..gr");

  // classify
  auto* classify = app.add_subcommand("classify", "test a sampled lift against both equation systems");
  ClassifyOptions cls_opt;
  cls_opt.src.attach(classify);
  classify->add_option("--lift", cls_opt.lift, "lift CSV (t,g1..gr and l1..ln and/or h1..hn)")->required();
  double tol_value = 0.0;
  auto* tol_opt = classify->add_option("--tol", tol_value, "residual tolerance (default $CARNOT_GEO_TOL or 1e-8)")
                      ->check(CLI::PositiveNumber);
  classify->add_flag("--json", cls_opt.as_json, "machine-readable output");

  // reproduce
  auto* reproduce = app.add_subcommand("reproduce", "run a worked example end to end");
  ReproduceOptions rep_opt;
  reproduce->add_option("scenario", rep_opt.name, "paper6, free24, engel, heisenberg-kernel or all")->required();
  reproduce->add_option("--lambda5", rep_opt.emain.lambda5, "paper6: lambda_5 (nonzero)");
  reproduce->add_option("--lambda6", rep_opt.emain.lambda6, "paper6: lambda_6 (nonzero)");
  reproduce->add_option("--lambda4-0", rep_opt.emain.lambda4_0, "paper6: lambda_4(0)");
  reproduce->add_option("--sign", rep_opt.emain.sign_branch, "paper6: branch of the square root, +1 or -1");
  reproduce->add_option("--T", rep_opt.emain.T, "paper6: horizon");
  reproduce->add_option("--dt", rep_opt.emain.dt, "paper6: step size");
  reproduce->add_option("--seed", rep_opt.seed, "seed for the randomized scenarios");
  reproduce->add_option("--out", rep_opt.out, "output directory (default ./artifacts)");
  reproduce->add_flag("--json", rep_opt.as_json, "print reports as JSON");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*algebra) return cmd_algebra(alg_src, check->parsed(), alg_json);
    if (*normal) return cmd_integrate_normal(int_opt);
    if (*horizontal) return cmd_integrate_horizontal(int_opt);
    if (*classify) {
      if (*tol_opt) cls_opt.tol = tol_value;
      return cmd_classify(cls_opt);
    }
    if (*reproduce) return cmd_reproduce(rep_opt);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const PreconditionError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFail;
  }
  return kUsage;
}
