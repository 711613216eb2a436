#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "carnot/equations.hpp"
#include "carnot/integrate.hpp"
#include "carnot/scenarios.hpp"

namespace carnot {

using json = nlohmann::ordered_json;

/// %.17g: enough digits to round-trip any double.
inline std::string format17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json to_json(const ResidualReport& rep) {
  json j;
  for (const auto& [label, n] : rep.equations) {
    j[label] = {{"sup", n.sup}, {"l2", n.l2}};
    if (n.allowance > 0.0) j[label]["allowance"] = n.allowance;
    if (!n.resolved) j[label]["resolved"] = false;
  }
  j["verdict"] = rep.pass ? "pass" : "fail";
  j["tolerance"] = rep.tolerance;
  j["system"] = rep.system;
  j["analytic_derivatives"] = rep.analytic_derivatives;
  j["grid"] = {{"t0", rep.grid.t0}, {"dt", rep.grid.dt}, {"count", rep.grid.count}};
  return j;
}

inline json to_json(const RegularityClassification& c) {
  return {{"regular", c.regular},
          {"samples", c.samples},
          {"first_failure", c.first_failure},
          {"reason", c.reason},
          {"max_d2_pairing", c.max_d2_pairing},
          {"min_d3_pairing", c.min_d3_pairing}};
}

inline json to_json(const Flag& f) {
  return {{"growth_vector", f.growth_vector},
          {"step", f.step},
          {"bracket_generating", f.bracket_generating},
          {"graded", f.graded},
          {"nilpotent", f.nilpotent},
          {"nilpotency_class", f.nilpotency_class},
          {"two_step", f.two_step()},
          {"step_cap_reached", f.step_cap_reached}};
}

inline json to_json(const ScenarioReport& r) {
  json j;
  j["scenario"] = r.name;
  j["verdict"] = r.pass() ? "pass" : "fail";
  j["config"] = json::object();
  for (const auto& [k, v] : r.config) j["config"][k] = v;
  j["checks"] = json::array();
  for (const auto& c : r.checks)
    j["checks"].push_back(
        {{"name", c.name}, {"value", c.value}, {"relation", c.relation}, {"threshold", c.threshold}, {"pass", c.pass}});
  j["residuals"] = json::object();
  for (const auto& [k, rep] : r.residuals) j["residuals"][k] = to_json(rep);
  j["classifications"] = json::object();
  for (const auto& [k, v] : r.classifications) j["classifications"][k] = v;
  j["metrics"] = json::object();
  for (const auto& [k, v] : r.metrics) j["metrics"][k] = v;
  j["notes"] = r.notes;
  j["artifacts"] = r.artifacts;
  return j;
}

/// Header t,x1..xn,g1..gr[,l1..ln|h1..hn]; one row per sample.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& tr) {
  const int n = static_cast<int>(tr.x.cols());
  const char lift_prefix = tr.lift_kind == LiftKind::normal ? 'h' : 'l';
  os << "t";
  for (int i = 1; i <= n; ++i) os << ",x" << i;
  for (int i = 1; i <= tr.gamma.cols(); ++i) os << ",g" << i;
  if (tr.lift_kind != LiftKind::none)
    for (int i = 1; i <= tr.lift.cols(); ++i) os << ',' << lift_prefix << i;
  os << '\n';
  for (int k = 0; k < tr.size(); ++k) {
    os << format17(tr.time(k));
    for (int i = 0; i < n; ++i) os << ',' << format17(tr.x(k, i));
    for (int i = 0; i < tr.gamma.cols(); ++i) os << ',' << format17(tr.gamma(k, i));
    if (tr.lift_kind != LiftKind::none)
      for (int i = 0; i < tr.lift.cols(); ++i) os << ',' << format17(tr.lift(k, i));
    os << '\n';
  }
}

inline json trajectory_metadata(const Trajectory& tr) {
  return {{"algebra", tr.algebra},
          {"dt", tr.dt},
          {"T", tr.dt * (tr.size() - 1)},
          {"lift_kind", to_string(tr.lift_kind)},
          {"integrator_order", 4},
          {"samples", tr.size()}};
}

/// A lift read from CSV: controls plus an abnormal and/or a normal covector.
struct LiftFile {
  UniformGrid grid;
  Matrix gamma;
  std::optional<Matrix> lambda;
  std::optional<Matrix> h;

  LiftSamples abnormal() const { return {grid, gamma, *lambda, std::nullopt}; }
  LiftSamples normal() const { return {grid, gamma, *h, std::nullopt}; }
};

/// Header t,g1..gr followed by l1..ln and/or h1..hn, in any column order.
inline void write_lift_csv(std::ostream& os, const UniformGrid& grid, const Matrix& gamma,
                           const Matrix* lambda, const Matrix* h) {
  os << "t";
  for (int i = 1; i <= gamma.cols(); ++i) os << ",g" << i;
  if (lambda)
    for (int i = 1; i <= lambda->cols(); ++i) os << ",l" << i;
  if (h)
    for (int i = 1; i <= h->cols(); ++i) os << ",h" << i;
  os << '\n';
  for (int k = 0; k < grid.count; ++k) {
    os << format17(grid.time(k));
    for (int i = 0; i < gamma.cols(); ++i) os << ',' << format17(gamma(k, i));
    if (lambda)
      for (int i = 0; i < lambda->cols(); ++i) os << ',' << format17((*lambda)(k, i));
    if (h)
      for (int i = 0; i < h->cols(); ++i) os << ',' << format17((*h)(k, i));
    os << '\n';
  }
}

inline LiftFile parse_lift_csv(const std::string& text, int dim, int rank) {
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    std::stringstream ss{std::string(trimmed)};
    std::string cell;
    while (std::getline(ss, cell, ',')) header.emplace_back(detail::trim(cell));
    break;
  }
  if (header.empty()) throw ParseError(line_no, "empty lift file");

  // column index for t, g1..gr, l1..ln, h1..hn
  int t_col = -1;
  std::vector<int> g_col(rank, -1), l_col(dim, -1), h_col(dim, -1);
  for (int c = 0; c < static_cast<int>(header.size()); ++c) {
    const auto& name = header[c];
    if (name == "t") {
      t_col = c;
      continue;
    }
    int idx = 0;
    if (name.size() < 2 || !detail::parse_int(std::string_view(name).substr(1), idx))
      throw ParseError(line_no, "unexpected column '" + name + "'");
    auto* cols = name[0] == 'g' ? &g_col : name[0] == 'l' ? &l_col : name[0] == 'h' ? &h_col : nullptr;
    if (!cols || idx < 1 || idx > static_cast<int>(cols->size()))
      throw ParseError(line_no, "unexpected column '" + name + "'");
    if ((*cols)[idx - 1] >= 0) throw ParseError(line_no, "duplicate column '" + name + "'");
    (*cols)[idx - 1] = c;
  }
  const auto complete = [](const std::vector<int>& v) {
    return std::all_of(v.begin(), v.end(), [](int c) { return c >= 0; });
  };
  const auto any = [](const std::vector<int>& v) {
    return std::any_of(v.begin(), v.end(), [](int c) { return c >= 0; });
  };
  if (t_col < 0) throw ParseError(line_no, "missing column 't'");
  if (!complete(g_col)) throw ParseError(line_no, "expected control columns g1..g" + std::to_string(rank));
  if (any(l_col) && !complete(l_col)) throw ParseError(line_no, "incomplete l1..l" + std::to_string(dim) + " columns");
  if (any(h_col) && !complete(h_col)) throw ParseError(line_no, "incomplete h1..h" + std::to_string(dim) + " columns");
  if (!any(l_col) && !any(h_col)) throw ParseError(line_no, "lift file has neither l nor h columns");

  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    auto trimmed = detail::trim(line);
    if (trimmed.empty()) continue;
    std::vector<double> row;
    std::stringstream ss{std::string(trimmed)};
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      double v = 0.0;
      if (!detail::parse_double(detail::trim(cell), v)) throw ParseError(line_no, "bad number '" + cell + "'");
      row.push_back(v);
    }
    if (row.size() != header.size())
      throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, got " + std::to_string(row.size()));
    rows.push_back(std::move(row));
  }
  const int m = static_cast<int>(rows.size());
  if (m < 2) throw ParseError(line_no, "lift file needs at least 2 samples");

  LiftFile out;
  const double t0 = rows.front()[t_col], t1 = rows.back()[t_col];
  out.grid = UniformGrid{t0, (t1 - t0) / (m - 1), m};
  if (!(out.grid.dt > 0.0)) throw ParseError(0, "time column must be increasing");
  for (int k = 0; k < m; ++k)
    if (std::abs(rows[k][t_col] - out.grid.time(k)) > 1e-6 * out.grid.dt)
      throw ParseError(0, "time grid is not uniform at sample " + std::to_string(k));

  const auto fill = [&](const std::vector<int>& cols) {
    Matrix mtx(m, static_cast<Eigen::Index>(cols.size()));
    for (int k = 0; k < m; ++k)
      for (std::size_t c = 0; c < cols.size(); ++c) mtx(k, static_cast<Eigen::Index>(c)) = rows[k][cols[c]];
    return mtx;
  };
  out.gamma = fill(g_col);
  if (any(l_col)) out.lambda = fill(l_col);
  if (any(h_col)) out.h = fill(h_col);
  return out;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw InputError("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

/// Writes via a temporary sibling and rename, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& p, const std::string& content) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out) throw InputError("write failed for '" + tmp.string() + "'");
  }
  std::filesystem::rename(tmp, p);
}

}  // namespace carnot
