#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include <Eigen/Dense>

#include "carnot/errors.hpp"

namespace carnot {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// One nonzero structure constant: [e_i, e_j] contains c * e_k.
/// Indices are 1-based and i < j.
struct StructureConstant {
  int i = 0;
  int j = 0;
  int k = 0;
  double c = 0.0;

  friend bool operator==(const StructureConstant&, const StructureConstant&) = default;
};

/// A finite-dimensional real Lie algebra given by structure constants in a
/// basis e_1..e_n whose first `rank` vectors span the distribution D.
///
/// Only entries with i < j are stored; alpha() returns the antisymmetric
/// completion. Coefficient vectors are Eigen vectors where index 0 is e_1.
class LieAlgebra {
 public:
  LieAlgebra(std::string name, int dim, int rank, std::vector<StructureConstant> entries)
      : name_(std::move(name)), dim_(dim), rank_(rank), entries_(std::move(entries)) {
    if (name_.empty() || name_.find_first_of(" \t\r\n#") != std::string::npos)
      throw InputError("algebra name must be a non-empty identifier without whitespace");
    if (dim_ < 1) throw InputError("dimension must be positive");
    if (rank_ < 1 || rank_ > dim_) throw InputError("rank must satisfy 1 <= rank <= dim");
    std::sort(entries_.begin(), entries_.end(), [](const auto& a, const auto& b) {
      return std::tie(a.i, a.j, a.k) < std::tie(b.i, b.j, b.k);
    });
    alpha_.assign(static_cast<std::size_t>(dim_) * dim_ * dim_, 0.0);
    for (std::size_t e = 0; e < entries_.size(); ++e) {
      const auto& s = entries_[e];
      if (s.i < 1 || s.j < 1 || s.k < 1 || s.i > dim_ || s.j > dim_ || s.k > dim_)
        throw InputError("structure constant index out of range: (" + std::to_string(s.i) + "," +
                         std::to_string(s.j) + "," + std::to_string(s.k) + ")");
      if (s.i >= s.j) throw InputError("structure constants must be stored with i < j");
      if (e > 0 && std::tie(s.i, s.j, s.k) == std::tie(entries_[e - 1].i, entries_[e - 1].j,
                                                        entries_[e - 1].k))
        throw InputError("duplicate structure constant (" + std::to_string(s.i) + "," +
                         std::to_string(s.j) + "," + std::to_string(s.k) + ")");
      if (!std::isfinite(s.c)) throw InputError("structure constant must be finite");
      at(s.i - 1, s.j - 1, s.k - 1) = s.c;
      at(s.j - 1, s.i - 1, s.k - 1) = -s.c;
    }
  }

  const std::string& name() const noexcept { return name_; }
  int dim() const noexcept { return dim_; }
  int rank() const noexcept { return rank_; }
  const std::vector<StructureConstant>& entries() const noexcept { return entries_; }

  /// alpha_{ijk} with 0-based indices.
  double alpha(int i, int j, int k) const {
    return alpha_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k];
  }

  double max_abs_constant() const {
    double m = 0.0;
    for (const auto& s : entries_) m = std::max(m, std::abs(s.c));
    return m;
  }

  /// Basis vector e_i, 1-based.
  Vector basis_vector(int i) const {
    if (i < 1 || i > dim_) throw InputError("basis index out of range");
    return Vector::Unit(dim_, i - 1);
  }

  /// Embeds r horizontal controls as a vector of the full algebra.
  Vector embed(const Vector& controls) const {
    if (controls.size() != rank_) throw InputError("expected " + std::to_string(rank_) + " controls");
    Vector v = Vector::Zero(dim_);
    v.head(rank_) = controls;
    return v;
  }

  /// Z_k = sum_{i,j} alpha_ijk X_i Y_j. Exactly antisymmetric in floating point.
  Vector bracket(const Vector& x, const Vector& y) const {
    if (x.size() != dim_ || y.size() != dim_)
      throw InputError("bracket: vectors must have dimension " + std::to_string(dim_));
    Vector z = Vector::Zero(dim_);
    for (const auto& s : entries_)
      z[s.k - 1] += s.c * (x[s.i - 1] * y[s.j - 1] - x[s.j - 1] * y[s.i - 1]);
    return z;
  }

  friend bool operator==(const LieAlgebra& a, const LieAlgebra& b) {
    return a.name_ == b.name_ && a.dim_ == b.dim_ && a.rank_ == b.rank_ && a.entries_ == b.entries_;
  }

 private:
  double& at(int i, int j, int k) { return alpha_[(static_cast<std::size_t>(i) * dim_ + j) * dim_ + k]; }

  std::string name_;
  int dim_;
  int rank_;
  std::vector<StructureConstant> entries_;
  std::vector<double> alpha_;
};

inline const std::vector<std::string>& builtin_names() {
  static const std::vector<std::string> names{"heisenberg3", "engel4", "paper6", "free24"};
  return names;
}

/// The built-in algebras, all with D = span{e_1, e_2}.
inline LieAlgebra builtin(std::string_view name) {
  if (name == "heisenberg3") return LieAlgebra("heisenberg3", 3, 2, {{1, 2, 3, 1.0}});
  if (name == "engel4") return LieAlgebra("engel4", 4, 2, {{1, 2, 3, 1.0}, {1, 3, 4, 1.0}});
  if (name == "paper6")
    return LieAlgebra("paper6", 6, 2,
                      {{1, 2, 3, 1.0}, {1, 3, 4, 1.0}, {2, 3, 5, 1.0}, {1, 4, 6, 1.0}});
  if (name == "free24")
    // free nilpotent, 2 generators, step 4
    return LieAlgebra("free24", 8, 2,
                      {{1, 2, 3, 1.0},
                       {1, 3, 4, 1.0},
                       {2, 3, 5, 1.0},
                       {1, 4, 6, 1.0},
                       {1, 5, 7, 1.0},
                       {2, 4, 7, 1.0},
                       {2, 5, 8, 1.0}});
  std::string known;
  for (const auto& n : builtin_names()) known += (known.empty() ? "" : ", ") + n;
  throw InputError("unknown builtin algebra '" + std::string(name) + "' (available: " + known + ")");
}

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_shortest(double x) {
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, end);
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t p = 0;
  while (p < s.size()) {
    while (p < s.size() && (s[p] == ' ' || s[p] == '\t')) ++p;
    if (p >= s.size()) break;
    std::size_t q = p;
    while (q < s.size() && s[q] != ' ' && s[q] != '\t') ++q;
    out.push_back(s.substr(p, q - p));
    p = q;
  }
  return out;
}

inline bool parse_int(std::string_view s, int& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

inline bool parse_double(std::string_view s, double& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Parses the line-oriented algebra format:
///
///     algebra <name>
///     dim <n>
///     rank <r>
///     bracket <i> <j> <k> <c>
///
/// '#' starts a comment; blank lines are ignored.
inline LieAlgebra parse_algebra(std::string_view text) {
  std::string name;
  int dim = -1, rank = -1;
  int name_line = 0, dim_line = 0, rank_line = 0;
  struct Pending {
    StructureConstant s;
    int line;
  };
  std::vector<Pending> pending;

  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = detail::trim(line);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    const auto tok = detail::split_ws(line);
    const auto& key = tok[0];
    if (key == "algebra") {
      if (tok.size() != 2) throw ParseError(line_no, "expected 'algebra <name>'");
      if (name_line) throw ParseError(line_no, "duplicate 'algebra' line");
      name = std::string(tok[1]);
      name_line = line_no;
    } else if (key == "dim" || key == "rank") {
      int v = 0;
      if (tok.size() != 2 || !detail::parse_int(tok[1], v))
        throw ParseError(line_no, "expected '" + std::string(key) + " <integer>'");
      int& seen = key == "dim" ? dim_line : rank_line;
      if (seen) throw ParseError(line_no, "duplicate '" + std::string(key) + "' line");
      seen = line_no;
      (key == "dim" ? dim : rank) = v;
    } else if (key == "bracket") {
      StructureConstant s;
      if (tok.size() != 5 || !detail::parse_int(tok[1], s.i) || !detail::parse_int(tok[2], s.j) ||
          !detail::parse_int(tok[3], s.k) || !detail::parse_double(tok[4], s.c))
        throw ParseError(line_no, "expected 'bracket <i> <j> <k> <c>'");
      pending.push_back({s, line_no});
    } else {
      throw ParseError(line_no, "unknown keyword '" + std::string(key) + "'");
    }
    if (nl == text.size()) break;
  }

  if (!name_line) throw ParseError(line_no, "missing 'algebra <name>' line");
  if (!dim_line) throw ParseError(line_no, "missing 'dim <n>' line");
  if (!rank_line) throw ParseError(line_no, "missing 'rank <r>' line");
  if (dim < 1) throw ParseError(dim_line, "dimension must be positive");
  if (rank < 1 || rank > dim) throw ParseError(rank_line, "rank must satisfy 1 <= rank <= dim");

  std::set<std::tuple<int, int, int>> seen;
  std::vector<StructureConstant> entries;
  for (const auto& [s, ln] : pending) {
    if (s.i < 1 || s.j < 1 || s.k < 1 || s.i > dim || s.j > dim || s.k > dim)
      throw ParseError(ln, "index out of range 1.." + std::to_string(dim));
    if (s.i >= s.j) throw ParseError(ln, "bracket entries require i < j");
    if (!seen.insert({s.i, s.j, s.k}).second)
      throw ParseError(ln, "duplicate entry (" + std::to_string(s.i) + "," + std::to_string(s.j) +
                               "," + std::to_string(s.k) + ")");
    entries.push_back(s);
  }
  return LieAlgebra(name, dim, rank, std::move(entries));
}

/// Canonical text form; entries sorted by (i,j,k), shortest round-trip floats.
inline std::string serialize_algebra(const LieAlgebra& a) {
  std::ostringstream os;
  os << "algebra " << a.name() << "\n";
  os << "dim " << a.dim() << "\n";
  os << "rank " << a.rank() << "\n";
  for (const auto& s : a.entries())
    os << "bracket " << s.i << ' ' << s.j << ' ' << s.k << ' ' << format_shortest(s.c) << "\n";
  return os.str();
}

}  // namespace carnot
