#include <gtest/gtest.h>

#include <array>
#include <random>
#include <vector>

#include "carnot/flag.hpp"
#include "carnot/lie_algebra.hpp"
#include "oracles.hpp"

using namespace carnot;

namespace {

Vector random_vector(std::mt19937_64& rng, int n) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(n);
  for (int i = 0; i < n; ++i) v[i] = u(rng);
  return v;
}

LieAlgebra abelian(int n, int r) { return LieAlgebra("abelian" + std::to_string(n), n, r, {}); }

}  // namespace

TEST(Bracket, SixDimensionalRelations) {
  const auto a = builtin("paper6");
  EXPECT_EQ(a.bracket(a.basis_vector(1), a.basis_vector(2)), a.basis_vector(3));
  EXPECT_EQ(a.bracket(a.basis_vector(1), a.basis_vector(4)), a.basis_vector(6));
  EXPECT_EQ(a.bracket(a.basis_vector(2), a.basis_vector(1)), -a.basis_vector(3));
}

TEST(Bracket, SelfBracketVanishes) {
  std::mt19937_64 rng(7);
  for (const auto& name : builtin_names()) {
    const auto a = builtin(name);
    const Vector x = random_vector(rng, a.dim());
    EXPECT_EQ(a.bracket(x, x), Vector::Zero(a.dim())) << name;
  }
}

TEST(Bracket, DimensionMismatchThrows) {
  const auto a = builtin("heisenberg3");
  EXPECT_THROW(a.bracket(Vector::Zero(2), Vector::Zero(3)), InputError);
}

TEST(Bracket, AntisymmetryAndJacobiOnRandomVectors) {
  std::mt19937_64 rng(11);
  for (const auto& name : builtin_names()) {
    const auto a = builtin(name);
    for (int trial = 0; trial < 200; ++trial) {
      const Vector x = random_vector(rng, a.dim()), y = random_vector(rng, a.dim()), z = random_vector(rng, a.dim());
      EXPECT_EQ(a.bracket(x, y), -a.bracket(y, x));
      const Vector jac = a.bracket(x, a.bracket(y, z)) + a.bracket(y, a.bracket(z, x)) + a.bracket(z, a.bracket(x, y));
      EXPECT_LE(jac.cwiseAbs().maxCoeff(), 1e-12) << name;
    }
  }
}

TEST(Builtin, RelationTables) {
  const auto p6 = builtin("paper6");
  EXPECT_EQ(p6.dim(), 6);
  EXPECT_EQ(p6.rank(), 2);
  EXPECT_EQ(p6.entries().size(), 4u);

  const auto e4 = builtin("engel4");
  EXPECT_EQ(e4.dim(), 4);
  EXPECT_EQ(e4.rank(), 2);
  const std::vector<StructureConstant> engel{{1, 2, 3, 1.0}, {1, 3, 4, 1.0}};
  EXPECT_EQ(e4.entries(), engel);

  const auto f = builtin("free24");
  EXPECT_EQ(f.dim(), 8);
  EXPECT_EQ(f.rank(), 2);
  EXPECT_EQ(f.entries().size(), 7u);
  EXPECT_EQ(f.alpha(1, 3, 6), 1.0);  // [e2,e4] = e7
  EXPECT_EQ(f.alpha(3, 1, 6), -1.0);
}

TEST(Builtin, UnknownNameListsAvailable) {
  try {
    builtin("sl2");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("paper6"), std::string::npos);
  }
}

TEST(LieAlgebraCtor, RejectsBadEntries) {
  EXPECT_THROW(LieAlgebra("x", 3, 2, {{2, 1, 3, 1.0}}), InputError);
  EXPECT_THROW(LieAlgebra("x", 3, 2, {{1, 1, 3, 1.0}}), InputError);
  EXPECT_THROW(LieAlgebra("x", 3, 2, {{1, 2, 4, 1.0}}), InputError);
  EXPECT_THROW(LieAlgebra("x", 3, 2, {{1, 2, 3, 1.0}, {1, 2, 3, 2.0}}), InputError);
  EXPECT_THROW(LieAlgebra("x", 3, 4, {}), InputError);
  EXPECT_THROW(LieAlgebra("two words", 3, 2, {}), InputError);
}

TEST(Validate, BuiltinsSatisfyJacobi) {
  for (const auto& name : builtin_names()) {
    const auto rep = validate(builtin(name));
    EXPECT_TRUE(rep.valid) << name;
    EXPECT_TRUE(rep.nilpotent) << name;
  }
  EXPECT_EQ(validate(builtin("paper6")).nilpotency_class, 4);
  EXPECT_EQ(validate(builtin("heisenberg3")).nilpotency_class, 2);
}

TEST(Validate, JacobiTensorFormulaAgreesWithVectorBrackets) {
  // oracle: the reported sum is the coefficient of
  // [[e_i,e_j],e_l] + [[e_j,e_l],e_i] + [[e_l,e_i],e_j], evaluated with bracket()
  const LieAlgebra broken("broken", 8, 2,
                          {{1, 2, 3, 1.0}, {1, 3, 4, 1.0}, {2, 3, 5, 1.0}, {1, 4, 6, 1.0},
                           {1, 5, 7, 1.0}, {2, 4, 7, 2.0}, {2, 5, 8, 1.0}});
  const auto rep = validate(broken);
  ASSERT_FALSE(rep.valid);
  for (const auto& v : rep.jacobi_violations) {
    const Vector x = broken.basis_vector(v.i), y = broken.basis_vector(v.j), z = broken.basis_vector(v.l);
    const Vector jac = broken.bracket(broken.bracket(x, y), z) + broken.bracket(broken.bracket(y, z), x) +
                       broken.bracket(broken.bracket(z, x), y);
    EXPECT_DOUBLE_EQ(jac[v.k - 1], v.value);
  }
  // [[e1,e2],e3] + [[e2,e3],e1] + [[e3,e1],e2] = 0 - e7 + 2 e7
  bool located = false;
  for (const auto& v : rep.jacobi_violations)
    if (v.i == 1 && v.j == 2 && v.l == 3 && v.k == 7) {
      located = true;
      EXPECT_DOUBLE_EQ(v.value, 1.0);
    }
  EXPECT_TRUE(located);
}

TEST(Validate, ThreeDimensionalJacobiFailure) {
  // [e1,e2]=e3, [e1,e3]=e1, [e2,e3]=e1: the only nonzero term is [[e3,e1],e2] = -e3
  const LieAlgebra a("bad3", 3, 2, {{1, 2, 3, 1.0}, {1, 3, 1, 1.0}, {2, 3, 1, 1.0}});
  const auto rep = validate(a);
  EXPECT_FALSE(rep.valid);
  ASSERT_EQ(rep.jacobi_violations.size(), 1u);
  const auto& v = rep.jacobi_violations[0];
  EXPECT_EQ((std::array<int, 4>{v.i, v.j, v.l, v.k}), (std::array<int, 4>{1, 2, 3, 3}));
  EXPECT_DOUBLE_EQ(v.value, -1.0);
}

TEST(Validate, CyclicThreeDimensionalTablesAlwaysSatisfyJacobi) {
  // [e1,e2]=a e3, [e1,e3]=b e2, [e2,e3]=c e1: each double bracket is a
  // multiple of [e_k,e_k], so no choice of coefficients breaks Jacobi
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const LieAlgebra a("cyc", 3, 2, {{1, 2, 3, u(rng)}, {1, 3, 2, u(rng)}, {2, 3, 1, u(rng)}});
    EXPECT_TRUE(validate(a).valid);
  }
  EXPECT_TRUE(validate(LieAlgebra("cyc2", 3, 2, {{1, 2, 3, 1.0}, {1, 3, 2, 2.0}, {2, 3, 1, 1.0}})).valid);
}

TEST(Validate, HeisenbergIsStepTwo) {
  const auto a = builtin("heisenberg3");
  EXPECT_TRUE(validate(a).valid);
  EXPECT_EQ(compute_flag(a).step, 2);
  EXPECT_TRUE(compute_flag(a).two_step());
}

TEST(Flag, GrowthVectorsMatchBruteForce) {
  const std::vector<std::pair<std::string, std::vector<int>>> expected{
      {"heisenberg3", {2, 3}}, {"engel4", {2, 3, 4}}, {"paper6", {2, 3, 5, 6}}, {"free24", {2, 3, 5, 8}}};
  for (const auto& [name, growth] : expected) {
    const auto a = builtin(name);
    EXPECT_EQ(oracle::growth_vector(a), growth) << name << " (oracle)";
    const auto f = compute_flag(a);
    EXPECT_EQ(f.growth_vector, growth) << name;
    EXPECT_EQ(f.step, static_cast<int>(growth.size()));
    EXPECT_TRUE(f.bracket_generating);
    EXPECT_TRUE(f.graded);
    EXPECT_TRUE(f.nilpotent);
    EXPECT_FALSE(f.step_cap_reached);
  }
}

TEST(Flag, SixDimensionalLevelsAreCoordinateSubspaces) {
  const auto f = compute_flag(builtin("paper6"));
  // D^3 = span{e1..e5}: e6 is orthogonal to it
  const Matrix& d3 = f.level(3);
  EXPECT_EQ(d3.cols(), 5);
  EXPECT_LE((d3.transpose() * Vector::Unit(6, 5)).cwiseAbs().maxCoeff(), 1e-14);
  // beyond the step the stabilized space is returned
  EXPECT_EQ(f.level(9).cols(), 6);
}

TEST(Flag, AbelianFullRank) {
  const auto f = compute_flag(abelian(4, 4));
  EXPECT_EQ(f.growth_vector, std::vector<int>{4});
  EXPECT_EQ(f.step, 1);
  EXPECT_TRUE(f.bracket_generating);
  EXPECT_EQ(f.nilpotency_class, 1);
}

TEST(Flag, AbelianNotBracketGenerating) {
  const auto f = compute_flag(abelian(3, 2));
  EXPECT_EQ(f.growth_vector, std::vector<int>{2});
  EXPECT_FALSE(f.bracket_generating);
}

TEST(Flag, NonNilpotentAlgebraIsReported) {
  // su(2): [e1,e2]=e3, [e2,e3]=e1, [e3,e1]=e2
  const LieAlgebra su2("su2", 3, 2, {{1, 2, 3, 1.0}, {2, 3, 1, 1.0}, {1, 3, 2, -1.0}});
  EXPECT_TRUE(validate(su2).valid);
  const auto f = compute_flag(su2);
  EXPECT_FALSE(f.nilpotent);
  EXPECT_EQ(f.growth_vector, (std::vector<int>{2, 3}));
  EXPECT_FALSE(f.graded);
}

TEST(Flag, StepCapIsReportedNotFatal) {
  const auto f = compute_flag(builtin("free24"), FlagOptions{1e-10, 2});
  EXPECT_TRUE(f.step_cap_reached);
  EXPECT_EQ(f.growth_vector, (std::vector<int>{2, 3}));
}

TEST(Flag, SolvableNonNilpotentAlgebra) {
  // [e1,e2]=e2 with D = span{e1}: [D,D] = 0, so the flag stops at D
  const LieAlgebra a("aff", 2, 1, {{1, 2, 2, 1.0}});
  EXPECT_TRUE(validate(a).valid);
  EXPECT_FALSE(validate(a).nilpotent);
  EXPECT_FALSE(compute_flag(a).bracket_generating);
}

TEST(DerivedComplement, BuiltinsSatisfyDirectSum) {
  EXPECT_TRUE(horizontal_complements_derived(builtin("paper6")));
  EXPECT_TRUE(horizontal_complements_derived(builtin("free24")));
  EXPECT_TRUE(horizontal_complements_derived(builtin("heisenberg3")));
  EXPECT_FALSE(horizontal_complements_derived(abelian(3, 2)));
}

TEST(AlgebraFormat, RoundTripBuiltins) {
  for (const auto& name : builtin_names()) {
    const auto a = builtin(name);
    EXPECT_EQ(parse_algebra(serialize_algebra(a)), a) << name;
  }
}

TEST(AlgebraFormat, SerializeIsCanonical) {
  const LieAlgebra a("odd", 3, 2, {{2, 3, 1, 0.1}, {1, 2, 3, -2.5}});
  EXPECT_EQ(serialize_algebra(a), "algebra odd\ndim 3\nrank 2\nbracket 1 2 3 -2.5\nbracket 2 3 1 0.1\n");
}

TEST(AlgebraFormat, RoundTripRandomCoefficientsExactly) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<StructureConstant> e{{1, 2, 3, u(rng)}, {1, 3, 4, u(rng)}, {2, 3, 4, u(rng) * 1e-9}};
    const LieAlgebra a("rand", 4, 2, e);
    EXPECT_EQ(parse_algebra(serialize_algebra(a)), a);
  }
}

TEST(AlgebraFormat, CommentsAndBlankLines) {
  const auto a = parse_algebra(
      "# Heisenberg\n\nalgebra h   # name\ndim 3\n  rank 2\nbracket 1 2 3 1   # [e1,e2]=e3\n\n");
  EXPECT_EQ(a.entries().size(), 1u);
  EXPECT_EQ(a.alpha(0, 1, 2), 1.0);
}

TEST(AlgebraFormat, ErrorsCarryLineNumbers) {
  const auto line_of = [](const std::string& text) {
    try {
      parse_algebra(text);
    } catch (const ParseError& e) {
      return e.line();
    }
    return -1;
  };
  EXPECT_EQ(line_of("algebra a\ndim 3\nrank 2\nbracket 1 1 3 1\n"), 4);  // i = j
  EXPECT_EQ(line_of("algebra a\ndim 3\nrank 2\nbracket 1 2 4 1\n"), 4);  // k > n
  EXPECT_EQ(line_of("algebra a\ndim 3\nrank 2\nbracket 2 1 3 1\n"), 4);  // i > j
  EXPECT_EQ(line_of("algebra a\ndim 3\nrank 2\nbracket 1 2 3 1\nbracket 1 2 3 2\n"), 5);
  EXPECT_EQ(line_of("algebra a\ndim x\n"), 2);
  EXPECT_EQ(line_of("algebra a\ndim 3\nrank 2\nbracket 1 2 3\n"), 4);
  EXPECT_EQ(line_of("algebra a\ndim 3\nrank 2\nbracket 1 2 3 nan\n"), 4);
  EXPECT_EQ(line_of("algebra a\ndim 3\nrank 2\nfoo 1\n"), 4);
  EXPECT_EQ(line_of("dim 3\nrank 2\n"), 3);
  EXPECT_EQ(line_of("algebra a\ndim 3\nrank 5\n"), 3);
}
