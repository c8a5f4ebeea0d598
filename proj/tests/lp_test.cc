#include "robustnet/lp.h"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>
#include <random>

#include "oracles/lp_oracle.h"
#include "robustnet/errors.h"

namespace robustnet {
namespace {

TEST(SolveLpTest, SingleUpperBoundRow) {
  LinearProgram lp(ObjectiveSense::kMaximize);
  int x = lp.AddVariable(0.0, kInfinity, 1.0);
  lp.AddRow({{x, 1.0}}, RowRelation::kLessEqual, 1.0);
  LpSolution sol = SolveLp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.primal[x], 1.0, 1e-12);
  EXPECT_NEAR(sol.objective, 1.0, 1e-12);
  EXPECT_TRUE(VerifyCertificate(lp, sol).pass);
}

TEST(SolveLpTest, DominatedConstraint) {
  LinearProgram lp;
  int x = lp.AddVariable(-kInfinity, kInfinity, 1.0);
  lp.AddRow({{x, 1.0}}, RowRelation::kGreaterEqual, 3.0);
  lp.AddRow({{x, 1.0}}, RowRelation::kGreaterEqual, 5.0);
  LpSolution sol = SolveLp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.primal[x], 5.0, 1e-12);
  CertificateCheck check = VerifyCertificate(lp, sol);
  EXPECT_TRUE(check.pass) << check.detail;
  EXPECT_NEAR(sol.duals[1], 1.0, 1e-12);
  EXPECT_NEAR(sol.duals[0], 0.0, 1e-12);
}

TEST(SolveLpTest, EmptyProgramIsOptimalWithZeroGap) {
  LinearProgram lp;
  LpSolution sol = SolveLp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  CertificateCheck check = VerifyCertificate(lp, sol);
  EXPECT_TRUE(check.pass);
  EXPECT_EQ(check.gap, 0.0);
}

TEST(SolveLpTest, DetectsInfeasibilityWithFarkasRay) {
  LinearProgram lp;
  int x = lp.AddVariable(0.0, kInfinity, 1.0);
  int y = lp.AddVariable(0.0, kInfinity, 1.0);
  lp.AddRow({{x, 1.0}, {y, 1.0}}, RowRelation::kLessEqual, 1.0);
  lp.AddRow({{x, 1.0}, {y, 2.0}}, RowRelation::kGreaterEqual, 3.0);
  LpSolution sol = SolveLp(lp);
  ASSERT_EQ(sol.status, LpStatus::kInfeasible);
  EXPECT_TRUE(VerifyInfeasibility(lp, sol));
}

TEST(SolveLpTest, DetectsUnboundedWithRay) {
  LinearProgram lp(ObjectiveSense::kMaximize);
  int x = lp.AddVariable(0.0, kInfinity, 1.0);
  int y = lp.AddVariable(0.0, kInfinity, 1.0);
  lp.AddRow({{x, 1.0}, {y, -1.0}}, RowRelation::kLessEqual, 1.0);
  LpSolution sol = SolveLp(lp);
  ASSERT_EQ(sol.status, LpStatus::kUnbounded);
  EXPECT_TRUE(VerifyUnboundedRay(lp, sol));
}

TEST(SolveLpTest, EqualityRowsAndFreeVariables) {
  // min x + y s.t. x - y = 2, x + y >= 4, y free.
  LinearProgram lp;
  int x = lp.AddVariable(0.0, 10.0, 1.0);
  int y = lp.AddVariable(-kInfinity, kInfinity, 1.0);
  lp.AddRow({{x, 1.0}, {y, -1.0}}, RowRelation::kEqual, 2.0);
  lp.AddRow({{x, 1.0}, {y, 1.0}}, RowRelation::kGreaterEqual, 4.0);
  LpSolution sol = SolveLp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_NEAR(sol.objective, 4.0, 1e-9);
  EXPECT_TRUE(VerifyCertificate(lp, sol).pass);
}

TEST(VerifyCertificateTest, RejectsPerturbedTightPrimal) {
  LinearProgram lp(ObjectiveSense::kMaximize);
  int x = lp.AddVariable(0.0, kInfinity, 3.0);
  int y = lp.AddVariable(0.0, kInfinity, 2.0);
  lp.AddRow({{x, 1.0}, {y, 1.0}}, RowRelation::kLessEqual, 4.0);
  lp.AddRow({{x, 1.0}, {y, 3.0}}, RowRelation::kLessEqual, 6.0);
  LpSolution sol = SolveLp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  ASSERT_TRUE(VerifyCertificate(lp, sol).pass);
  LpSolution tampered = sol;
  tampered.primal[x] += 1e-3;  // row 0 is tight at the optimum
  CertificateCheck check = VerifyCertificate(lp, tampered);
  EXPECT_FALSE(check.pass);
  EXPECT_NEAR(check.primal_residual, 1e-3, 1e-9);
}

TEST(VerifyCertificateTest, DimensionMismatchThrows) {
  LinearProgram lp;
  lp.AddVariable(0.0, 1.0, 1.0);
  LpSolution sol;
  sol.status = LpStatus::kOptimal;
  EXPECT_THROW(VerifyCertificate(lp, sol), StructuralError);
}

TEST(LinearProgramTest, ValidateRejectsNanAndBadIndices) {
  LinearProgram lp;
  int x = lp.AddVariable(0.0, 1.0, 1.0);
  lp.AddRow({{x, std::nan("")}}, RowRelation::kLessEqual, 1.0);
  EXPECT_THROW(lp.Validate(), StructuralError);
  LinearProgram lp2;
  lp2.AddVariable(0.0, 1.0, 1.0);
  lp2.AddRow({{3, 1.0}}, RowRelation::kLessEqual, 1.0);
  EXPECT_THROW(SolveLp(lp2), StructuralError);
}

TEST(LinearProgramTest, DumpsLpFormat) {
  LinearProgram lp;
  int x = lp.AddVariable(0.0, 4.0, 1.0, "flow");
  lp.AddRow({{x, 2.0}}, RowRelation::kGreaterEqual, 1.0);
  std::string path = ::testing::TempDir() + "/dump.lp";
  LpOptions options;
  options.dump_path = path;
  SolveLp(lp, options);
  std::ifstream in(path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_NE(text.find("Minimize"), std::string::npos);
  EXPECT_NE(text.find("2 flow >= 1"), std::string::npos);
  EXPECT_NE(text.find("0 <= flow <= 4"), std::string::npos);
  std::remove(path.c_str());
}

LinearProgram RandomLp(std::mt19937_64& rng, int vars, int rows) {
  std::uniform_int_distribution<int> coef(-5, 5);
  std::uniform_int_distribution<int> rel(0, 5);
  std::uniform_int_distribution<int> sense(0, 1);
  LinearProgram lp(sense(rng) ? ObjectiveSense::kMaximize : ObjectiveSense::kMinimize);
  for (int j = 0; j < vars; ++j) lp.AddVariable(-3.0 + (j % 2) * 3.0, 6.0, coef(rng));
  for (int i = 0; i < rows; ++i) {
    std::vector<LpTerm> terms;
    for (int j = 0; j < vars; ++j) {
      int c = coef(rng);
      if (c != 0) terms.push_back({j, static_cast<double>(c)});
    }
    int r = rel(rng);
    RowRelation relation = r < 3 ? RowRelation::kLessEqual : (r < 5 ? RowRelation::kGreaterEqual : RowRelation::kEqual);
    lp.AddRow(std::move(terms), relation, static_cast<double>(coef(rng) * 2));
  }
  return lp;
}

// Random 5-variable / 8-row programs against brute-force vertex enumeration.
TEST(SolveLpTest, MatchesVertexEnumeration) {
  std::mt19937_64 rng(20240611);
  int optimal = 0;
  for (int trial = 0; trial < 100; ++trial) {
    LinearProgram lp = RandomLp(rng, 5, 8);
    LpSolution sol = SolveLp(lp);
    std::optional<double> expected = oracle::VertexEnumerationOptimum(lp);
    if (!expected) {
      EXPECT_EQ(sol.status, LpStatus::kInfeasible) << "trial " << trial;
      EXPECT_TRUE(VerifyInfeasibility(lp, sol)) << "trial " << trial;
      continue;
    }
    ++optimal;
    ASSERT_EQ(sol.status, LpStatus::kOptimal) << "trial " << trial;
    EXPECT_NEAR(sol.objective, *expected, 1e-7) << "trial " << trial;
    CertificateCheck check = VerifyCertificate(lp, sol);
    EXPECT_TRUE(check.pass) << "trial " << trial << " " << check.detail;
  }
  EXPECT_GT(optimal, 20);
}

TEST(SolveLpTest, DeterministicOutput) {
  std::mt19937_64 rng(7);
  LinearProgram lp = RandomLp(rng, 6, 9);
  LpSolution a = SolveLp(lp);
  LpSolution b = SolveLp(lp);
  EXPECT_EQ(a.status, b.status);
  EXPECT_EQ(a.primal, b.primal);
  EXPECT_EQ(a.duals, b.duals);
}

// A degenerate transportation-style program large enough to exercise
// refactorization and the Bland fallback.
TEST(SolveLpTest, LargerDegenerateProgram) {
  const int supply = 30;
  const int demand = 30;
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> cost(1, 9);
  LinearProgram lp;
  std::vector<std::vector<int>> var(supply, std::vector<int>(demand));
  for (int i = 0; i < supply; ++i) {
    for (int j = 0; j < demand; ++j) var[i][j] = lp.AddVariable(0.0, kInfinity, cost(rng));
  }
  for (int i = 0; i < supply; ++i) {
    std::vector<LpTerm> row;
    for (int j = 0; j < demand; ++j) row.push_back({var[i][j], 1.0});
    lp.AddRow(row, RowRelation::kEqual, 1.0);
  }
  for (int j = 0; j < demand; ++j) {
    std::vector<LpTerm> row;
    for (int i = 0; i < supply; ++i) row.push_back({var[i][j], 1.0});
    lp.AddRow(row, RowRelation::kEqual, 1.0);
  }
  LpSolution sol = SolveLp(lp);
  ASSERT_EQ(sol.status, LpStatus::kOptimal);
  EXPECT_GT(sol.refactorizations, 1);
  CertificateCheck check = VerifyCertificate(lp, sol);
  EXPECT_TRUE(check.pass) << check.detail;
  // Assignment LPs have integral optima.
  EXPECT_NEAR(sol.objective, std::round(sol.objective), 1e-7);
}

TEST(SolveLpTest, DualityGapOnHundredRandomPrograms) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    LinearProgram lp = RandomLp(rng, 12, 10);
    LpSolution sol = SolveLp(lp);
    if (sol.status != LpStatus::kOptimal) continue;
    CertificateCheck check = VerifyCertificate(lp, sol);
    EXPECT_LE(check.gap, 1e-7 * (1.0 + std::abs(sol.objective))) << "trial " << trial;
    EXPECT_TRUE(check.pass) << "trial " << trial << " " << check.detail;
  }
}

}  // namespace
}  // namespace robustnet
