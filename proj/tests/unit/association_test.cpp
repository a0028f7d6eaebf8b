#include "motrack/association.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <gtest/gtest.h>

#include "motrack/error.hpp"
#include "oracles/brute_force.hpp"

namespace motrack {
namespace {

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols, double lo = -1.0,
                              double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = u(rng);
  return m;
}

double total(const Eigen::MatrixXd& s, const std::vector<int>& row_to_col) {
  double acc = 0.0;
  for (std::size_t r = 0; r < row_to_col.size(); ++r)
    if (row_to_col[r] >= 0) acc += s(static_cast<Eigen::Index>(r), row_to_col[r]);
  return acc;
}

Eigen::MatrixXd col(std::initializer_list<double> v) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(v.size()), 1);
  Eigen::Index i = 0;
  for (double d : v) m(i++, 0) = d;
  return m;
}

TEST(ZDiff, ColumnExamples) {
  EXPECT_NEAR(z_diff_det(col({0.9, 0.2, 0.1}), 0, 0.5), 0.5, 1e-12);
  EXPECT_EQ(z_diff_det(col({0.5, 0.5}), 0, 0.5), 0.0);
  EXPECT_EQ(z_diff_det(col({0.5, 0.5}), 0, 7.0), 0.0);
  EXPECT_NEAR(z_diff_det(col({0.6, 0.4}), 0, 0.5), 0.2, 1e-12);
}

TEST(ZDiff, RowExamples) {
  EXPECT_NEAR(z_diff_track(col({1.0, 0.0}).transpose(), 0, 1.0), 1.0, 1e-12);
  EXPECT_EQ(z_diff_track(col({0.3}).transpose(), 0, 0.5), 0.5);
  EXPECT_EQ(z_diff_track(col({0.2, 0.2, 0.2}).transpose(), 0, 0.5), 0.0);
}

TEST(ZDiff, BoundedByEpsilon) {
  std::mt19937_64 rng(31);
  std::uniform_int_distribution<int> dim(1, 8);
  std::uniform_real_distribution<double> eps(0.01, 2.0);
  for (int i = 0; i < 1000; ++i) {
    const auto A = random_matrix(rng, dim(rng), dim(rng));
    const double e = eps(rng);
    for (Eigen::Index m = 0; m < A.rows(); ++m) {
      const double z = z_diff_track(A, m, e);
      ASSERT_GE(z, 0.0);
      ASSERT_LE(z, e);
    }
    for (Eigen::Index n = 0; n < A.cols(); ++n) {
      const double z = z_diff_det(A, n, e);
      ASSERT_GE(z, 0.0);
      ASSERT_LE(z, e);
    }
  }
}

TEST(ZDiff, ScalesLinearlyWithoutCap) {
  std::mt19937_64 rng(32);
  const double inf = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 200; ++i) {
    const auto A = random_matrix(rng, 4, 5);
    const double k = std::uniform_real_distribution<double>(0.1, 3.0)(rng);
    const Eigen::MatrixXd B = k * A;
    for (Eigen::Index m = 0; m < 4; ++m)
      for (Eigen::Index n = 0; n < 5; ++n) {
        const double wa = weight_boost(z_diff_track(A, m, inf), z_diff_det(A, n, inf));
        const double wb = weight_boost(z_diff_track(B, m, inf), z_diff_det(B, n, inf));
        ASSERT_NEAR(wb, k * wa, 1e-12);
      }
  }
}

TEST(ZDiff, ErrorPaths) {
  EXPECT_THROW(z_diff_det(Eigen::MatrixXd(0, 0), 0, 0.5), ContractError);
  EXPECT_THROW(z_diff_det(col({0.1, 0.2}), 1, 0.5), ContractError);
  EXPECT_THROW(z_diff_track(col({0.1, 0.2}), 2, 0.5), ContractError);
  EXPECT_THROW(z_diff_track(col({0.1, 0.2}), -1, 0.5), ContractError);
}

TEST(WeightBoost, Examples) {
  EXPECT_EQ(weight_boost(0.5, 0.5), 0.5);
  EXPECT_EQ(weight_boost(0.0, 0.0), 0.0);
  EXPECT_NEAR(weight_boost(0.5, 0.1), 0.3, 1e-15);
  EXPECT_EQ(weight_boost(0.1, 0.5), weight_boost(0.5, 0.1));
}

TEST(FuseCosts, SingleCandidateWorkedExample) {
  AssociationParams p;
  p.a_w = 0.75;
  p.epsilon = 0.5;
  p.lambda_ocm = 0.0;
  const Eigen::MatrixXd iou = Eigen::MatrixXd::Constant(1, 1, 0.5);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(1, 1, 0.8);
  const Eigen::MatrixXd ocm = Eigen::MatrixXd::Zero(1, 1);
  EXPECT_NEAR(fuse_costs(iou, A, ocm, p)(0, 0), 1.5, 1e-12);
}

TEST(FuseCosts, ZeroAppearanceIsIouMinusOcm) {
  std::mt19937_64 rng(33);
  const auto iou = random_matrix(rng, 3, 4, 0.0, 1.0);
  const auto ocm = random_matrix(rng, 3, 4, 0.0, std::numbers::pi);
  const Eigen::MatrixXd A = Eigen::MatrixXd::Zero(3, 4);
  AssociationParams p;
  const auto C = fuse_costs(iou, A, ocm, p);
  for (Eigen::Index m = 0; m < 3; ++m)
    for (Eigen::Index n = 0; n < 4; ++n) EXPECT_EQ(C(m, n), iou(m, n) - p.lambda_ocm * ocm(m, n));
  p.lambda_ocm = 0.0;
  EXPECT_EQ(fuse_costs(iou, A, ocm, p), iou);
}

TEST(FuseCosts, WithoutAdaptiveWeighting) {
  std::mt19937_64 rng(34);
  const auto iou = random_matrix(rng, 3, 3, 0.0, 1.0);
  const auto A = random_matrix(rng, 3, 3);
  const Eigen::MatrixXd ocm = Eigen::MatrixXd::Zero(3, 3);
  AssociationParams p;
  const auto C = fuse_costs(iou, A, ocm, p, false);
  EXPECT_LT((C - (iou + p.a_w * A)).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(FuseCosts, ShapeMismatchRejected) {
  AssociationParams p;
  EXPECT_THROW(fuse_costs(Eigen::MatrixXd::Zero(2, 2), Eigen::MatrixXd::Zero(2, 3),
                          Eigen::MatrixXd::Zero(2, 2), p),
               ContractError);
}

TEST(FuseCosts, ConstantAppearanceKeepsIouAssignment) {
  std::mt19937_64 rng(35);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int i = 0; i < 300; ++i) {
    const int r = dim(rng);
    const int c = dim(rng);
    const auto iou = random_matrix(rng, r, c, 0.0, 1.0);
    const double k = std::uniform_real_distribution<double>(-1.0, 1.0)(rng);
    const Eigen::MatrixXd A = Eigen::MatrixXd::Constant(r, c, k);
    AssociationParams p;
    p.lambda_ocm = 0.0;
    const auto C = fuse_costs(iou, A, Eigen::MatrixXd::Zero(r, c), p);
    const auto from_c = max_weight_assignment(C);
    const auto from_iou = max_weight_assignment(iou);
    EXPECT_EQ(from_c, from_iou);
    EXPECT_NEAR(total(iou, from_c), oracle::best_total(iou), 1e-9);
  }
}

TEST(Assignment, DiagonalExample) {
  Eigen::MatrixXd C(2, 2);
  C << 1, 0, 0, 1;
  const auto r = solve_assignment(C, C, 0.3);
  EXPECT_EQ(r.matches, (std::vector<std::pair<int, int>>{{0, 0}, {1, 1}}));
  EXPECT_TRUE(r.unmatched_tracks.empty());
  EXPECT_TRUE(r.unmatched_dets.empty());
}

TEST(Assignment, MatchesBruteForce) {
  std::mt19937_64 rng(36);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int i = 0; i < 2000; ++i) {
    const auto s = random_matrix(rng, dim(rng), dim(rng), -2.0, 2.0);
    const auto a = max_weight_assignment(s);
    ASSERT_EQ(a.size(), static_cast<std::size_t>(s.rows()));
    std::set<int> cols;
    int matched = 0;
    for (int c : a) {
      if (c < 0) continue;
      ++matched;
      ASSERT_TRUE(cols.insert(c).second);
    }
    ASSERT_EQ(matched, std::min(s.rows(), s.cols()));
    ASSERT_NEAR(total(s, a), oracle::best_total(s), 1e-9);
  }
}

TEST(Assignment, ConstantShiftKeepsMatchSet) {
  std::mt19937_64 rng(37);
  std::uniform_int_distribution<int> dim(1, 5);
  for (int i = 0; i < 500; ++i) {
    const int r = dim(rng);
    const int c = dim(rng);
    const auto s = random_matrix(rng, r, c);
    const double k = std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
    const Eigen::MatrixXd iou = Eigen::MatrixXd::Ones(r, c);
    const auto a = solve_assignment(s, iou, 0.3);
    const auto b = solve_assignment((s.array() + k).matrix(), iou, 0.3);
    EXPECT_EQ(a.matches, b.matches);
  }
}

TEST(Assignment, TiesAreDeterministicAndOptimal) {
  std::mt19937_64 rng(38);
  std::uniform_int_distribution<int> dim(1, 5);
  std::uniform_int_distribution<int> level(0, 2);
  for (int i = 0; i < 500; ++i) {
    const int r = dim(rng);
    const int c = dim(rng);
    Eigen::MatrixXd s(r, c);
    for (int y = 0; y < r; ++y)
      for (int x = 0; x < c; ++x) s(y, x) = 0.5 * level(rng);
    const auto a = max_weight_assignment(s);
    EXPECT_EQ(a, max_weight_assignment(s));
    const auto optima = oracle::optimal_matchings(s);
    EXPECT_NE(std::find(optima.begin(), optima.end(), a), optima.end());
  }
}

TEST(Assignment, ConstantMatrixPicksIdentity) {
  const auto a = max_weight_assignment(Eigen::MatrixXd::Ones(3, 3));
  EXPECT_EQ(a, (std::vector<int>{0, 1, 2}));
}

TEST(Assignment, IouFloorDemotes) {
  Eigen::MatrixXd s(2, 2);
  s << 2, 0, 0, 2;
  Eigen::MatrixXd iou(2, 2);
  iou << 0.9, 0.0, 0.0, 0.1;
  const auto r = solve_assignment(s, iou, 0.3);
  EXPECT_EQ(r.matches, (std::vector<std::pair<int, int>>{{0, 0}}));
  EXPECT_EQ(r.unmatched_tracks, std::vector<int>{1});
  EXPECT_EQ(r.unmatched_dets, std::vector<int>{1});
}

TEST(Assignment, RectangularLeavesExtras) {
  Eigen::MatrixXd s(3, 1);
  s << 0.2, 0.9, 0.4;
  const auto r = solve_assignment(s, Eigen::MatrixXd::Ones(3, 1), 0.3);
  EXPECT_EQ(r.matches, (std::vector<std::pair<int, int>>{{1, 0}}));
  EXPECT_EQ(r.unmatched_tracks, (std::vector<int>{0, 2}));
  EXPECT_TRUE(r.unmatched_dets.empty());
}

TEST(Assignment, EmptyInputs) {
  const auto r = solve_assignment(Eigen::MatrixXd(0, 3), Eigen::MatrixXd(0, 3), 0.3);
  EXPECT_TRUE(r.matches.empty());
  EXPECT_EQ(r.unmatched_dets, (std::vector<int>{0, 1, 2}));
  const auto t = solve_assignment(Eigen::MatrixXd(2, 0), Eigen::MatrixXd(2, 0), 0.3);
  EXPECT_EQ(t.unmatched_tracks, (std::vector<int>{0, 1}));
}

TEST(Assignment, ErrorPaths) {
  Eigen::MatrixXd s = Eigen::MatrixXd::Ones(2, 2);
  EXPECT_THROW(solve_assignment(s, Eigen::MatrixXd::Ones(2, 3), 0.3), ContractError);
  s(0, 1) = std::nan("");
  EXPECT_THROW(solve_assignment(s, Eigen::MatrixXd::Ones(2, 2), 0.3), ContractError);
}

TEST(IouMatrix, Shape) {
  const std::vector<Box> t = {{0, 0, 2, 2}, {10, 10, 1, 1}};
  const std::vector<Box> d = {{1, 0, 2, 2}};
  const auto m = iou_matrix(t, d);
  ASSERT_EQ(m.rows(), 2);
  ASSERT_EQ(m.cols(), 1);
  EXPECT_NEAR(m(0, 0), 1.0 / 3.0, 1e-15);
  EXPECT_EQ(m(1, 0), 0.0);
}

TEST(Ocm, DirectionExamples) {
  const std::vector<Box> history = {{0, 0, 2, 2}, {2, 0, 2, 2}};
  const Box last{4, 0, 2, 2};
  EXPECT_NEAR(ocm_cost(history, last, {6, 0, 2, 2}), 0.0, 1e-12);
  EXPECT_NEAR(ocm_cost(history, last, {2, 0, 2, 2}), std::numbers::pi, 1e-12);
  EXPECT_NEAR(ocm_cost(history, last, {4, 3, 2, 2}), std::numbers::pi / 2, 1e-12);
}

TEST(Ocm, NoDirectionGivesZero) {
  const Box b{0, 0, 2, 2};
  EXPECT_EQ(ocm_cost(std::vector<Box>{b}, b, {5, 5, 2, 2}), 0.0);
  EXPECT_EQ(ocm_cost(std::vector<Box>{b, b}, b, {5, 5, 2, 2}), 0.0);
  const std::vector<Box> moving = {{0, 0, 2, 2}, {2, 0, 2, 2}};
  EXPECT_EQ(ocm_cost(moving, {2, 0, 2, 2}, {2, 0, 2, 2}), 0.0);
}

}  // namespace
}  // namespace motrack
