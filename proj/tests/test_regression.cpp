#include <random>

#include <gtest/gtest.h>

#include "amc/regression.hpp"
#include "properties.hpp"

using namespace amc;

namespace {

ExerciseSchedule six_dates() { return ExerciseSchedule::uniform(3.0, 6); }  // 0.5, 1, ..., 3

}  // namespace

TEST(Basis, MonomialExamples) {
    const BasisSpec spec(six_dates(), 6, BasisKind::time_quadratic);
    const auto a = basis_eval(spec, 0, 2.0, 3.0);
    EXPECT_EQ(std::vector<double>(a.data(), a.data() + 6), (std::vector<double>{1, 2, 4, 3, 6, 12}));
    const auto b = basis_eval(spec, 0, 36.0, 0.5);
    EXPECT_EQ(std::vector<double>(b.data(), b.data() + 6), (std::vector<double>{1, 36, 1296, 0.5, 18, 648}));
    const auto c = basis_values(BasisKind::time_quadratic, 0.0, 0.0);
    EXPECT_EQ(std::vector<double>(c.data(), c.data() + 6), (std::vector<double>{1, 0, 0, 0, 0, 0}));
}

TEST(Basis, RejectsTimeOutsideBlock) {
    const BasisSpec spec(six_dates(), 2, BasisKind::time_quadratic);
    EXPECT_THROW(basis_eval(spec, 0, 36.0, 2.0), std::invalid_argument);   // date 4 lives in block 1
    EXPECT_THROW(basis_eval(spec, 0, 36.0, 0.75), std::invalid_argument);  // not an exercise date
    EXPECT_NO_THROW(basis_eval(spec, 1, 36.0, 2.0));
}

TEST(Basis, BlocksPartitionDates) {
    const auto schedule = ExerciseSchedule::uniform(1.0, 50);
    const BasisSpec spec(schedule, 10, BasisKind::time_quadratic);
    EXPECT_EQ(spec.n_blocks(), 5);
    EXPECT_EQ(spec.total_dim(), 30);
    int expected_first = 1;
    for (int b = 0; b < spec.n_blocks(); ++b) {
        EXPECT_EQ(spec.first_date(b), expected_first);
        for (int k = spec.first_date(b); k <= spec.last_date(b); ++k) EXPECT_EQ(spec.block_of_date(k), b);
        expected_first = spec.last_date(b) + 1;
    }
    EXPECT_EQ(expected_first, 51);
    const BasisSpec uneven(schedule, 7, BasisKind::quadratic);
    EXPECT_EQ(uneven.n_blocks(), 8);
    EXPECT_EQ(uneven.last_date(7), 50);
    const auto per_date = BasisSpec::per_date(schedule);
    EXPECT_EQ(per_date.n_blocks(), 50);
    EXPECT_EQ(per_date.dim(), 3);
}

TEST(NormalEquationsTest, ZeroWeightIsNoOp) {
    NormalEquations ne(1, 3);
    BasisVector f(3);
    f << 1, 2, 3;
    ne.accumulate(0, 0.0, f, 5.0);
    EXPECT_EQ(ne.block(0).u, BasisMatrix::Zero(3, 3));
    EXPECT_EQ(ne.block(0).mass, 0.0);
}

TEST(NormalEquationsTest, EmptyAccumulationLeavesBootstrap) {
    const BasisSpec spec(six_dates(), 3, BasisKind::time_quadratic);
    const NormalEquations ne(spec);
    EXPECT_TRUE(solve_coefficients(ne, spec).is_bootstrap());
}

TEST(NormalEquationsTest, RejectsBadInput) {
    NormalEquations ne(1, 3);
    BasisVector f(2);
    f << 1, 2;
    EXPECT_THROW(ne.accumulate(0, 1.0, f, 1.0), std::invalid_argument);
    BasisVector g(3);
    g << 1, 2, 3;
    EXPECT_THROW(ne.accumulate(0, -1.0, g, 1.0), std::invalid_argument);
    NormalEquations other(2, 3);
    EXPECT_THROW(ne += other, std::invalid_argument);
}

TEST(NormalEquationsTest, LineIsRecoveredExactly) {
    NormalEquations ne(1, 2);
    for (double x : {-1.0, 0.0, 0.5, 2.0, 7.0}) {
        BasisVector f(2);
        f << 1.0, x;
        ne.accumulate(0, 1.0, f, 2.0 + 3.0 * x);
    }
    const auto a = solve_block(ne.block(0), 0);
    EXPECT_NEAR(a(0), 2.0, 1e-9);
    EXPECT_NEAR(a(1), 3.0, 1e-9);
}

TEST(NormalEquationsTest, ScaleExamples) {
    NormalEquations ne(2, 3);
    BasisVector f(3);
    f << 1, 2, 3;
    ne.accumulate(0, 0.7, f, 4.0);
    ne.accumulate(1, 1.3, f, -2.0);
    const auto same = scale(ne, 1.0);
    EXPECT_EQ(same.block(0).u, ne.block(0).u);
    EXPECT_EQ(same.block(1).v, ne.block(1).v);
    const auto zero = scale(ne, 0.0);
    EXPECT_EQ(zero.block(0).u, BasisMatrix::Zero(3, 3));
    EXPECT_EQ(zero.block(1).v, BasisVector::Zero(3));
    const auto twice = scale(scale(ne, 0.5), 0.25);
    const auto once = scale(ne, 0.125);
    EXPECT_EQ(twice.block(0).u, once.block(0).u);
    EXPECT_EQ(twice.block(1).v, once.block(1).v);
}

TEST(NormalEquationsTest, StaysSymmetricPsd) {
    NormalEquations ne(1, 6);
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> s(10, 70), w(0, 1);
    for (int i = 0; i < 500; ++i) ne.accumulate(0, w(rng), basis_values(BasisKind::time_quadratic, s(rng), w(rng)), s(rng));
    const Eigen::MatrixXd u = ne.block(0).u;
    EXPECT_EQ(u, u.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(u);
    EXPECT_GE(eig.eigenvalues().minCoeff(), -1e-9 * eig.eigenvalues().maxCoeff());
}

TEST(NormalEquationsTest, BatchLinearityAndMergeOrder) {
    EXPECT_EQ(amc_test::check_merge_associativity(), "");
    EXPECT_EQ(amc_test::check_merge_associativity(99), "");
}

TEST(Solve, IdentitySystem) {
    NormalBlock blk{BasisMatrix::Identity(3, 3), BasisVector(3), 1.0};
    blk.v << 1.5, -2.0, 0.25;
    const auto a = solve_block(blk, 0, 0.0);
    EXPECT_NEAR((a - blk.v).cwiseAbs().maxCoeff(), 0.0, 1e-15);
}

TEST(Solve, ExactRecoveryOfQuadraticInSpotAndTime) {
    EXPECT_EQ(amc_test::check_exact_recovery(), "");
    EXPECT_EQ(amc_test::check_exact_recovery(kDefaultRidge, 1e-6), "");
}

TEST(Solve, RankDeficientNeedsRidge) {
    NormalEquations ne(1, 3);
    for (int i = 0; i < 20; ++i) ne.accumulate(0, 1.0, basis_values(BasisKind::quadratic, 36.0, 0.0), 4.0 + 0.01 * i);
    try {
        solve_block(ne.block(0), 3, 0.0);
        FAIL() << "expected a degenerate regression";
    } catch (const DegenerateRegression& e) {
        EXPECT_EQ(e.block(), 3);
        EXPECT_NE(std::string(e.what()).find("3"), std::string::npos);
    }
    const auto a = solve_block(ne.block(0), 3);
    EXPECT_TRUE(a.allFinite());
    // The ridge solution still reproduces the mean target at the sample point.
    EXPECT_NEAR(a.dot(basis_values(BasisKind::quadratic, 36.0, 0.0)), 4.095, 1e-6);
}

TEST(Continuation, Examples) {
    const auto schedule = ExerciseSchedule::uniform(1.0, 10);
    const BasisSpec spec(schedule, 10, BasisKind::time_quadratic);
    CoefficientSet c = CoefficientSet::bootstrap(spec);
    EXPECT_THROW(continuation_value(c, spec, 36.0, 0.1), std::logic_error);
    BasisVector a = BasisVector::Zero(6);
    c.alpha[0] = a;
    EXPECT_EQ(continuation_value(c, spec, 36.0, 0.1), 0.0);
    a(0) = 2.5;
    c.alpha[0] = a;
    EXPECT_EQ(continuation_value(c, spec, 11.0, 0.7), 2.5);
    EXPECT_EQ(continuation_value(c, spec, 50.0, 0.2), 2.5);
    a << 1, 2, 3, 4, 5, 6;
    c.alpha[0] = a;
    EXPECT_NEAR(continuation_value(c, spec, 3.0, 0.1), 41.3, 1e-12);
    EXPECT_NEAR(continuation_at_date(c, spec, 1, 3.0), 41.3, 1e-12);
    EXPECT_THROW(continuation_value(c, spec, 3.0, 0.15), std::invalid_argument);
}

TEST(Coefficients, JsonRoundTripAndFingerprint) {
    const auto schedule = ExerciseSchedule::uniform(1.0, 50);
    const BasisSpec spec(schedule, 10, BasisKind::time_quadratic);
    CoefficientSet c = CoefficientSet::bootstrap(spec);
    BasisVector a(6);
    a << 0.1, -1.0 / 3.0, 1e-5, 2.0, 0.7, -3e-4;
    c.alpha[1] = a;
    c.alpha[4] = -a;
    const auto text = to_json(c).dump();
    const auto back = coefficients_from_json(nlohmann::json::parse(text), spec);
    EXPECT_EQ(back.fingerprint, c.fingerprint);
    EXPECT_EQ(back.alpha, c.alpha);
    const BasisSpec other(schedule, 5, BasisKind::time_quadratic);
    EXPECT_THROW(coefficients_from_json(nlohmann::json::parse(text), other), std::invalid_argument);
}

TEST(Coefficients, DebugDumpListsBlocks) {
    NormalEquations ne(2, 3);
    ne.accumulate(1, 1.0, basis_values(BasisKind::quadratic, 2.0, 0.0), 1.0);
    const auto j = to_json(ne);
    ASSERT_EQ(j.size(), 2u);
    EXPECT_EQ(j[1]["block"], 1);
    EXPECT_EQ(j[1]["U"].size(), 9u);
    EXPECT_EQ(j[1]["U"][4], 4.0);
}

TEST(ToyModel, RealizedAndExactRegressionAgree) {
    EXPECT_EQ(amc_test::check_toy_model(), "");
}
