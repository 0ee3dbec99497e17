#include <cmath>
#include <sstream>

#include <gtest/gtest.h>

#include "amc/diagnostics.hpp"

using namespace amc;

TEST(Rate, SyntheticSlopes) {
    const std::vector<double> n{1e4, 4e4, 1.6e5, 6.4e5};
    std::vector<double> half, full;
    for (double x : n) {
        half.push_back(3.0 / std::sqrt(x));
        full.push_back(3.0 / x);
    }
    EXPECT_NEAR(estimate_rate(n, half).slope, -0.5, 1e-12);
    EXPECT_NEAR(estimate_rate(n, half).slope_se, 0.0, 1e-10);
    EXPECT_NEAR(estimate_rate(n, full).slope, -1.0, 1e-12);
    EXPECT_EQ(estimate_rate(n, half).n_points, 4);
}

TEST(Rate, ScaleInvariant) {
    const std::vector<double> n{10, 20, 100, 200};
    const std::vector<double> se{0.03, 0.021, 0.011, 0.0068};
    std::vector<double> scaled;
    for (double s : se) scaled.push_back(17.0 * s);
    EXPECT_NEAR(estimate_rate(n, se).slope, estimate_rate(n, scaled).slope, 1e-12);
    EXPECT_NEAR(estimate_rate(n, se).slope_se, estimate_rate(n, scaled).slope_se, 1e-12);
}

TEST(Rate, NeedsThreePositivePoints) {
    EXPECT_THROW(estimate_rate({1, 2}, {1, 2}), std::invalid_argument);
    EXPECT_THROW(estimate_rate({1, 2, 3}, {1, 0, 2}), std::invalid_argument);
    EXPECT_THROW(estimate_rate({2, 2, 2}, {1, 2, 3}), std::invalid_argument);
}

TEST(Study, ValidationAndStatisticalFlag) {
    ConvergenceStudy s;
    s.points = {1, 2};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.points = {1, 2.5, 3};
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.points = {1, 2, 3};
    s.repeats = 0;
    EXPECT_THROW(s.validate(), std::invalid_argument);
    s.repeats = 3;
    EXPECT_NO_THROW(s.validate());
    EXPECT_FALSE(s.supports_statistical_claims());
    s.repeats = 5;
    EXPECT_TRUE(s.supports_statistical_claims());
}

TEST(Study, SummaryStatistics) {
    ConvergenceStudy s;
    s.points = {10, 20, 30};
    s.repeats = 2;
    s.rows = {{10, 0, 1.0, 0.1, 5}, {10, 1, 3.0, 0.3, 7}, {20, 0, 2.0, 0.2, 1}, {20, 1, 2.0, 0.2, 1},
              {30, 0, 0.5, 0.1, 2}, {30, 1, 1.5, 0.1, 4}};
    const auto sum = summarize(s);
    ASSERT_EQ(sum.size(), 3u);
    EXPECT_EQ(sum[0].mean_price, 2.0);
    EXPECT_NEAR(sum[0].empirical_sd, std::sqrt(2.0), 1e-15);
    EXPECT_NEAR(sum[0].empirical_se, 1.0, 1e-15);
    EXPECT_NEAR(sum[0].mean_se_internal, 0.2, 1e-15);
    EXPECT_EQ(sum[0].mean_wall_ms, 6.0);
    EXPECT_EQ(sum[1].empirical_sd, 0.0);
}

TEST(Study, CsvRoundTrip) {
    ConvergenceStudy s;
    s.axis = StudyAxis::iterations;
    s.points = {10, 20, 100};
    s.repeats = 2;
    for (double p : s.points)
        for (int r = 0; r < 2; ++r) s.rows.push_back({p, r, 4.4 + 1.0 / (3.0 * p + r), 0.009 / 7.0 * (r + 1), 1234.5678 / p});
    std::stringstream ss;
    write_study_csv(ss, s);
    const auto back = read_study_csv(ss, StudyAxis::iterations);
    EXPECT_EQ(back.points, s.points);
    EXPECT_EQ(back.repeats, 2);
    EXPECT_EQ(back.rows, s.rows);
    std::stringstream bad("x,y\n");
    EXPECT_THROW(read_study_csv(bad, StudyAxis::paths), std::runtime_error);
}

TEST(Study, PathAxisRateOnRealEngine) {
    ParallelSetup base;
    base.plan = IterationPlan::from_total(4'000, 10);
    ConvergenceStudy s;
    s.axis = StudyAxis::paths;
    s.points = {4'000, 16'000, 64'000};
    s.repeats = 2;
    s = run_convergence_study(s, base);
    ASSERT_EQ(s.rows.size(), 6u);
    ASSERT_EQ(s.traces.size(), 6u);
    EXPECT_EQ(s.traces[0].size(), 10u);
    EXPECT_NE(s.rows[0].price, s.rows[1].price);  // repeats use different seeds
    const auto rate = estimate_rate(s);
    EXPECT_GE(rate.slope, -0.6);
    EXPECT_LE(rate.slope, -0.4);
    std::stringstream traces;
    write_study_traces_csv(traces, s);
    EXPECT_EQ(traces.str().rfind("axis_value,repeat,iteration", 0), 0u);
}

TEST(Study, WorkerAxisGivesIdenticalPrices) {
    ParallelSetup base;
    base.plan = IterationPlan::from_total(10'000, 10);
    ConvergenceStudy s;
    s.axis = StudyAxis::workers;
    s.points = {1, 2, 4};
    s.repeats = 1;
    s = run_convergence_study(s, base);
    EXPECT_EQ(s.rows[0].price, s.rows[1].price);
    EXPECT_EQ(s.rows[0].price, s.rows[2].price);
}
