#include <cmath>

#include <gtest/gtest.h>

#include "amc/oracle.hpp"
#include "properties.hpp"

using namespace amc;

namespace {

MarketParams with(double spot, double vol, double maturity) {
    MarketParams p;
    p.spot = spot;
    p.vol = vol;
    p.maturity = maturity;
    return p;
}

}  // namespace

TEST(ClosedForm, TableValues) {
    EXPECT_NEAR(european_put_closed_form(with(36, 0.2, 1)), 3.844, 5e-4);
    EXPECT_NEAR(european_put_closed_form(with(44, 0.4, 2)), 5.202, 5e-4);
}

TEST(ClosedForm, DegenerateInputs) {
    MarketParams p = with(30, 0.2, 1);
    p.maturity = 0.0;
    EXPECT_EQ(european_put_closed_form(p), 10.0);
    p.maturity = 1e-12;
    EXPECT_NEAR(european_put_closed_form(p), 10.0, 1e-9);
    p = with(36, 0.0, 1);
    EXPECT_NEAR(european_put_closed_form(p), 40.0 * std::exp(-0.06) - 36.0, 1e-12);
    p.spot = 39.0;
    EXPECT_EQ(european_put_closed_form(p), 0.0);
}

TEST(FiniteDifference, ReferencePrice) {
    const auto r = american_put_fd(MarketParams{}, FdGrid::for_strike(40.0));
    EXPECT_NEAR(r.price, 4.486, 1e-3);
}

TEST(FiniteDifference, TwoYearRow) {
    EXPECT_NEAR(american_put_fd(with(36, 0.2, 2), FdGrid::for_strike(40.0)).price, 4.847, 5e-3);
}

TEST(FiniteDifference, ZeroVolIsImmediateExerciseForPut) {
    // K e^{-rt} - S falls with t, so the best deterministic stopping time is now.
    for (double s : {30.0, 36.0, 39.2}) {
        const auto r = american_put_fd(with(s, 0.0, 1), FdGrid::for_strike(40.0, 2000, 500));
        double best = 0.0;
        for (int n = 0; n <= 2000; ++n) {
            const double t = n / 2000.0;
            best = std::max(best, std::exp(-0.06 * t) * std::max(40.0 - s * std::exp(0.06 * t), 0.0));
        }
        EXPECT_NEAR(r.price, best, 1e-3) << s;
    }
}

TEST(FiniteDifference, BermudanLimits) {
    const MarketParams p;
    const FdGrid g = FdGrid::for_strike(40.0, 400, 200);
    const double amer = american_put_fd(p, g).price;
    EXPECT_NEAR(american_put_fd_bermudan(p, g, ExerciseSchedule::uniform(1.0, 400)).price, amer, 1e-6);
    EXPECT_NEAR(american_put_fd_bermudan(p, g, ExerciseSchedule::uniform(1.0, 1)).price, european_put_fd(p, g), 1e-12);
    EXPECT_THROW(american_put_fd_bermudan(p, g, ExerciseSchedule::uniform(1.0, 7)), std::invalid_argument);
}

TEST(FiniteDifference, BermudanBetweenEuropeanAndAmerican) {
    const MarketParams p;
    const FdGrid g = FdGrid::for_strike(40.0, 4000, 500);
    const double b = american_put_fd_bermudan(p, g, ExerciseSchedule::uniform(1.0, 50)).price;
    EXPECT_GT(b, european_put_closed_form(p));
    EXPECT_LT(b, american_put_fd(p, g).price);
    EXPECT_EQ(amc_test::check_fd_monotone_in_exercise_rights(), "");
}

TEST(FiniteDifference, PsorAgreesWithProjection) {
    const MarketParams p;
    const FdGrid g = FdGrid::for_strike(40.0, 1000, 250);
    const double proj = american_put_fd(p, g, FdConstraint::projection).price;
    const double psor = american_put_fd(p, g, FdConstraint::psor).price;
    EXPECT_NEAR(psor, proj, 2e-3);
}

TEST(FiniteDifference, OrderingAgainstEuropeanAndIntrinsic) {
    const FdGrid g = FdGrid::for_strike(40.0, 2000, 500);
    for (double s : {28.0, 32.0, 36.0, 40.0, 44.0, 52.0}) {
        const MarketParams p = with(s, 0.3, 1);
        const double amer = american_put_fd(p, g).price;
        const double euro = european_put_closed_form(p);
        EXPECT_GE(amer, euro - 1e-3) << s;
        EXPECT_GE(euro, std::max(40.0 * std::exp(-0.06) - s, 0.0) - 1e-3) << s;
        EXPECT_GE(amer, std::max(40.0 - s, 0.0) - 1e-12) << s;
    }
}

TEST(FiniteDifference, RefinementDifferencesShrink) {
    const MarketParams p;
    std::vector<double> prices;
    for (int f = 1; f <= 8; f *= 2) prices.push_back(american_put_fd(p, FdGrid::for_strike(40.0, 500L * f, 125 * f)).price);
    for (std::size_t i = 2; i < prices.size(); ++i)
        EXPECT_LT(std::abs(prices[i] - prices[i - 1]), std::abs(prices[i - 1] - prices[i - 2]));
}

TEST(FiniteDifference, BoundaryRisesTowardStrike) {
    const FdGrid g = FdGrid::for_strike(40.0, 2000, 1000);
    const auto r = american_put_fd(MarketParams{}, g);
    const double ds = g.s_max / g.n_space_steps;
    ASSERT_EQ(r.boundary.size(), 2000u);
    for (std::size_t i = 1; i < r.boundary.size(); ++i) {
        ASSERT_TRUE(r.boundary[i].boundary.has_value());
        EXPECT_GE(*r.boundary[i].boundary, *r.boundary[i - 1].boundary - ds);
        EXPECT_LT(*r.boundary[i].boundary, 40.0);
    }
    EXPECT_GT(*r.boundary.back().boundary, *r.boundary.front().boundary);
}

TEST(FiniteDifference, GridValidation) {
    const MarketParams p;
    EXPECT_THROW(american_put_fd(p, FdGrid{0, 100, 160}), std::invalid_argument);
    EXPECT_THROW(american_put_fd(p, FdGrid{10, 2, 160}), std::invalid_argument);
    EXPECT_THROW(american_put_fd(p, FdGrid{10, 100, 30}), std::invalid_argument);
}
