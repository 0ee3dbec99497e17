#include <cmath>

#include <gtest/gtest.h>

#include "amc/lsm.hpp"
#include "amc/oracle.hpp"

using namespace amc;

namespace {

// Paper values carry their own sampling noise, so the tolerance combines
// both standard errors.
void expect_near_paper(const PricingResult& r, double paper, double paper_se) {
    EXPECT_NEAR(r.price, paper, 3.0 * std::hypot(r.standard_error, paper_se)) << "se " << r.standard_error;
}

}  // namespace

TEST(Lsm, PaperSetup) {
    const MarketParams p;
    const auto r = price_lsm(p, ExerciseSchedule::uniform(1.0, 50), LsmConfig{}).result;
    EXPECT_EQ(r.engine, "lsm");
    EXPECT_EQ(r.n_paths, 100'000);
    expect_near_paper(r, 4.467, 0.009);
    EXPECT_NEAR(r.standard_error, 0.009, 0.002);
    EXPECT_DOUBLE_EQ(r.ci95_halfwidth, 1.96 * r.standard_error);
}

TEST(Lsm, HighVolLongMaturityRow) {
    MarketParams p;
    p.spot = 44.0;
    p.vol = 0.4;
    p.maturity = 2.0;
    const auto r = price_lsm(p, ExerciseSchedule::uniform(2.0, 100), LsmConfig{}).result;
    expect_near_paper(r, 5.651, 0.021);
    EXPECT_NEAR(r.standard_error, 0.021, 0.003);
}

TEST(Lsm, SingleDateIsEuropean) {
    const MarketParams p;
    const auto r = price_lsm(p, ExerciseSchedule::uniform(1.0, 1), LsmConfig{}).result;
    EXPECT_NEAR(r.price, european_put_closed_form(p), 3.0 * r.standard_error);
}

TEST(Lsm, AmericanAboveEuropean) {
    MarketParams p;
    p.spot = 40.0;
    LsmConfig c;
    c.n_paths = 50'000;
    const auto r = price_lsm(p, ExerciseSchedule::uniform(1.0, 50), c).result;
    EXPECT_GE(r.price, european_put_closed_form(p) - 3.0 * r.standard_error);
}

TEST(Lsm, DeterministicAndIndependentOfPathGeneration) {
    const MarketParams p;
    const auto s = ExerciseSchedule::uniform(1.0, 50);
    LsmConfig c;
    c.n_paths = 20'000;
    const auto a = price_lsm(p, s, c).result;
    const auto b = price_lsm(p, s, c).result;
    EXPECT_EQ(a.price, b.price);
    c.parallel_paths = true;
    c.workers = 3;
    EXPECT_EQ(price_lsm(p, s, c).result.price, a.price);
    c.seed = 43;
    EXPECT_NE(price_lsm(p, s, c).result.price, a.price);
}

TEST(Lsm, DegenerateDateIsReported) {
    MarketParams p;
    p.vol = 0.0;
    LsmConfig c;
    c.n_paths = 100;
    c.ridge = 0.0;
    try {
        price_lsm(p, ExerciseSchedule::uniform(1.0, 50), c);
        FAIL() << "identical paths should make the regression singular";
    } catch (const DegenerateRegression& e) {
        EXPECT_EQ(e.block(), 49);
        EXPECT_NE(std::string(e.what()).find("date 49"), std::string::npos);
    }
    c.ridge = kDefaultRidge;
    EXPECT_NO_THROW(price_lsm(p, ExerciseSchedule::uniform(1.0, 50), c));
}

TEST(Lsm, CoefficientsPerDate) {
    const MarketParams p;
    LsmConfig c;
    c.n_paths = 10'000;
    const auto run = price_lsm(p, ExerciseSchedule::uniform(1.0, 50), c);
    ASSERT_EQ(run.coefficients.alpha.size(), 50u);
    EXPECT_FALSE(run.coefficients.has(49));
    for (int b = 0; b < 49; ++b) EXPECT_TRUE(run.coefficients.has(b));
    EXPECT_GT(run.result.phase_ms("total"), 0.0);
}
