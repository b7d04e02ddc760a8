#include <gtest/gtest.h>

#include "oracle.hpp"
#include "shallowtree/calibrate.hpp"

using namespace shallowtree;

namespace {

struct Fixture {
    oracle::Instance inst = oracle::random_instance(31);
};

}  // namespace

TEST(Calibrate, EarlyExitWhenGoalsMet) {
    Fixture s;
    CalibrationGoal goal;
    goal.c_star = 1e300;
    goal.w_star = 1e300;
    const auto r = calibrate_lambda(s.inst.X, s.inst.S, s.inst.reference, goal);
    EXPECT_TRUE(r.goals_met);
    EXPECT_FALSE(r.failed);
    EXPECT_EQ(r.steps.size(), 1u);
    EXPECT_EQ(r.lambda, 0.03);
    EXPECT_EQ(r.tree, build_tree(s.inst.X, s.inst.S, Strategy::ex_shallow(0.03)));
}

TEST(Calibrate, UnreachableWaesReturnsMinimumWaesVisited) {
    Fixture s;
    CalibrationGoal goal;
    goal.w_star = 0.0;
    const auto r = calibrate_lambda(s.inst.X, s.inst.S, s.inst.reference, goal);
    EXPECT_FALSE(r.goals_met);
    EXPECT_FALSE(r.failed);
    EXPECT_LE(r.steps.size(), goal.max_rounds + 1);
    double min_waes = r.steps.front().waes;
    for (const auto& step : r.steps) {
        EXPECT_GE(step.lambda, 0.0);
        min_waes = std::min(min_waes, step.waes);
    }
    EXPECT_EQ(r.report.waes, min_waes);
    for (std::size_t i = 1; i < r.steps.size(); ++i) {
        EXPECT_GT(r.steps[i].lambda, r.steps[i - 1].lambda);
    }
}

TEST(Calibrate, ReturnedTreeWasBuiltDuringSearch) {
    Fixture s;
    CalibrationGoal goal;
    goal.c_star = 1.0;
    goal.w_star = 1.0;
    const auto r = calibrate_lambda(s.inst.X, s.inst.S, s.inst.reference, goal);
    bool found = false;
    for (const auto& step : r.steps) {
        found = found || step.lambda == r.lambda;
    }
    EXPECT_TRUE(found);
    EXPECT_EQ(r.tree, build_tree(s.inst.X, s.inst.S, Strategy::ex_shallow(r.lambda)));
    const auto again = calibrate_lambda(s.inst.X, s.inst.S, s.inst.reference, goal);
    EXPECT_EQ(again.lambda, r.lambda);
}

TEST(Calibrate, ImpossibleCostFlagsFailure) {
    Fixture s;
    CalibrationGoal goal;
    goal.c_star = 0.5;
    goal.w_star = 10.0;
    const auto r = calibrate_lambda(s.inst.X, s.inst.S, s.inst.reference, goal);
    EXPECT_TRUE(r.failed);
    EXPECT_FALSE(r.goals_met);
    EXPECT_EQ(r.steps[1].lambda, 0.0);
    for (const auto& step : r.steps) {
        EXPECT_GE(step.normalized_cost, r.report.normalized_cost);
    }
}

TEST(Calibrate, RejectsBadBracket) {
    Fixture s;
    CalibrationGoal goal;
    goal.lambda_init = 2.0;
    EXPECT_THROW(calibrate_lambda(s.inst.X, s.inst.S, s.inst.reference, goal),
                 std::invalid_argument);
    goal = {};
    goal.max_rounds = 0;
    EXPECT_THROW(calibrate_lambda(s.inst.X, s.inst.S, s.inst.reference, goal),
                 std::invalid_argument);
}
