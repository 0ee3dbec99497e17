#pragma once

#include <algorithm>
#include <concepts>
#include <stdexcept>

namespace amc {

/// What an engine needs from a product: the exercise value at a given state
/// and whether that state is eligible for exercise.
template <class P>
concept Payoff = requires(const P& p, double spot) {
    { p.exercise_value(spot) } -> std::convertible_to<double>;
    { p.in_the_money(spot) } -> std::convertible_to<bool>;
};

class PutPayoff {
public:
    explicit PutPayoff(double strike) : strike_(strike) {
        if (!(strike > 0.0)) throw std::invalid_argument("strike must be > 0");
    }

    double strike() const noexcept { return strike_; }
    double exercise_value(double spot) const noexcept { return std::max(strike_ - spot, 0.0); }
    // At the money is not in the money.
    bool in_the_money(double spot) const noexcept { return spot < strike_; }

private:
    double strike_;
};

static_assert(Payoff<PutPayoff>);

}  // namespace amc
