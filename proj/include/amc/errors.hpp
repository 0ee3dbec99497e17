#pragma once

#include <stdexcept>
#include <string>

namespace amc {

/// Invalid run configuration. `key()` names the offending setting.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(key + ": " + what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

/// Base class for failures of the numerical machinery itself.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A normal-equation block that stays singular after regularization.
class DegenerateRegression : public NumericalError {
public:
    explicit DegenerateRegression(int block, const std::string& unit = "block")
        : NumericalError("degenerate regression in " + unit + " " + std::to_string(block)),
          block_(block) {}

    int block() const noexcept { return block_; }

private:
    int block_;
};

/// Projected SOR failed to converge inside a finite-difference time step.
class PsorDivergence : public NumericalError {
public:
    explicit PsorDivergence(long step)
        : NumericalError("PSOR did not converge at time step " + std::to_string(step)),
          step_(step) {}

    long step() const noexcept { return step_; }

private:
    long step_;
};

}  // namespace amc
