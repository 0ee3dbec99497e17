#pragma once

// Regression machinery for continuation values: basis functions in (spot, time),
// block-diagonal normal equations U_b, V_b and their regularized solution.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "amc/errors.hpp"
#include "amc/market.hpp"

namespace amc {

inline constexpr int kMaxBasis = 6;

using BasisVector = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxBasis, 1>;
using BasisMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxBasis, kMaxBasis>;

enum class BasisKind {
    quadratic,       ///< 1, S, S^2
    time_quadratic,  ///< 1, S, S^2, t, tS, tS^2
};

inline int basis_dimension(BasisKind kind) noexcept { return kind == BasisKind::quadratic ? 3 : 6; }

inline const char* to_string(BasisKind kind) noexcept {
    return kind == BasisKind::quadratic ? "quadratic" : "time-quadratic";
}

/// Raw monomials; `time` is the absolute exercise time in years.
inline BasisVector basis_values(BasisKind kind, double spot, double time) {
    BasisVector f(basis_dimension(kind));
    f(0) = 1.0;
    f(1) = spot;
    f(2) = spot * spot;
    if (kind == BasisKind::time_quadratic) {
        f(3) = time;
        f(4) = time * spot;
        f(5) = time * spot * spot;
    }
    return f;
}

/// Partition of the exercise dates 1..M into contiguous blocks of
/// `dates_per_block` dates (the last block takes the remainder), each with its
/// own copy of the basis. Blocks are 0-based; dates are 1-based.
class BasisSpec {
public:
    BasisSpec(const ExerciseSchedule& schedule, int dates_per_block, BasisKind kind)
        : times_(schedule.dates().begin(), schedule.dates().end()),
          per_block_(dates_per_block),
          kind_(kind) {
        if (dates_per_block < 1) throw std::invalid_argument("dates_per_block must be >= 1");
    }

    /// One block per date with {1, S, S^2}: the classical date-by-date regression.
    static BasisSpec per_date(const ExerciseSchedule& schedule) {
        return BasisSpec(schedule, 1, BasisKind::quadratic);
    }

    BasisKind kind() const noexcept { return kind_; }
    int dim() const noexcept { return basis_dimension(kind_); }
    int n_dates() const noexcept { return static_cast<int>(times_.size()); }
    int dates_per_block() const noexcept { return per_block_; }
    int n_blocks() const noexcept { return (n_dates() + per_block_ - 1) / per_block_; }
    int total_dim() const noexcept { return n_blocks() * dim(); }

    int block_of_date(int k) const {
        if (k < 1 || k > n_dates()) throw std::out_of_range("date index out of range");
        return (k - 1) / per_block_;
    }
    int first_date(int b) const { check_block(b); return b * per_block_ + 1; }
    int last_date(int b) const { check_block(b); return std::min(n_dates(), (b + 1) * per_block_); }
    double time(int k) const { return times_.at(static_cast<std::size_t>(k - 1)); }

    /// Block holding the exercise date at `time`, or nullopt when `time` is
    /// not an exercise date.
    std::optional<int> block_of_time(double time) const {
        const double tol = 1e-12 * std::max(1.0, std::abs(time));
        for (int k = 1; k <= n_dates(); ++k)
            if (std::abs(this->time(k) - time) <= tol) return block_of_date(k);
        return std::nullopt;
    }

    /// Identifies the regression layout. Coefficients are only reusable
    /// between runs with equal fingerprints.
    std::string fingerprint() const {
        char buf[128];
        std::snprintf(buf, sizeof buf, "%s;M=%d;D=%d;T=%.17g", to_string(kind_), n_dates(), per_block_,
                      times_.back());
        return buf;
    }

private:
    void check_block(int b) const {
        if (b < 0 || b >= n_blocks()) throw std::out_of_range("block index out of range");
    }

    std::vector<double> times_;
    int per_block_;
    BasisKind kind_;
};

/// Basis vector for `block`; rejects a time that is not one of the block's dates.
inline BasisVector basis_eval(const BasisSpec& spec, int block, double spot, double time) {
    const auto b = spec.block_of_time(time);
    if (!b || *b != block) throw std::invalid_argument("time does not belong to the requested block");
    return basis_values(spec.kind(), spot, time);
}

struct NormalBlock {
    BasisMatrix u;
    BasisVector v;
    double mass = 0.0;  // sum of weights that went in; zero means no information
};

/// Per-block U_b = sum w f f^T and V_b = sum w f y. Plain data: workers own
/// private copies and the coordinator merges them with +=.
class NormalEquations {
public:
    NormalEquations() = default;
    explicit NormalEquations(const BasisSpec& spec) : NormalEquations(spec.n_blocks(), spec.dim()) {}
    NormalEquations(int n_blocks, int dim) : blocks_(static_cast<std::size_t>(n_blocks)) {
        for (auto& b : blocks_) {
            b.u = BasisMatrix::Zero(dim, dim);
            b.v = BasisVector::Zero(dim);
        }
    }

    int n_blocks() const noexcept { return static_cast<int>(blocks_.size()); }
    const NormalBlock& block(int b) const { return blocks_.at(static_cast<std::size_t>(b)); }

    void accumulate(int b, double weight, const BasisVector& f, double target) {
        auto& blk = blocks_.at(static_cast<std::size_t>(b));
        if (f.size() != blk.v.size()) throw std::invalid_argument("basis vector dimension mismatch");
        if (!(weight >= 0.0)) throw std::invalid_argument("regression weight must be >= 0");
        if (weight == 0.0) return;
        // Lower triangle then mirror, so U stays exactly symmetric.
        for (Eigen::Index j = 0; j < f.size(); ++j)
            for (Eigen::Index i = j; i < f.size(); ++i) blk.u(i, j) += weight * (f(i) * f(j));
        blk.u.template triangularView<Eigen::StrictlyUpper>() = blk.u.transpose();
        blk.v.noalias() += (weight * target) * f;
        blk.mass += weight;
    }

    void scale(double factor) {
        for (auto& b : blocks_) {
            b.u *= factor;
            b.v *= factor;
            b.mass *= factor;
        }
    }

    NormalEquations& operator+=(const NormalEquations& other) {
        if (other.blocks_.size() != blocks_.size()) throw std::invalid_argument("block count mismatch");
        for (std::size_t i = 0; i < blocks_.size(); ++i) {
            if (other.blocks_[i].v.size() != blocks_[i].v.size())
                throw std::invalid_argument("block dimension mismatch");
            blocks_[i].u += other.blocks_[i].u;
            blocks_[i].v += other.blocks_[i].v;
            blocks_[i].mass += other.blocks_[i].mass;
        }
        return *this;
    }

    void set_zero() { scale(0.0); }

private:
    std::vector<NormalBlock> blocks_;
};

inline NormalEquations accumulate(NormalEquations ne, int block, double weight, const BasisVector& f,
                                  double discounted_payoff) {
    ne.accumulate(block, weight, f, discounted_payoff);
    return ne;
}

inline NormalEquations scale(NormalEquations ne, double factor) {
    ne.scale(factor);
    return ne;
}

/// Regression coefficients per block. A block without coefficients has seen
/// no data; a set with no coefficients at all is the bootstrap state.
struct CoefficientSet {
    std::string fingerprint;
    std::vector<std::optional<BasisVector>> alpha;

    static CoefficientSet bootstrap(const BasisSpec& spec) {
        return {spec.fingerprint(), std::vector<std::optional<BasisVector>>(static_cast<std::size_t>(spec.n_blocks()))};
    }

    bool is_bootstrap() const noexcept {
        return std::none_of(alpha.begin(), alpha.end(), [](const auto& a) { return a.has_value(); });
    }
    bool has(int b) const noexcept {
        return b >= 0 && b < static_cast<int>(alpha.size()) && alpha[static_cast<std::size_t>(b)].has_value();
    }
    const BasisVector& operator[](int b) const { return *alpha.at(static_cast<std::size_t>(b)); }
};

inline constexpr double kDefaultRidge = 1e-10;

/// Solves (U + ridge * diag(U)) alpha = V for one block. The system is
/// Jacobi-equilibrated and factored with LDL^T; any pivot below 1e-14 of the
/// largest counts as singular.
inline BasisVector solve_block(const NormalBlock& blk, int block_index, double ridge = kDefaultRidge) {
    const auto p = blk.u.rows();
    BasisMatrix a = blk.u;
    a.diagonal() *= 1.0 + ridge;

    BasisVector d(p);
    for (Eigen::Index i = 0; i < p; ++i) {
        if (!(a(i, i) > 0.0) || !std::isfinite(a(i, i))) throw DegenerateRegression(block_index);
        d(i) = 1.0 / std::sqrt(a(i, i));
    }
    const BasisMatrix scaled = d.asDiagonal() * a * d.asDiagonal();
    const BasisVector rhs = d.cwiseProduct(blk.v);

    Eigen::LDLT<BasisMatrix> ldlt(scaled);
    if (ldlt.info() != Eigen::Success) throw DegenerateRegression(block_index);
    const auto pivots = ldlt.vectorD();
    const double largest = pivots.cwiseAbs().maxCoeff();
    if (!(pivots.minCoeff() > 1e-14 * largest)) throw DegenerateRegression(block_index);

    BasisVector alpha = d.cwiseProduct(ldlt.solve(rhs));
    if (!alpha.allFinite()) throw DegenerateRegression(block_index);
    return alpha;
}

/// Blocks with no accumulated weight stay without coefficients.
inline CoefficientSet solve_coefficients(const NormalEquations& ne, const BasisSpec& spec,
                                         double ridge = kDefaultRidge) {
    if (ne.n_blocks() != spec.n_blocks()) throw std::invalid_argument("normal equations do not match basis");
    CoefficientSet out = CoefficientSet::bootstrap(spec);
    for (int b = 0; b < ne.n_blocks(); ++b) {
        const auto& blk = ne.block(b);
        if (blk.mass > 0.0) out.alpha[static_cast<std::size_t>(b)] = solve_block(blk, b, ridge);
    }
    return out;
}

/// alpha_b . f(S, t_k) for date k. Callers check `coeffs.has(block)` first.
inline double continuation_at_date(const CoefficientSet& coeffs, const BasisSpec& spec, int k, double spot) {
    const int b = spec.block_of_date(k);
    const double t = spec.time(k);
    const auto& a = coeffs[b];
    double c = a(0) + spot * (a(1) + spot * a(2));
    if (spec.kind() == BasisKind::time_quadratic) c += t * (a(3) + spot * (a(4) + spot * a(5)));
    return c;
}

inline double continuation_value(const CoefficientSet& coeffs, const BasisSpec& spec, double spot, double time) {
    const auto b = spec.block_of_time(time);
    if (!b) throw std::invalid_argument("time is not an exercise date");
    if (!coeffs.has(*b)) throw std::logic_error("no coefficients for this block; use the bootstrap exercise policy");
    return coeffs[*b].dot(basis_values(spec.kind(), spot, time));
}

// JSON: debug dump of the normal equations and the warm-start coefficient file.

inline nlohmann::json to_json(const NormalEquations& ne, const CoefficientSet* coeffs = nullptr) {
    auto out = nlohmann::json::array();
    for (int b = 0; b < ne.n_blocks(); ++b) {
        const auto& blk = ne.block(b);
        std::vector<double> u;
        for (Eigen::Index i = 0; i < blk.u.rows(); ++i)
            for (Eigen::Index j = 0; j < blk.u.cols(); ++j) u.push_back(blk.u(i, j));
        nlohmann::json entry = {{"block", b},
                                {"dim", blk.v.size()},
                                {"U", u},
                                {"V", std::vector<double>(blk.v.data(), blk.v.data() + blk.v.size())}};
        if (coeffs && coeffs->has(b)) {
            const auto& a = (*coeffs)[b];
            entry["alpha"] = std::vector<double>(a.data(), a.data() + a.size());
        }
        out.push_back(std::move(entry));
    }
    return out;
}

inline nlohmann::json to_json(const CoefficientSet& c) {
    auto blocks = nlohmann::json::array();
    for (const auto& a : c.alpha) {
        if (a)
            blocks.push_back(std::vector<double>(a->data(), a->data() + a->size()));
        else
            blocks.push_back(nullptr);
    }
    return {{"fingerprint", c.fingerprint}, {"blocks", blocks}};
}

/// Loads coefficients written by `to_json`; rejects a layout mismatch.
inline CoefficientSet coefficients_from_json(const nlohmann::json& j, const BasisSpec& spec) {
    const auto fp = j.at("fingerprint").get<std::string>();
    if (fp != spec.fingerprint())
        throw std::invalid_argument("coefficient fingerprint '" + fp + "' does not match '" + spec.fingerprint() + "'");
    const auto& blocks = j.at("blocks");
    if (static_cast<int>(blocks.size()) != spec.n_blocks())
        throw std::invalid_argument("coefficient block count mismatch");
    CoefficientSet c = CoefficientSet::bootstrap(spec);
    for (int b = 0; b < spec.n_blocks(); ++b) {
        const auto& e = blocks[static_cast<std::size_t>(b)];
        if (e.is_null()) continue;
        const auto v = e.get<std::vector<double>>();
        if (static_cast<int>(v.size()) != spec.dim()) throw std::invalid_argument("coefficient dimension mismatch");
        c.alpha[static_cast<std::size_t>(b)] = Eigen::Map<const Eigen::VectorXd>(v.data(), spec.dim());
    }
    return c;
}

}  // namespace amc
