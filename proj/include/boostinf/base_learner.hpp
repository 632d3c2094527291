#pragma once

#include "boostinf/linalg.hpp"

#include <optional>
#include <string>
#include <vector>

namespace boostinf {

enum class LearnerKind { linear, group, spline };

struct SplineConfig {
    int degree = 3;
    int num_interior_knots = 5;
    int diff_order = 2;

    // basis dimension before any reparameterization
    int basis_dim() const { return num_interior_knots + degree + 1; }
};

// Knot sequence over [lo, hi]: interior knots equidistant, boundary knots
// replicated `degree` extra times on each side (clamped basis).
std::vector<double> pspline_knots(double lo, double hi, const SplineConfig& cfg);

// Row i holds the M basis functions evaluated at c(i); rows sum to one.
Matrix build_pspline_basis(const Vector& c, const SplineConfig& cfg);
Matrix pspline_basis_at(const std::vector<double>& knots, int degree, const Vector& c);

// D = Delta' Delta for the diff_order-th order difference operator.
Matrix build_difference_penalty(int basis_dim, int diff_order);

// Everything needed to evaluate a spline learner's design row at a new
// covariate value: knots, the coefficient-space transform applied at
// construction, and the column means removed by centering.
struct SplineBlock {
    SplineConfig cfg;
    std::vector<double> knots;
    Matrix transform;     // basis_dim x p
    RowVector col_means;  // 1 x p
    bool deviation = false;

    RowVector design_row(double c) const;
};

class BaseLearner {
public:
    BaseLearner(int id, Matrix design, Matrix penalty, double lambda, LearnerKind kind);

    int id() const { return id_; }
    LearnerKind kind() const { return kind_; }
    const Matrix& design() const { return x_; }
    const Matrix& penalty() const { return d_; }
    double lambda() const { return lambda_; }
    Index n() const { return x_.rows(); }
    Index cols() const { return x_.cols(); }

    // single unpenalized column: hat matrix is a rank-one projector
    bool simple() const { return simple_; }
    double column_norm2() const { return col_norm2_; }

    Vector fit_coef(const Vector& u) const;
    Vector fit_values(const Vector& u) const;
    // ||u - H u||^2 given ||u||^2 (callers track it across learners)
    double sse_residual(const Vector& u, double u_norm2) const;
    double trace_hat() const;

    BaseLearner subset_rows(const std::vector<Index>& rows) const;

    const std::optional<SplineBlock>& spline_block() const { return spline_; }
    void set_spline_block(SplineBlock block) { spline_ = std::move(block); }

private:
    int id_;
    Matrix x_;
    Matrix d_;
    double lambda_;
    LearnerKind kind_;
    SpdSolver solver_;
    double col_norm2_ = 0.0;
    bool simple_ = false;
    std::optional<SplineBlock> spline_;
};

// Spec operation names, kept as free functions over the class.
Matrix hat_matrix(const BaseLearner& bl);

struct FitResult {
    Vector coef;
    Vector fitted;
    double sse;
};
FitResult fit_learner(const BaseLearner& bl, const Vector& u);

// Smoothing parameter with trace(H(lambda)) == df, found by bisection.
double lambda_for_df(const Matrix& design, const Matrix& penalty, double df);

// Either a fixed lambda or a target for effective degrees of freedom.
struct Smoothing {
    enum class Kind { lambda, df } kind = Kind::lambda;
    double value = 0.0;
    static Smoothing fixed(double lambda) { return {Kind::lambda, lambda}; }
    static Smoothing for_df(double df) { return {Kind::df, df}; }
};

// Builds a spline learner on covariate c. The raw basis is reparameterized:
// standard learners drop the constant coefficient direction (so centered
// design columns stay compatible with the difference penalty), deviation
// learners keep only the penalized part (spectral split, ridge penalty).
// Columns are mean-centered; the removed pieces live in the SplineBlock.
BaseLearner make_spline_learner(int id, const Vector& c, const SplineConfig& cfg,
                                const Smoothing& smoothing, bool deviation = false);

BaseLearner make_linear_learner(int id, const Vector& column);
BaseLearner make_group_learner(int id, Matrix columns);

} // namespace boostinf
