#pragma once

#include "boostinf/boosting.hpp"

namespace boostinf {

enum class TestMode { direction, group };

// Direction mode tests H0: v'mu = null_value; group mode tests the
// projection onto span(W) (orthonormal columns) with null rho = 0.
struct TestSpec {
    TestMode mode = TestMode::direction;
    Vector v;
    Matrix w;
    double null_value = 0.0;
    double sigma2 = 1.0;

    int dim() const { return mode == TestMode::direction ? 1 : static_cast<int>(w.cols()); }
    // variance scale of the test statistic: sigma2 v'v or sigma2
    double scale2() const;
};

// v = X_A (X_A' X_A)^{-1} e_j ; v'y is the OLS coefficient of column j.
Vector test_vector_linear(const Matrix& x_a, Index j);

// Residualize the group block on the remaining columns, orthonormalize,
// drop directions with singular value < 1e-8 * max.
Matrix test_matrix_group(const Matrix& x_rest, const Matrix& x_group);

// Point-wise smooth test: v = X_A (X_A'X_A)^{-1} B0' with B0 the design row
// of the spline block at c, zero elsewhere; v'mu is the fitted g(c).
Vector smooth_pointwise_vector(const Matrix& x_a, Index block_offset,
                               const RowVector& basis_row);

// Whole-function test basis of a spline block within the selected design.
Matrix smooth_function_test_basis(const Matrix& x_rest, const Matrix& block);

// The one-dimensional family y(r) along which congruency is rechecked.
struct ProbeLine {
    Vector anchor;
    Vector direction; // y(r) = anchor + r * direction
    double r_obs = 0.0;

    Vector at(double r) const { return anchor + r * direction; }
};

ProbeLine decompose(const Vector& y, const TestSpec& spec);

} // namespace boostinf
