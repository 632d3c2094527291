#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "boostinf/base_learner.hpp"
#include "boostinf/rng.hpp"
#include "oracles.hpp"

#include <Eigen/Eigenvalues>

using namespace boostinf;

namespace {

Matrix random_matrix(Index n, Index p, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < n; ++i) x(i, j) = rng.normal();
    return x;
}

Vector random_vector(Index n, std::uint64_t seed) {
    Rng rng(seed);
    Vector v(n);
    for (Index i = 0; i < n; ++i) v(i) = rng.normal();
    return v;
}

} // namespace

TEST_CASE("pspline basis: dimensions and partition of unity") {
    SplineConfig cfg{3, 5, 2};
    const Vector c = random_vector(40, 11).array() * 2.0;
    const Matrix basis = build_pspline_basis(c, cfg);
    CHECK(basis.cols() == 9);
    CHECK(basis.rows() == 40);
    for (Index i = 0; i < basis.rows(); ++i) {
        CHECK(basis.row(i).sum() == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(basis.row(i).minCoeff() >= 0.0);
        CHECK(basis.row(i).maxCoeff() <= 1.0);
    }
}

TEST_CASE("pspline basis: degree zero is an indicator") {
    SplineConfig cfg{0, 1, 0};
    cfg.degree = 0;
    cfg.num_interior_knots = 1;
    cfg.diff_order = 1; // basis_dim 2 > 1
    Vector c(3);
    c << 0.0, 0.2, 1.0; // left boundary, left cell, right boundary
    const Matrix basis = build_pspline_basis(c, cfg);
    CHECK(basis.cols() == 2);
    CHECK(basis(0, 0) == 1.0);
    CHECK(basis(0, 1) == 0.0);
    CHECK(basis(1, 0) == 1.0);
    CHECK(basis(2, 1) == 1.0);
}

TEST_CASE("pspline basis agrees with the Cox-de Boor recursion oracle") {
    SplineConfig cfg{3, 5, 2};
    Vector c(300);
    for (Index i = 0; i < 300; ++i) c(i) = -3.0 + 6.0 * static_cast<double>(i) / 299.0;
    const Matrix basis = build_pspline_basis(c, cfg);
    const auto knots = pspline_knots(c.minCoeff(), c.maxCoeff(), cfg);
    const Matrix expect = oracle::bspline_basis_recursive(knots, cfg.degree, c);
    CHECK((basis - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("pspline basis: constant covariate rejected") {
    SplineConfig cfg{3, 5, 2};
    const Vector c = Vector::Constant(10, 1.5);
    CHECK_THROWS_WITH_AS(build_pspline_basis(c, cfg),
                         doctest::Contains("degenerate covariate"), std::invalid_argument);
}

TEST_CASE("difference penalty: order one by hand") {
    const Matrix d = build_difference_penalty(3, 1);
    Matrix expect(3, 3);
    expect << 1, -1, 0, -1, 2, -1, 0, -1, 1;
    CHECK((d - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("difference penalty: annihilates low-order polynomials, rank M - d") {
    for (int order = 1; order <= 3; ++order) {
        const int m = 9;
        const Matrix d = build_difference_penalty(m, order);
        CHECK((d - d.transpose()).cwiseAbs().maxCoeff() == 0.0);
        for (int deg = 0; deg < order; ++deg) {
            Vector poly(m);
            for (int i = 0; i < m; ++i) poly(i) = std::pow(static_cast<double>(i + 1), deg);
            CHECK((d * poly).cwiseAbs().maxCoeff() < 1e-9);
        }
        Eigen::FullPivLU<Matrix> lu(d);
        lu.setThreshold(1e-10);
        CHECK(lu.rank() == m - order);
    }
    CHECK_THROWS_AS(build_difference_penalty(2, 2), std::invalid_argument);
}

TEST_CASE("hat matrix: coordinate projector") {
    Matrix x = Matrix::Zero(3, 1);
    x(0, 0) = 1.0;
    const BaseLearner bl(0, x, Matrix::Zero(1, 1), 0.0, LearnerKind::linear);
    const Matrix h = hat_matrix(bl);
    Matrix expect = Matrix::Zero(3, 3);
    expect(0, 0) = 1.0;
    CHECK((h - expect).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("hat matrix: ridge shrinkage is monotone in lambda") {
    const Matrix x = random_matrix(12, 3, 21);
    const Matrix d = Matrix::Identity(3, 3);
    const double n0 = hat_matrix(BaseLearner(0, x, d, 1.0, LearnerKind::spline)).norm();
    const double n1 = hat_matrix(BaseLearner(0, x, d, 100.0, LearnerKind::spline)).norm();
    CHECK(n0 > n1);
    CHECK(n1 > 0.0);
}

TEST_CASE("hat matrix: projector reproduces its column space, symmetric, eigenvalues in [0,1]") {
    const Matrix x = random_matrix(10, 3, 33);
    const BaseLearner bl(1, x, Matrix::Zero(3, 3), 0.0, LearnerKind::group);
    const Matrix h = hat_matrix(bl);
    CHECK((h * x - x).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((h * h - h).cwiseAbs().maxCoeff() < 1e-10); // idempotent at lambda = 0
    Eigen::SelfAdjointEigenSolver<Matrix> eig(h, Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() > -1e-10);
    CHECK(eig.eigenvalues().maxCoeff() < 1.0 + 1e-10);
}

TEST_CASE("fit_learner: exact fit, orthogonal residual, hand-solved slope") {
    SUBCASE("u in the column space") {
        const Matrix x = random_matrix(8, 2, 5);
        const BaseLearner bl(0, x, Matrix::Zero(2, 2), 0.0, LearnerKind::group);
        Vector w(2);
        w << 1.5, -0.5;
        const auto fit = fit_learner(bl, x * w);
        CHECK(fit.sse < 1e-18);
        CHECK((fit.coef - w).cwiseAbs().maxCoeff() < 1e-10);
    }
    SUBCASE("u orthogonal to the columns") {
        Matrix x = Matrix::Zero(4, 1);
        x(0, 0) = 1.0;
        const BaseLearner bl(0, x, Matrix::Zero(1, 1), 0.0, LearnerKind::linear);
        Vector u(4);
        u << 0.0, 1.0, -2.0, 0.5;
        const auto fit = fit_learner(bl, u);
        CHECK(fit.coef(0) == 0.0);
        CHECK(fit.fitted.cwiseAbs().maxCoeff() == 0.0);
        CHECK(fit.sse == doctest::Approx(u.squaredNorm()));
    }
    SUBCASE("slope two, zero residual") {
        Matrix x(5, 1);
        x << 1, 2, 3, 4, 5;
        Vector u(5);
        u << 2, 4, 6, 8, 10;
        const BaseLearner bl(0, x, Matrix::Zero(1, 1), 0.0, LearnerKind::linear);
        const auto fit = fit_learner(bl, u);
        CHECK(fit.coef(0) == doctest::Approx(2.0).epsilon(1e-14));
        CHECK(fit.sse < 1e-20);
    }
}

TEST_CASE("fit_learner and hat_matrix agree on random inputs") {
    const Vector c = random_vector(30, 7);
    const auto bl = make_spline_learner(2, c, SplineConfig{3, 5, 2}, Smoothing::fixed(2.5));
    const Matrix h = hat_matrix(bl);
    CHECK((h - h.transpose()).cwiseAbs().maxCoeff() < 1e-12);
    for (std::uint64_t s = 0; s < 4; ++s) {
        const Vector u = random_vector(30, 100 + s);
        const auto fit = fit_learner(bl, u);
        CHECK((fit.fitted - h * u).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("unpenalized fit is least squares optimal (spot check)") {
    const Matrix x = random_matrix(15, 3, 9);
    const BaseLearner bl(0, x, Matrix::Zero(3, 3), 0.0, LearnerKind::group);
    const Vector u = random_vector(15, 10);
    const auto fit = fit_learner(bl, u);
    Rng rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        Vector other = fit.coef;
        for (Index i = 0; i < other.size(); ++i) other(i) += 0.1 * rng.normal();
        CHECK(fit.sse <= (u - x * other).squaredNorm() + 1e-12);
    }
}

TEST_CASE("construction rejects invalid learners") {
    const Matrix x = random_matrix(6, 2, 3);
    CHECK_THROWS_AS(BaseLearner(0, x, Matrix::Identity(2, 2), -1.0, LearnerKind::group),
                    std::invalid_argument);
    // rank-deficient unpenalized design
    Matrix dup(6, 2);
    dup.col(0) = x.col(0);
    dup.col(1) = x.col(0);
    CHECK_THROWS_WITH_AS(BaseLearner(0, dup, Matrix::Zero(2, 2), 0.0, LearnerKind::group),
                         doctest::Contains("singular normal matrix"), std::runtime_error);
    // asymmetric penalty
    Matrix bad = Matrix::Zero(2, 2);
    bad(0, 1) = 1.0;
    CHECK_THROWS_AS(BaseLearner(0, x, bad, 1.0, LearnerKind::group), std::invalid_argument);
}

TEST_CASE("lambda_for_df hits the requested trace") {
    const Vector c = random_vector(60, 13);
    const Matrix basis = build_pspline_basis(c, SplineConfig{3, 5, 2});
    const Matrix penalty = build_difference_penalty(9, 2);
    const double lambda = lambda_for_df(basis, penalty, 4.0);
    SpdSolver solver(Matrix(basis.transpose() * basis + lambda * penalty));
    const double trace = solver.solve(Matrix(basis.transpose() * basis)).trace();
    CHECK(trace == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("spline learner: centered columns, invertible normal matrix, row evaluator") {
    const Vector c = random_vector(50, 17);
    const auto bl = make_spline_learner(3, c, SplineConfig{3, 5, 2}, Smoothing::for_df(4.0));
    CHECK(bl.cols() == 8); // constant direction dropped
    CHECK(bl.design().colwise().mean().cwiseAbs().maxCoeff() < 1e-12);
    REQUIRE(bl.spline_block().has_value());
    // design_row reproduces the rows of the stored design
    for (Index i : {Index(0), Index(7), Index(49)}) {
        const RowVector row = bl.spline_block()->design_row(c(i));
        CHECK((row - bl.design().row(i)).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("deviation spline learner: ridge penalty, no polynomial directions") {
    const Vector c = random_vector(50, 19);
    const auto bl =
        make_spline_learner(4, c, SplineConfig{3, 5, 2}, Smoothing::for_df(3.0), true);
    CHECK(bl.cols() == 7); // two null directions of the second-order penalty removed
    CHECK((bl.penalty() - Matrix::Identity(7, 7)).cwiseAbs().maxCoeff() < 1e-12);
    // fitted values cannot reproduce a straight line exactly
    const Vector line = c;
    const auto fit = fit_learner(bl, centered(line));
    CHECK(fit.sse > 1e-6);
}
