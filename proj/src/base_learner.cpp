#include "boostinf/base_learner.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace boostinf {

std::vector<double> pspline_knots(double lo, double hi, const SplineConfig& cfg) {
    if (!(hi > lo))
        throw std::invalid_argument("degenerate covariate: constant over the sample");
    if (cfg.degree < 0 || cfg.num_interior_knots < 1)
        throw std::invalid_argument("spline config: degree >= 0 and at least one interior knot required");
    if (cfg.basis_dim() <= cfg.diff_order)
        throw std::invalid_argument("spline config: basis dimension must exceed diff_order");

    const int k = cfg.num_interior_knots;
    std::vector<double> knots;
    knots.reserve(static_cast<std::size_t>(k) + 2 * (cfg.degree + 1));
    for (int i = 0; i < cfg.degree + 1; ++i) knots.push_back(lo);
    const double h = (hi - lo) / (k + 1);
    for (int i = 1; i <= k; ++i) knots.push_back(lo + h * i);
    for (int i = 0; i < cfg.degree + 1; ++i) knots.push_back(hi);
    return knots;
}

Matrix pspline_basis_at(const std::vector<double>& knots, int degree, const Vector& c) {
    const int num_basis = static_cast<int>(knots.size()) - degree - 1;
    const double lo = knots.front();
    const double hi = knots.back();
    Matrix basis = Matrix::Zero(c.size(), num_basis);

    // index of the last span with positive length, for x at/above hi
    int last_span = num_basis - 1;
    while (last_span > 0 && knots[last_span] >= knots[last_span + 1]) --last_span;

    std::vector<double> vals(static_cast<std::size_t>(degree) + 1);
    std::vector<double> left(static_cast<std::size_t>(degree) + 1);
    std::vector<double> right(static_cast<std::size_t>(degree) + 1);

    for (Index r = 0; r < c.size(); ++r) {
        const double x = c(r);
        if (x < lo || x > hi)
            throw std::invalid_argument("covariate value outside basis support");
        int span;
        if (x >= hi) {
            span = last_span;
        } else {
            // knots[span] <= x < knots[span+1], degree <= span < num_basis
            span = static_cast<int>(std::upper_bound(knots.begin() + degree,
                                                     knots.begin() + num_basis + 1, x) -
                                    knots.begin()) - 1;
        }
        // de Boor: values of the degree+1 B-splines that are nonzero on span
        vals[0] = 1.0;
        for (int j = 1; j <= degree; ++j) {
            left[j] = x - knots[span + 1 - j];
            right[j] = knots[span + j] - x;
            double saved = 0.0;
            for (int i = 0; i < j; ++i) {
                const double tmp = vals[i] / (right[i + 1] + left[j - i]);
                vals[i] = saved + right[i + 1] * tmp;
                saved = left[j - i] * tmp;
            }
            vals[j] = saved;
        }
        for (int i = 0; i <= degree; ++i)
            basis(r, span - degree + i) = vals[i];
    }
    return basis;
}

Matrix build_pspline_basis(const Vector& c, const SplineConfig& cfg) {
    if (!c.allFinite())
        throw std::invalid_argument("covariate contains non-finite values");
    const double lo = c.minCoeff();
    const double hi = c.maxCoeff();
    const auto knots = pspline_knots(lo, hi, cfg);
    return pspline_basis_at(knots, cfg.degree, c);
}

Matrix build_difference_penalty(int basis_dim, int diff_order) {
    if (diff_order < 1 || basis_dim <= diff_order)
        throw std::invalid_argument("difference penalty requires basis_dim > diff_order >= 1");
    Matrix delta = Matrix::Identity(basis_dim, basis_dim);
    for (int d = 0; d < diff_order; ++d) {
        const Index rows = delta.rows() - 1;
        Matrix next(rows, basis_dim);
        for (Index i = 0; i < rows; ++i)
            next.row(i) = delta.row(i + 1) - delta.row(i);
        delta = std::move(next);
    }
    return delta.transpose() * delta;
}

RowVector SplineBlock::design_row(double c) const {
    Vector point(1);
    point(0) = c;
    const Matrix raw = pspline_basis_at(knots, cfg.degree, point);
    return raw.row(0) * transform - col_means;
}

BaseLearner::BaseLearner(int id, Matrix design, Matrix penalty, double lambda, LearnerKind kind)
    : id_(id), x_(std::move(design)), d_(std::move(penalty)), lambda_(lambda), kind_(kind) {
    const std::string ctx = "learner " + std::to_string(id_);
    if (x_.cols() < 1) throw std::invalid_argument(ctx + ": empty design");
    if (!x_.allFinite() || !d_.allFinite())
        throw std::invalid_argument(ctx + ": non-finite entries");
    if (lambda_ < 0.0) throw std::invalid_argument(ctx + ": negative smoothing parameter");
    if (d_.rows() != x_.cols() || d_.cols() != x_.cols())
        throw std::invalid_argument(ctx + ": penalty dimension mismatch");
    if (kind_ == LearnerKind::linear && (x_.cols() != 1 || d_.norm() != 0.0))
        throw std::invalid_argument(ctx + ": linear learner must have one column and zero penalty");
    if ((d_ - d_.transpose()).cwiseAbs().maxCoeff() > 1e-10 * std::max(1.0, d_.cwiseAbs().maxCoeff()))
        throw std::invalid_argument(ctx + ": penalty not symmetric");
    if (d_.norm() > 0.0) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(d_, Eigen::EigenvaluesOnly);
        if (eig.eigenvalues().minCoeff() < -1e-10 * eig.eigenvalues().cwiseAbs().maxCoeff())
            throw std::invalid_argument(ctx + ": penalty not positive semi-definite");
    }

    simple_ = (x_.cols() == 1 && lambda_ == 0.0);
    if (simple_) {
        col_norm2_ = x_.col(0).squaredNorm();
        if (!(col_norm2_ > 0.0))
            throw std::runtime_error("singular normal matrix (" + ctx + ")");
    } else {
        const Matrix normal = x_.transpose() * x_ + lambda_ * d_;
        solver_ = SpdSolver(normal, 1e-10, ctx);
    }
}

Vector BaseLearner::fit_coef(const Vector& u) const {
    if (simple_) {
        Vector coef(1);
        coef(0) = x_.col(0).dot(u) / col_norm2_;
        return coef;
    }
    return solver_.solve(x_.transpose() * u);
}

Vector BaseLearner::fit_values(const Vector& u) const {
    return x_ * fit_coef(u);
}

double BaseLearner::sse_residual(const Vector& u, double u_norm2) const {
    if (simple_) {
        const double t = x_.col(0).dot(u);
        return u_norm2 - t * t / col_norm2_;
    }
    return (u - fit_values(u)).squaredNorm();
}

double BaseLearner::trace_hat() const {
    if (simple_) return 1.0;
    return solver_.solve(Matrix(x_.transpose() * x_)).trace();
}

BaseLearner BaseLearner::subset_rows(const std::vector<Index>& rows) const {
    Matrix sub(static_cast<Index>(rows.size()), x_.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        sub.row(static_cast<Index>(i)) = x_.row(rows[i]);
    BaseLearner out(id_, std::move(sub), d_, lambda_, kind_);
    out.spline_ = spline_;
    return out;
}

Matrix hat_matrix(const BaseLearner& bl) {
    if (bl.simple())
        return bl.design().col(0) * (bl.design().col(0).transpose() / bl.column_norm2());
    const Matrix& x = bl.design();
    const Matrix normal = x.transpose() * x + bl.lambda() * bl.penalty();
    SpdSolver solver(normal, 1e-10, "learner " + std::to_string(bl.id()));
    return x * solver.solve(Matrix(x.transpose()));
}

FitResult fit_learner(const BaseLearner& bl, const Vector& u) {
    FitResult r;
    r.coef = bl.fit_coef(u);
    r.fitted = bl.design() * r.coef;
    r.sse = (u - r.fitted).squaredNorm();
    return r;
}

double lambda_for_df(const Matrix& design, const Matrix& penalty, double df) {
    if (df >= static_cast<double>(design.cols())) return 0.0;
    const Matrix xtx = design.transpose() * design;
    // NaN marks an unfactorable (too lightly penalized) normal matrix; the
    // search treats it like a trace above the target
    auto trace_at = [&](double lambda) -> double {
        Eigen::LDLT<Matrix> ldlt(xtx + lambda * penalty);
        if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().minCoeff() > 0.0))
            return std::numeric_limits<double>::quiet_NaN();
        return ldlt.solve(xtx).trace();
    };
    double lo = -12.0, hi = 14.0; // log10 lambda
    const double trace_hi = trace_at(std::pow(10.0, hi));
    if (!std::isnan(trace_hi) && trace_hi > df)
        throw std::runtime_error("target df unreachable: penalty null space too large");
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double t = trace_at(std::pow(10.0, mid));
        if (std::isnan(t) || t > df)
            lo = mid;
        else
            hi = mid;
    }
    return std::pow(10.0, 0.5 * (lo + hi));
}

namespace {

// orthonormal basis of the complement of the all-ones coefficient direction
Matrix ones_complement(int m) {
    Vector ones = Vector::Ones(m);
    Eigen::HouseholderQR<Matrix> qr(ones);
    Matrix q = qr.householderQ();
    return q.rightCols(m - 1);
}

} // namespace

BaseLearner make_spline_learner(int id, const Vector& c, const SplineConfig& cfg,
                                const Smoothing& smoothing, bool deviation) {
    const double lo = c.minCoeff();
    const double hi = c.maxCoeff();
    const auto knots = pspline_knots(lo, hi, cfg);
    const Matrix basis = pspline_basis_at(knots, cfg.degree, c);
    const Matrix penalty_raw = build_difference_penalty(cfg.basis_dim(), cfg.diff_order);

    Matrix transform;
    Matrix penalty;
    if (deviation) {
        // keep only penalized directions; the dropped polynomial part is
        // carried by the paired linear learner
        Eigen::SelfAdjointEigenSolver<Matrix> eig(penalty_raw);
        const Vector& ev = eig.eigenvalues();
        const double emax = ev.maxCoeff();
        std::vector<Index> keep;
        for (Index i = 0; i < ev.size(); ++i)
            if (ev(i) > 1e-10 * emax) keep.push_back(i);
        transform.resize(cfg.basis_dim(), static_cast<Index>(keep.size()));
        for (std::size_t i = 0; i < keep.size(); ++i)
            transform.col(static_cast<Index>(i)) =
                eig.eigenvectors().col(keep[i]) / std::sqrt(ev(keep[i]));
        penalty = Matrix::Identity(transform.cols(), transform.cols());
    } else {
        transform = ones_complement(cfg.basis_dim());
        penalty = transform.transpose() * penalty_raw * transform;
    }

    Matrix design = basis * transform;
    RowVector col_means = design.colwise().mean();
    design.rowwise() -= col_means;

    double lambda = smoothing.value;
    if (smoothing.kind == Smoothing::Kind::df)
        lambda = lambda_for_df(design, penalty, smoothing.value);

    BaseLearner learner(id, std::move(design), std::move(penalty), lambda, LearnerKind::spline);
    learner.set_spline_block(SplineBlock{cfg, knots, transform, col_means, deviation});
    return learner;
}

BaseLearner make_linear_learner(int id, const Vector& column) {
    Matrix x(column.size(), 1);
    x.col(0) = column;
    return BaseLearner(id, std::move(x), Matrix::Zero(1, 1), 0.0, LearnerKind::linear);
}

BaseLearner make_group_learner(int id, Matrix columns) {
    const Index p = columns.cols();
    return BaseLearner(id, std::move(columns), Matrix::Zero(p, p), 0.0, LearnerKind::group);
}

} // namespace boostinf
