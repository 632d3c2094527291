#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace boostinf {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using RowVector = Eigen::RowVectorXd;
using Index = Eigen::Index;

// Symmetric positive (semi-)definite solver used for all normal-equation
// systems. Factorization failure throws instead of regularizing: inference
// must see the same deterministic fit the user ran.
class SpdSolver {
public:
    SpdSolver() = default;

    explicit SpdSolver(const Matrix& a, double rel_pivot_tol = 1e-10,
                       const std::string& context = "") {
        if (a.rows() != a.cols())
            throw std::invalid_argument("SpdSolver: matrix not square");
        ldlt_.compute(a);
        const Vector d = ldlt_.vectorD();
        const double dmax = d.maxCoeff();
        if (!(dmax > 0.0) || d.minCoeff() < rel_pivot_tol * dmax || ldlt_.info() != Eigen::Success)
            throw std::runtime_error("singular normal matrix" +
                                     (context.empty() ? "" : " (" + context + ")"));
        dim_ = a.rows();
    }

    template <typename Derived>
    typename Derived::PlainObject solve(const Eigen::MatrixBase<Derived>& b) const {
        return ldlt_.solve(b);
    }
    Index dim() const { return dim_; }

private:
    Eigen::LDLT<Matrix> ldlt_;
    Index dim_ = 0;
};

inline double mean_of(const Vector& x) { return x.size() ? x.mean() : 0.0; }

inline Vector centered(const Vector& x) {
    return x.array() - x.mean();
}

inline Matrix center_columns(const Matrix& x) {
    return x.rowwise() - x.colwise().mean();
}

// Orthonormal basis of span(m), dropping directions with singular value
// below rel_tol * s_max. Returns an n x r matrix with orthonormal columns;
// r may be zero.
inline Matrix orthonormal_basis(const Matrix& m, double rel_tol = 1e-8) {
    if (m.cols() == 0) return Matrix(m.rows(), 0);
    Eigen::JacobiSVD<Matrix> svd(m, Eigen::ComputeThinU);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() ? sv(0) : 0.0;
    Index r = 0;
    while (r < sv.size() && sv(r) > rel_tol * smax && smax > 0.0) ++r;
    return svd.matrixU().leftCols(r);
}

// Residualize cols against span(basis); basis must have orthonormal columns.
inline Matrix project_out(const Matrix& basis, const Matrix& cols) {
    if (basis.cols() == 0) return cols;
    return cols - basis * (basis.transpose() * cols);
}

} // namespace boostinf
