#pragma once

#include "boostinf/boosting.hpp"

#include <limits>
#include <optional>

namespace boostinf {

// Selection path plus sign list for an all-linear, unpenalized fit; the
// only configuration whose selection event is a single polyhedron.
struct PathCertificate {
    std::vector<int> path;   // 0-based column indices into x
    std::vector<int> signs;  // +-1 per step
    double step_length = 0.1;
    Matrix x;                // n x p, one column per learner

    int mstop() const { return static_cast<int>(path.size()); }
};

PathCertificate make_certificate(const BoostFit& fit, const std::vector<BaseLearner>& learners,
                                 double step_length);

// Upsilon^(1) = I, Upsilon^(m) = (I - nu H_{j^(m-1)}) Upsilon^(m-1).
Matrix upsilon(const PathCertificate& cert, int m);

struct Polyhedron {
    PathCertificate cert;
    std::optional<Matrix> gamma; // materialized only under the size threshold
    Index rows() const {
        return 2 * (cert.x.cols() - 1) * static_cast<Index>(cert.path.size());
    }
};

// Gamma rows ordered steps-outer, competitors-inner ascending, "+" before
// "-"; offset b is identically zero. Materializes only when
// rows * n <= materialize_threshold.
Polyhedron build_gamma(const PathCertificate& cert,
                       std::size_t materialize_threshold = 10'000'000);

// min_i (Gamma y)_i; streams rows when gamma is not materialized.
double min_slack(const Polyhedron& poly, const Vector& y);
inline bool contains(const Polyhedron& poly, const Vector& y, double slack = 1e-8) {
    return min_slack(poly, y) >= -slack;
}

struct TruncationInterval {
    double lo = -std::numeric_limits<double>::infinity();
    double up = std::numeric_limits<double>::infinity();
};

// Truncation of v'y along the line y(r) = z + c r, c = v / (v'v); the
// limits do not depend on sigma2 under an isotropic error covariance.
TruncationInterval truncation_limits(const Polyhedron& poly, const Vector& v,
                                     double sigma2, const Vector& y);

// CDF of N(mu, sigma2) truncated to [lo, up], evaluated in log space so the
// far tails stay meaningful.
double trunc_gauss_cdf(double x, double mu, double sigma2, double lo, double up);

enum class Alternative { two_sided, greater, less };

double polyhedron_pvalue(const Polyhedron& poly, const Vector& v, double sigma2,
                         const Vector& y, double null_value,
                         Alternative alternative = Alternative::two_sided);

// Two-sided interval by inverting the truncated-normal mean; sides that
// never cross their target within a 64 sigma expansion come back infinite.
std::pair<double, double> polyhedron_ci(const Polyhedron& poly, const Vector& v,
                                        double sigma2, const Vector& y, double alpha);

} // namespace boostinf
