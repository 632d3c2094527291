#include "boostinf/polyhedron.hpp"

#include "boostinf/normal.hpp"

#include <cmath>
#include <stdexcept>

namespace boostinf {

namespace {

void check_general_position(const Matrix& x) {
    for (Index a = 0; a < x.cols(); ++a)
        for (Index b = a + 1; b < x.cols(); ++b) {
            const double cosine = std::abs(x.col(a).dot(x.col(b))) /
                                  (x.col(a).norm() * x.col(b).norm());
            if (cosine > 1.0 - 1e-12)
                throw std::runtime_error("columns not in general position (proportional pair)");
        }
}

// Visits every Gamma row as row(v) = q' applied to the step-m residual map;
// emit(dot_with) receives a functor evaluating the row against any vector
// whose step-m image is supplied. Concretely we propagate the residual
// images of the needed vectors and hand out per-step contraction closures.
template <typename StepFn>
void for_each_step(const PathCertificate& cert, StepFn&& fn) {
    // fn(m, j_m, s_m) called for m = 0..mstop-1; caller advances its own
    // residual images afterwards.
    for (int m = 0; m < cert.mstop(); ++m)
        fn(m, cert.path[static_cast<std::size_t>(m)], cert.signs[static_cast<std::size_t>(m)]);
}

} // namespace

PathCertificate make_certificate(const BoostFit& fit, const std::vector<BaseLearner>& learners,
                                 double step_length) {
    PathCertificate cert;
    cert.step_length = step_length;
    cert.x.resize(learners.empty() ? 0 : learners.front().n(),
                  static_cast<Index>(learners.size()));
    for (std::size_t j = 0; j < learners.size(); ++j) {
        if (!learners[j].simple())
            throw std::invalid_argument(
                "path certificate requires single-column unpenalized learners");
        cert.x.col(static_cast<Index>(j)) = learners[j].design().col(0);
    }
    // map learner ids to column positions
    for (std::size_t m = 0; m < fit.path.size(); ++m) {
        Index col = -1;
        for (std::size_t j = 0; j < learners.size(); ++j)
            if (learners[j].id() == fit.path[m]) { col = static_cast<Index>(j); break; }
        if (col < 0) throw std::invalid_argument("path references unknown learner");
        cert.path.push_back(static_cast<int>(col));
        cert.signs.push_back(fit.signs[m]);
        if (fit.signs[m] == 0)
            throw std::invalid_argument("path certificate requires recorded signs");
    }
    return cert;
}

Matrix upsilon(const PathCertificate& cert, int m) {
    if (m < 1 || m > cert.mstop() + 1)
        throw std::invalid_argument("upsilon: need 1 <= m <= mstop + 1");
    const Index n = cert.x.rows();
    Matrix up = Matrix::Identity(n, n);
    for (int step = 1; step < m; ++step) {
        const Index j = cert.path[static_cast<std::size_t>(step - 1)];
        const Vector col = cert.x.col(j);
        const double inv_norm2 = 1.0 / col.squaredNorm();
        // (I - nu H_j) U, H_j rank one
        up.noalias() -= (cert.step_length * inv_norm2) * col * (col.transpose() * up);
    }
    return up;
}

Polyhedron build_gamma(const PathCertificate& cert, std::size_t materialize_threshold) {
    if (cert.x.cols() < 2)
        throw std::invalid_argument("build_gamma: need at least two learners");
    check_general_position(cert.x);

    Polyhedron poly;
    poly.cert = cert;
    const Index n = cert.x.rows();
    const Index p = cert.x.cols();
    const Index rows = poly.rows();
    if (static_cast<std::size_t>(rows) * static_cast<std::size_t>(n) > materialize_threshold)
        return poly; // row-streaming only

    Matrix gamma(rows, n);
    Matrix up = Matrix::Identity(n, n); // Upsilon^(m), advanced per step
    Index r = 0;
    for (int m = 0; m < cert.mstop(); ++m) {
        const Index jm = cert.path[static_cast<std::size_t>(m)];
        const double sm = cert.signs[static_cast<std::size_t>(m)];
        const RowVector lead = sm * cert.x.col(jm).transpose() / cert.x.col(jm).norm();
        for (Index j = 0; j < p; ++j) {
            if (j == jm) continue;
            const RowVector comp = cert.x.col(j).transpose() / cert.x.col(j).norm();
            gamma.row(r++) = (lead + comp) * up;
            gamma.row(r++) = (lead - comp) * up;
        }
        const Vector col = cert.x.col(jm);
        const double inv_norm2 = 1.0 / col.squaredNorm();
        up.noalias() -= (cert.step_length * inv_norm2) * col * (col.transpose() * up);
    }
    poly.gamma = std::move(gamma);
    return poly;
}

namespace {

// Streams Gamma rows applied to a fixed set of vectors: images u_i^(m) of
// each input under Upsilon^(m) are advanced by the cheap rank-one residual
// recursion instead of materializing any n x n matrix.
template <typename RowFn>
void stream_rows(const PathCertificate& cert, std::vector<Vector> images, RowFn&& fn) {
    const Index p = cert.x.cols();
    std::vector<double> inv_norm(static_cast<std::size_t>(p));
    for (Index j = 0; j < p; ++j) inv_norm[static_cast<std::size_t>(j)] = 1.0 / cert.x.col(j).norm();

    std::vector<double> lead(images.size()), comp(images.size());
    for (int m = 0; m < cert.mstop(); ++m) {
        const Index jm = cert.path[static_cast<std::size_t>(m)];
        const double sm = cert.signs[static_cast<std::size_t>(m)];
        for (std::size_t i = 0; i < images.size(); ++i)
            lead[i] = sm * inv_norm[static_cast<std::size_t>(jm)] * cert.x.col(jm).dot(images[i]);
        for (Index j = 0; j < p; ++j) {
            if (j == jm) continue;
            for (std::size_t i = 0; i < images.size(); ++i)
                comp[i] = inv_norm[static_cast<std::size_t>(j)] * cert.x.col(j).dot(images[i]);
            fn(lead, comp); // caller forms lead + comp and lead - comp rows
        }
        const Vector& col = cert.x.col(jm);
        const double scale = cert.step_length / col.squaredNorm();
        for (auto& img : images)
            img -= scale * col.dot(img) * col;
    }
}

} // namespace

double min_slack(const Polyhedron& poly, const Vector& y) {
    if (poly.gamma)
        return (*poly.gamma * y).minCoeff();
    double lo = std::numeric_limits<double>::infinity();
    stream_rows(poly.cert, {y}, [&](const std::vector<double>& lead, const std::vector<double>& comp) {
        lo = std::min({lo, lead[0] + comp[0], lead[0] - comp[0]});
    });
    return lo;
}

TruncationInterval truncation_limits(const Polyhedron& poly, const Vector& v,
                                     double /*sigma2*/, const Vector& y) {
    const double vtv = v.squaredNorm();
    if (!(vtv > 0.0)) throw std::invalid_argument("truncation_limits: zero test vector");
    const Vector c = v / vtv;
    const double r_obs = v.dot(y);
    const Vector z = y - c * r_obs;

    TruncationInterval out;
    auto absorb = [&](double gc, double gz) {
        // row feasibility: gz + r * gc >= 0
        if (gc > 1e-12) {
            out.lo = std::max(out.lo, -gz / gc);
        } else if (gc < -1e-12) {
            out.up = std::min(out.up, -gz / gc);
        } else if (gz < -1e-8) {
            throw std::runtime_error("truncation_limits: infeasible zero-coefficient row");
        }
    };
    if (poly.gamma) {
        const Vector gc = *poly.gamma * c;
        const Vector gz = *poly.gamma * z;
        for (Index i = 0; i < gc.size(); ++i) absorb(gc(i), gz(i));
    } else {
        stream_rows(poly.cert, {c, z},
                    [&](const std::vector<double>& lead, const std::vector<double>& comp) {
                        absorb(lead[0] + comp[0], lead[1] + comp[1]);
                        absorb(lead[0] - comp[0], lead[1] - comp[1]);
                    });
    }
    if (!(out.lo <= r_obs && r_obs <= out.up)) {
        // the generating y must lie inside its own selection event
        if (out.lo > r_obs && out.lo - r_obs < 1e-6) out.lo = r_obs;
        else if (out.up < r_obs && r_obs - out.up < 1e-6) out.up = r_obs;
        else throw std::runtime_error("truncation_limits: observation outside truncation interval");
    }
    return out;
}

double trunc_gauss_cdf(double x, double mu, double sigma2, double lo, double up) {
    if (!(sigma2 > 0.0)) throw std::invalid_argument("trunc_gauss_cdf: sigma2 must be positive");
    if (!(lo < up)) throw std::invalid_argument("trunc_gauss_cdf: empty interval");
    const double sigma = std::sqrt(sigma2);
    const double a = (lo - mu) / sigma;
    const double b = (up - mu) / sigma;
    const double xi = std::min(std::max((x - mu) / sigma, a), b);

    auto log_interval = [](double low, double high) {
        // log( Phi(high) - Phi(low) ), low < high
        const double lh = log_norm_cdf(high);
        if (!std::isfinite(low) && low < 0) return lh;
        const double ll = log_norm_cdf(low);
        return lh + std::log1p(-std::exp(ll - lh));
    };

    // evaluate in whichever tail keeps the Phi arguments negative
    double result;
    const double midpoint = (std::isfinite(a) ? a : -1e300) + (std::isfinite(b) ? b : 1e300);
    if (midpoint <= 0.0) {
        const double log_num = (xi <= a) ? -std::numeric_limits<double>::infinity()
                                         : log_interval(a, xi);
        const double log_den = log_interval(a, b);
        if (!std::isfinite(log_den))
            throw std::runtime_error("trunc_gauss_cdf: degenerate truncation");
        result = std::exp(log_num - log_den);
    } else {
        const double log_num = (xi >= b) ? -std::numeric_limits<double>::infinity()
                                         : log_interval(-b, -xi);
        const double log_den = log_interval(-b, -a);
        if (!std::isfinite(log_den))
            throw std::runtime_error("trunc_gauss_cdf: degenerate truncation");
        result = 1.0 - std::exp(log_num - log_den);
    }
    return std::min(std::max(result, 0.0), 1.0);
}

double polyhedron_pvalue(const Polyhedron& poly, const Vector& v, double sigma2,
                         const Vector& y, double null_value, Alternative alternative) {
    const TruncationInterval tr = truncation_limits(poly, v, sigma2, y);
    const double r_obs = v.dot(y);
    const double var = sigma2 * v.squaredNorm();
    const double f = trunc_gauss_cdf(r_obs, null_value, var, tr.lo, tr.up);
    switch (alternative) {
    case Alternative::greater: return 1.0 - f;
    case Alternative::less: return f;
    case Alternative::two_sided: return 2.0 * std::min(f, 1.0 - f);
    }
    throw std::logic_error("polyhedron_pvalue: unknown alternative");
}

std::pair<double, double> polyhedron_ci(const Polyhedron& poly, const Vector& v,
                                        double sigma2, const Vector& y, double alpha) {
    const TruncationInterval tr = truncation_limits(poly, v, sigma2, y);
    const double r_obs = v.dot(y);
    const double var = sigma2 * v.squaredNorm();
    const double sigma_r = std::sqrt(var);
    const double inf = std::numeric_limits<double>::infinity();

    // survival 1 - F at r_obs increases in the mean
    auto survival = [&](double mu) {
        return 1.0 - trunc_gauss_cdf(r_obs, mu, var, tr.lo, tr.up);
    };
    auto solve = [&](double target) {
        double left = r_obs, right = r_obs;
        bool have_left = false, have_right = false;
        for (double k = 1.0; k <= 64.0; k *= 2.0) {
            if (!have_left) {
                left = r_obs - k * sigma_r;
                have_left = survival(left) <= target;
            }
            if (!have_right) {
                right = r_obs + k * sigma_r;
                have_right = survival(right) >= target;
            }
            if (have_left && have_right) break;
        }
        if (!have_left) return -inf;
        if (!have_right) return inf;
        for (int it = 0; it < 200 && right - left > 1e-10 * sigma_r; ++it) {
            const double mid = 0.5 * (left + right);
            (survival(mid) < target ? left : right) = mid;
        }
        return 0.5 * (left + right);
    };
    return {solve(0.5 * alpha), solve(1.0 - 0.5 * alpha)};
}

} // namespace boostinf
