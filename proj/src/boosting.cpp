#include "boostinf/boosting.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace boostinf {

namespace {

void check_inputs(const Vector& y, const std::vector<BaseLearner>& learners) {
    if (learners.empty()) throw std::invalid_argument("boost_fit: empty learner list");
    if (std::abs(y.mean()) > 1e-10)
        throw std::invalid_argument("boost_fit: response must be centered");
    for (const auto& bl : learners)
        if (bl.n() != y.size())
            throw std::invalid_argument("boost_fit: learner row count mismatch");
}

} // namespace

std::size_t boost_argmin(const Vector& u, const std::vector<BaseLearner>& learners) {
    const double u_norm2 = u.squaredNorm();
    // strict improvement must clear a relative guard so float noise cannot
    // reorder near-ties; lowest id wins otherwise
    const double guard = 1e-12 * u_norm2;
    std::size_t best = 0;
    double best_sse = learners[0].sse_residual(u, u_norm2);
    for (std::size_t j = 1; j < learners.size(); ++j) {
        const double sse = learners[j].sse_residual(u, u_norm2);
        if (sse < best_sse - guard) {
            best = j;
            best_sse = sse;
        }
    }
    return best;
}

BoostFit boost_fit(const Vector& y, const std::vector<BaseLearner>& learners,
                   const BoostConfig& cfg) {
    check_inputs(y, learners);
    if (cfg.mstop < 1) throw std::invalid_argument("boost_fit: mstop must be >= 1");
    if (!(cfg.step_length > 0.0 && cfg.step_length <= 1.0))
        throw std::invalid_argument("boost_fit: step length must be in (0, 1]");

    BoostFit fit;
    fit.path.reserve(cfg.mstop);
    fit.signs.reserve(cfg.mstop);
    fit.residual_norm2.reserve(cfg.mstop + 1);

    Vector u = y; // f^(0) = 0
    for (int m = 0; m < cfg.mstop; ++m) {
        fit.residual_norm2.push_back(u.squaredNorm());
        const std::size_t j = boost_argmin(u, learners);
        const BaseLearner& bl = learners[j];
        const Vector coef = bl.fit_coef(u);

        fit.path.push_back(bl.id());
        if (bl.cols() == 1)
            fit.signs.push_back(bl.design().col(0).dot(u) >= 0.0 ? 1 : -1);
        else
            fit.signs.push_back(0);

        auto [it, inserted] = fit.coefficients.try_emplace(bl.id(), Vector::Zero(bl.cols()));
        it->second += cfg.step_length * coef;
        u -= cfg.step_length * (bl.design() * coef);
    }
    fit.residual_norm2.push_back(u.squaredNorm());
    fit.residuals = u;
    fit.fitted = y - u;

    std::set<int> distinct(fit.path.begin(), fit.path.end());
    fit.selected_set.assign(distinct.begin(), distinct.end());
    return fit;
}

std::vector<int> boost_select(const Vector& y, const std::vector<BaseLearner>& learners,
                              const BoostConfig& cfg) {
    check_inputs(y, learners);
    std::set<int> distinct;
    Vector u = y;
    for (int m = 0; m < cfg.mstop; ++m) {
        const std::size_t j = boost_argmin(u, learners);
        const BaseLearner& bl = learners[j];
        distinct.insert(bl.id());
        u -= cfg.step_length * bl.fit_values(u);
    }
    return {distinct.begin(), distinct.end()};
}

std::vector<int> selection_set(const BoostFit& fit) {
    std::set<int> distinct(fit.path.begin(), fit.path.end());
    return {distinct.begin(), distinct.end()};
}

SelectedDesign selected_design(const std::vector<BaseLearner>& learners,
                               const std::vector<int>& selected) {
    SelectedDesign out;
    out.ids = selected;
    std::sort(out.ids.begin(), out.ids.end());
    Index total = 0;
    std::vector<const BaseLearner*> blocks;
    for (int id : out.ids) {
        const BaseLearner* found = nullptr;
        for (const auto& bl : learners)
            if (bl.id() == id) { found = &bl; break; }
        if (!found) throw std::invalid_argument("selected_design: unknown learner id");
        blocks.push_back(found);
        out.offsets.push_back(total);
        out.widths.push_back(found->cols());
        total += found->cols();
    }
    if (blocks.empty()) throw std::invalid_argument("selected_design: empty selection");
    out.x.resize(blocks.front()->n(), total);
    for (std::size_t b = 0; b < blocks.size(); ++b)
        out.x.middleCols(out.offsets[b], out.widths[b]) = blocks[b]->design();
    return out;
}

Index SelectedDesign::block_of(int id) const {
    for (std::size_t b = 0; b < ids.size(); ++b)
        if (ids[b] == id) return static_cast<Index>(b);
    throw std::invalid_argument("learner id not in selected set");
}

double estimate_sigma2(const BoostFit& fit, const Vector& y,
                       const std::vector<BaseLearner>& learners, VarianceMode mode,
                       double known_sigma2) {
    const Index n = y.size();
    if (n < 2) throw std::invalid_argument("estimate_sigma2: need n >= 2");
    switch (mode) {
    case VarianceMode::known:
        if (!(known_sigma2 > 0.0))
            throw std::invalid_argument("estimate_sigma2: known variance must be positive");
        return known_sigma2;
    case VarianceMode::boost_residual: {
        const double s2 = fit.residuals.squaredNorm() / static_cast<double>(n - 1);
        if (!(s2 > 0.0)) throw std::runtime_error("estimate_sigma2: zero variance");
        return s2;
    }
    case VarianceMode::response: {
        const double s2 = (y.array() - y.mean()).matrix().squaredNorm() / static_cast<double>(n - 1);
        if (!(s2 > 0.0)) throw std::runtime_error("estimate_sigma2: zero variance");
        return s2;
    }
    case VarianceMode::ols_refit: {
        const SelectedDesign sel = selected_design(learners, fit.selected_set);
        Eigen::ColPivHouseholderQR<Matrix> qr(sel.x);
        const Index rank = qr.rank();
        if (rank >= n) throw std::runtime_error("estimate_sigma2: selected design rank >= n");
        const Vector resid = y - sel.x * qr.solve(y);
        const double s2 = resid.squaredNorm() / static_cast<double>(n - rank);
        if (!(s2 > 0.0)) throw std::runtime_error("estimate_sigma2: zero variance");
        return s2;
    }
    }
    throw std::logic_error("estimate_sigma2: unknown mode");
}

} // namespace boostinf
