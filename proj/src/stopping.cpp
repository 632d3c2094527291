#include "boostinf/stopping.hpp"

#include "boostinf/rng.hpp"

#include <algorithm>
#include <stdexcept>

namespace boostinf {

FoldAssignment assign_folds(int n, int k, std::uint64_t seed) {
    if (k < 2 || k > n) throw std::invalid_argument("assign_folds: need 2 <= k <= n");
    FoldAssignment fa;
    fa.k = k;
    fa.seed = seed;
    fa.folds.reserve(n);
    const int base = n / k;
    const int rem = n % k;
    for (int f = 1; f <= k; ++f) {
        const int size = base + (f <= rem ? 1 : 0);
        for (int i = 0; i < size; ++i) fa.folds.push_back(f);
    }
    Rng rng(seed);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng.uniform_index(static_cast<std::uint64_t>(i) + 1));
        std::swap(fa.folds[i], fa.folds[j]);
    }
    return fa;
}

CvPlan::CvPlan(const std::vector<BaseLearner>& learners, const FoldAssignment& folds)
    : folds_(folds) {
    const int n = static_cast<int>(folds.folds.size());
    if (!learners.empty() && learners.front().n() != n)
        throw std::invalid_argument("CvPlan: fold assignment length mismatch");
    per_fold_.resize(folds.k);
    for (int f = 1; f <= folds.k; ++f) {
        Fold& fold = per_fold_[f - 1];
        for (int i = 0; i < n; ++i)
            (folds.folds[i] == f ? fold.test_rows : fold.train_rows).push_back(i);
        if (fold.test_rows.empty() || fold.train_rows.empty())
            throw std::invalid_argument("CvPlan: empty fold");
        for (const auto& bl : learners) {
            // train-fold column means removed on both sides, mirroring the
            // per-fold response centering
            Matrix train(static_cast<Index>(fold.train_rows.size()), bl.cols());
            for (std::size_t i = 0; i < fold.train_rows.size(); ++i)
                train.row(static_cast<Index>(i)) = bl.design().row(fold.train_rows[i]);
            Matrix test(static_cast<Index>(fold.test_rows.size()), bl.cols());
            for (std::size_t i = 0; i < fold.test_rows.size(); ++i)
                test.row(static_cast<Index>(i)) = bl.design().row(fold.test_rows[i]);
            const RowVector means = train.colwise().mean();
            train.rowwise() -= means;
            test.rowwise() -= means;
            fold.train_learners.emplace_back(bl.id(), std::move(train), bl.penalty(), bl.lambda(),
                                             bl.kind());
            fold.test_designs.push_back(std::move(test));
        }
    }
}

CVResult CvPlan::run(const Vector& y, double step_length, int grid_max) const {
    if (grid_max < 1) throw std::invalid_argument("cv: grid_max must be >= 1");
    CVResult out;
    out.risk.assign(grid_max, 0.0);

    for (const Fold& fold : per_fold_) {
        Vector y_train(static_cast<Index>(fold.train_rows.size()));
        for (std::size_t i = 0; i < fold.train_rows.size(); ++i)
            y_train(static_cast<Index>(i)) = y(fold.train_rows[i]);
        Vector y_test(static_cast<Index>(fold.test_rows.size()));
        for (std::size_t i = 0; i < fold.test_rows.size(); ++i)
            y_test(static_cast<Index>(i)) = y(fold.test_rows[i]);

        // train-fold centering; offset added back to held-out predictions
        const double offset = y_train.mean();
        y_train.array() -= offset;

        Vector u = y_train;
        Vector pred = Vector::Constant(y_test.size(), offset);
        const double inv_ntest = 1.0 / static_cast<double>(y_test.size());
        for (int m = 0; m < grid_max; ++m) {
            const std::size_t j = boost_argmin(u, fold.train_learners);
            const Vector coef = fold.train_learners[j].fit_coef(u);
            u -= step_length * (fold.train_learners[j].design() * coef);
            pred += step_length * (fold.test_designs[j] * coef);
            out.risk[m] += (y_test - pred).squaredNorm() * inv_ntest;
        }
    }
    for (double& r : out.risk) r /= static_cast<double>(per_fold_.size());

    out.chosen_mstop = 1;
    double best = out.risk[0];
    for (int m = 1; m < grid_max; ++m)
        if (out.risk[m] < best) { // strict: ties keep the smaller m
            best = out.risk[m];
            out.chosen_mstop = m + 1;
        }
    return out;
}

CVResult cv_choose_mstop(const Vector& y, const std::vector<BaseLearner>& learners,
                         int grid_max, double step_length, const FoldAssignment& folds) {
    return CvPlan(learners, folds).run(y, step_length, grid_max);
}

PipelineSelection pipeline_select(const Vector& y, const std::vector<BaseLearner>& learners,
                                  double step_length, const StoppingSpec& stopping) {
    PipelineSelection out;
    BoostConfig cfg;
    cfg.step_length = step_length;
    if (stopping.kind == StoppingSpec::Kind::fixed_m) {
        cfg.mstop = stopping.mstop;
    } else {
        if (!stopping.folds) throw std::invalid_argument("pipeline_select: cv requires folds");
        out.cv = cv_choose_mstop(y, learners, stopping.grid_max, step_length, *stopping.folds);
        cfg.mstop = out.cv->chosen_mstop;
    }
    out.fit = boost_fit(y, learners, cfg);
    out.mstop = cfg.mstop;
    out.selected = out.fit.selected_set;
    return out;
}

} // namespace boostinf
