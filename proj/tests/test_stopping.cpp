#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "boostinf/rng.hpp"
#include "boostinf/stopping.hpp"
#include "oracles.hpp"

#include <algorithm>
#include <map>

using namespace boostinf;

namespace {

Matrix random_centered(Index n, Index p, std::uint64_t seed) {
    Rng rng(seed);
    Matrix x(n, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < n; ++i) x(i, j) = rng.normal();
    return center_columns(x);
}

std::vector<BaseLearner> linear_learners(const Matrix& x) {
    std::vector<BaseLearner> out;
    for (Index j = 0; j < x.cols(); ++j)
        out.push_back(make_linear_learner(static_cast<int>(j), x.col(j)));
    return out;
}

} // namespace

TEST_CASE("assign_folds: balance, determinism, remainder rule") {
    SUBCASE("n divisible by k") {
        const auto fa = assign_folds(10, 5, 42);
        std::map<int, int> counts;
        for (int f : fa.folds) ++counts[f];
        CHECK(counts.size() == 5);
        for (const auto& [f, c] : counts) {
            CHECK(f >= 1);
            CHECK(f <= 5);
            CHECK(c == 2);
        }
    }
    SUBCASE("same seed, same assignment") {
        CHECK(assign_folds(23, 4, 7).folds == assign_folds(23, 4, 7).folds);
        CHECK(assign_folds(23, 4, 7).folds != assign_folds(23, 4, 8).folds);
    }
    SUBCASE("remainder goes to the lowest labels") {
        const auto fa = assign_folds(10, 3, 99);
        std::map<int, int> counts;
        for (int f : fa.folds) ++counts[f];
        CHECK(counts[1] == 4);
        CHECK(counts[2] == 3);
        CHECK(counts[3] == 3);
    }
    SUBCASE("k out of range") {
        CHECK_THROWS_AS(assign_folds(5, 6, 1), std::invalid_argument);
        CHECK_THROWS_AS(assign_folds(5, 1, 1), std::invalid_argument);
    }
}

TEST_CASE("cv risk at m = 1 matches a hand-rolled single-step oracle") {
    const int n = 20;
    const Matrix x = random_centered(n, 4, 3);
    Rng rng(4);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = 1.5 * x(i, 0) + rng.normal();
    y = centered(y);
    const auto learners = linear_learners(x);
    const auto folds = assign_folds(n, 4, 11);
    const double nu = 0.1;

    const CVResult cv = cv_choose_mstop(y, learners, 5, nu, folds);

    // independent single-step pass
    double risk1 = 0.0;
    for (int f = 1; f <= 4; ++f) {
        std::vector<int> train, test;
        for (int i = 0; i < n; ++i) (folds.folds[i] == f ? test : train).push_back(i);
        const Index ntr = static_cast<Index>(train.size());
        const Index nte = static_cast<Index>(test.size());
        Matrix xtr(ntr, 4), xte(nte, 4);
        Vector ytr(ntr), yte(nte);
        for (Index i = 0; i < ntr; ++i) {
            xtr.row(i) = x.row(train[static_cast<std::size_t>(i)]);
            ytr(i) = y(train[static_cast<std::size_t>(i)]);
        }
        for (Index i = 0; i < nte; ++i) {
            xte.row(i) = x.row(test[static_cast<std::size_t>(i)]);
            yte(i) = y(test[static_cast<std::size_t>(i)]);
        }
        const double offset = ytr.mean();
        const Vector u = ytr.array() - offset;
        const RowVector means = xtr.colwise().mean();
        xtr.rowwise() -= means;
        xte.rowwise() -= means;
        int best = -1;
        double best_gain = -1.0;
        for (Index j = 0; j < 4; ++j) {
            const double t = xtr.col(j).dot(u);
            const double gain = t * t / xtr.col(j).squaredNorm();
            if (gain > best_gain + 1e-15) {
                best_gain = gain;
                best = static_cast<int>(j);
            }
        }
        const double coef = xtr.col(best).dot(u) / xtr.col(best).squaredNorm();
        const Vector pred = Vector::Constant(nte, offset) + nu * coef * xte.col(best);
        risk1 += (yte - pred).squaredNorm() / static_cast<double>(nte);
    }
    risk1 /= 4.0;
    CHECK(cv.risk[0] == doctest::Approx(risk1).epsilon(1e-12));
}

TEST_CASE("pure noise stops early") {
    // Monte Carlo oracle over these exact seeds: 21 of 30 runs stop within
    // 10% of the grid and the median chosen mstop is 1; noise cannot
    // support late stopping in the typical run, though the flat risk curve
    // lets the argmin wander in a minority of seeds.
    int early = 0;
    std::vector<int> chosen;
    const int trials = 30;
    for (int t = 0; t < trials; ++t) {
        const int n = 100;
        const Matrix x = random_centered(n, 5, 500 + static_cast<std::uint64_t>(t));
        Rng rng(900 + static_cast<std::uint64_t>(t));
        Vector y(n);
        for (Index i = 0; i < n; ++i) y(i) = rng.normal();
        y = centered(y);
        const auto folds = assign_folds(n, 5, 77 + static_cast<std::uint64_t>(t));
        const CVResult cv = cv_choose_mstop(y, linear_learners(x), 100, 0.1, folds);
        chosen.push_back(cv.chosen_mstop);
        early += (cv.chosen_mstop <= 10);
    }
    CHECK(early == 21);
    std::sort(chosen.begin(), chosen.end());
    CHECK(chosen[trials / 2] <= 5);
}

TEST_CASE("noiseless linear signal never stops early") {
    const int n = 40;
    const Matrix x = random_centered(n, 3, 21);
    const Vector y = centered(Vector(2.0 * x.col(0)));
    const auto folds = assign_folds(n, 5, 5);
    const CVResult cv = cv_choose_mstop(y, linear_learners(x), 60, 0.1, folds);
    CHECK(cv.chosen_mstop == 60);
    for (std::size_t m = 1; m < cv.risk.size(); ++m) CHECK(cv.risk[m] <= cv.risk[m - 1] + 1e-15);
}

TEST_CASE("pipeline_select is deterministic and composes boost_fit") {
    const int n = 30;
    const Matrix x = random_centered(n, 6, 31);
    Rng rng(32);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = x(i, 0) - x(i, 3) + 0.8 * rng.normal();
    y = centered(y);
    const auto learners = linear_learners(x);

    SUBCASE("fixed mstop equals a direct fit") {
        StoppingSpec spec;
        spec.kind = StoppingSpec::Kind::fixed_m;
        spec.mstop = 25;
        const auto sel = pipeline_select(y, learners, 0.1, spec);
        const auto fit = boost_fit(y, learners, BoostConfig{0.1, 25});
        CHECK(sel.selected == fit.selected_set);
        CHECK(sel.mstop == 25);
    }
    SUBCASE("cv pipeline: identical outputs across calls") {
        StoppingSpec spec;
        spec.kind = StoppingSpec::Kind::cv;
        spec.grid_max = 50;
        spec.folds = assign_folds(n, 5, 8);
        const auto a = pipeline_select(y, learners, 0.1, spec);
        const auto b = pipeline_select(y, learners, 0.1, spec);
        CHECK(a.selected == b.selected);
        CHECK(a.mstop == b.mstop);
        CHECK(a.cv->risk == b.cv->risk);
    }
}

TEST_CASE("congruency probes can change mstop while keeping the selected set") {
    // a probe shifted along a selected coefficient direction may stop at a
    // different iteration yet select the same set; congruency is set equality
    const int n = 30;
    const Matrix x = random_centered(n, 6, 61);
    Rng rng(62);
    Vector y(n);
    for (Index i = 0; i < n; ++i) y(i) = 1.2 * x(i, 0) - 0.9 * x(i, 1) + rng.normal();
    y = centered(y);
    const auto learners = linear_learners(x);
    StoppingSpec spec;
    spec.kind = StoppingSpec::Kind::cv;
    spec.grid_max = 60;
    spec.folds = assign_folds(n, 5, 17);

    const auto base = pipeline_select(y, learners, 0.1, spec);
    Matrix xa(n, static_cast<Index>(base.selected.size()));
    for (std::size_t k = 0; k < base.selected.size(); ++k)
        xa.col(static_cast<Index>(k)) = x.col(base.selected[k]);
    const Vector beta = oracle::ols_coef(xa, y);
    const Vector v = xa * (xa.transpose() * xa).fullPivLu().inverse().col(0);
    const Vector dir = v / v.squaredNorm();

    bool found = false;
    for (double delta : {-0.8, -0.4, -0.2, 0.2, 0.4, 0.8, 1.2, -1.2}) {
        const Vector probe = y + delta * dir;
        const auto rerun = pipeline_select(probe, learners, 0.1, spec);
        if (rerun.mstop != base.mstop && rerun.selected == base.selected) {
            found = true;
            break;
        }
    }
    CHECK(found);
    (void)beta;
}
