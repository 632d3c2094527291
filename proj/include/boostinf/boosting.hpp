#pragma once

#include "boostinf/base_learner.hpp"

#include <map>
#include <vector>

namespace boostinf {

struct BoostConfig {
    double step_length = 0.1; // nu in (0, 1]
    int mstop = 100;
};

struct BoostFit {
    std::vector<int> path;   // chosen learner id per iteration
    std::vector<int> signs;  // +-1 for single-column learners, 0 otherwise
    Vector fitted;           // f^(mstop)
    Vector residuals;        // y - fitted
    std::map<int, Vector> coefficients; // aggregated per selected learner
    std::vector<int> selected_set;      // distinct path ids, ascending
    std::vector<double> residual_norm2; // ||u^(m)||^2 for m = 1..mstop+1
};

// One component-wise step: index of the argmin-SSE learner on residual u
// (ties resolved to the smallest id with a 1e-12 relative guard).
std::size_t boost_argmin(const Vector& u, const std::vector<BaseLearner>& learners);

BoostFit boost_fit(const Vector& y, const std::vector<BaseLearner>& learners,
                   const BoostConfig& cfg);

// Selection-only fast path used by congruency reruns.
std::vector<int> boost_select(const Vector& y, const std::vector<BaseLearner>& learners,
                              const BoostConfig& cfg);

std::vector<int> selection_set(const BoostFit& fit);

enum class VarianceMode { known, boost_residual, response, ols_refit };

double estimate_sigma2(const BoostFit& fit, const Vector& y,
                       const std::vector<BaseLearner>& learners, VarianceMode mode,
                       double known_sigma2 = 0.0);

// Stacked design of the selected learners, ids ascending; records block
// offsets so test vectors can locate their columns.
struct SelectedDesign {
    Matrix x;                       // n x total columns
    std::vector<int> ids;           // ascending
    std::vector<Index> offsets;     // column offset per id
    std::vector<Index> widths;
    Index block_of(int id) const;   // index into ids/offsets, throws if absent
};
SelectedDesign selected_design(const std::vector<BaseLearner>& learners,
                               const std::vector<int>& selected);

} // namespace boostinf
