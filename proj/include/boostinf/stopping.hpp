#pragma once

#include "boostinf/boosting.hpp"

#include <cstdint>
#include <memory>
#include <optional>

namespace boostinf {

struct FoldAssignment {
    std::vector<int> folds; // entry per observation, values in 1..k
    int k = 0;
    std::uint64_t seed = 0;
};

// Seeded uniform shuffle of the balanced label vector (1,..,1,2,..,2,...,k);
// when n is not a multiple of k the remainder goes to the lowest labels.
FoldAssignment assign_folds(int n, int k, std::uint64_t seed);

struct CVResult {
    std::vector<double> risk; // mean held-out squared error, m = 1..grid_max
    int chosen_mstop = 0;     // argmin, ties to the smallest m
};

// Per-fold training learners are factored once and reused across reruns;
// evaluating a new response costs only the boosting loop itself.
class CvPlan {
public:
    CvPlan(const std::vector<BaseLearner>& learners, const FoldAssignment& folds);

    CVResult run(const Vector& y, double step_length, int grid_max) const;
    const FoldAssignment& folds() const { return folds_; }

private:
    struct Fold {
        std::vector<Index> train_rows;
        std::vector<Index> test_rows;
        std::vector<BaseLearner> train_learners;
        std::vector<Matrix> test_designs; // per learner, test-row design block
    };
    FoldAssignment folds_;
    std::vector<Fold> per_fold_;
};

CVResult cv_choose_mstop(const Vector& y, const std::vector<BaseLearner>& learners,
                         int grid_max, double step_length, const FoldAssignment& folds);

struct StoppingSpec {
    enum class Kind { fixed_m, cv } kind = Kind::fixed_m;
    int mstop = 100;                     // fixed_m
    int grid_max = 100;                  // cv
    std::optional<FoldAssignment> folds; // cv; fixed across reruns
};

struct PipelineSelection {
    std::vector<int> selected;
    int mstop = 0;
    BoostFit fit;
    std::optional<CVResult> cv;
};

// The full deterministic selection map: (optional CV for mstop) + boosting.
PipelineSelection pipeline_select(const Vector& y, const std::vector<BaseLearner>& learners,
                                  double step_length, const StoppingSpec& stopping);

} // namespace boostinf
