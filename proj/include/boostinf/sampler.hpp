#pragma once

#include "boostinf/stopping.hpp"
#include "boostinf/test_spec.hpp"

#include <cstdint>
#include <span>

namespace boostinf {

// A deterministic, rerunnable congruency check: does the probe response
// reproduce the conditioning event? Implementations must be safe to call
// concurrently from multiple workers.
class CongruencyOracle {
public:
    virtual ~CongruencyOracle() = default;
    virtual bool congruent(const Vector& y) const = 0;
};

// The selection map S: boosting (with fixed mstop or CV on fixed folds)
// followed by set comparison against the reference selection. Conditioning
// is on the selected set only - not the path, signs or chosen mstop.
class SetSelectionOracle final : public CongruencyOracle {
public:
    SetSelectionOracle(std::vector<BaseLearner> learners, double step_length,
                       StoppingSpec stopping, std::vector<int> reference);

    bool congruent(const Vector& y) const override;
    std::vector<int> select(const Vector& y) const;
    const std::vector<int>& reference() const { return reference_; }

private:
    std::vector<BaseLearner> learners_;
    double step_length_;
    StoppingSpec stopping_;
    std::optional<CvPlan> cv_plan_;
    std::vector<int> reference_;
};

enum class Proposal { uniform_bracket, normal_at_robs };

struct SamplerOptions {
    int num_samples = 1000; // B
    std::uint64_t seed = 1;
    Proposal proposal = Proposal::uniform_bracket;
    int search_budget = 50;   // congruency refits spent on the line search
    int min_accepted = 20;    // below this the result is flagged low accuracy
    double hard_bound_sigmas = 8.0;
    int threads = 0;
};

struct Bracket {
    double lo = 0.0;
    double up = 0.0;
    bool lo_at_hard_bound = false; // still congruent at the hard search bound
    bool up_at_hard_bound = false;
    int refits = 0;

    double width() const { return up - lo; }
};

// Superset of the congruent support along the probe line, up to the scan
// resolution: an inward scan from each hard bound finds the outermost
// congruent region, bisection then sharpens the boundary. Returned
// endpoints are the last non-congruent probes.
Bracket line_search_bracket(const CongruencyOracle& oracle, const ProbeLine& line,
                            const TestSpec& spec, const SamplerOptions& opts);

struct SampleBatch {
    std::vector<double> draws;
    std::vector<char> congruent;
    std::vector<double> log_weights; // log f_target - log f_proposal
    Proposal proposal = Proposal::uniform_bracket;
    Bracket bracket;
    double r_obs = 0.0;
    double scale2 = 1.0; // sigma2 v'v (direction) or sigma2 (group)
    int dim = 1;

    int accepted() const;
    std::vector<double> weights() const;
};

// B draws from the proposal with one congruency rerun each; draw b uses its
// own derived seed, so results do not depend on worker count or schedule.
SampleBatch draw_batch(const CongruencyOracle& oracle, const ProbeLine& line,
                       const TestSpec& spec, const Bracket& bracket,
                       const SamplerOptions& opts);

// One-sided selective p-value for H0: rho = t (exponential tilting of the
// batch, log-sum-exp throughout).
double pvalue_hat(const SampleBatch& batch, double t);
inline double pvalue_two_sided(const SampleBatch& batch, double t) {
    const double p = pvalue_hat(batch, t);
    return 2.0 * std::min(p, 1.0 - p);
}

double effective_sample_size(std::span<const double> weights);

struct CiOptions {
    double alpha = 0.05;
    double p_tol = 1e-3;
    double max_expansion_sigmas = 64.0;
};

// Two-sided interval by monotone bisection of rho -> pvalue_hat(batch, rho);
// sides that never cross their target within the expansion come back
// infinite.
std::pair<double, double> invert_ci(const SampleBatch& batch, const CiOptions& opts);

struct InferenceResult {
    double estimate = 0.0;  // v'y, or ||P_W y|| in group mode
    double p_value = 1.0;   // reported p: two-sided (direction), one-sided (group)
    double p_one_sided = 1.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double ess = 0.0;
    int accepted = 0;
    Bracket bracket;
    int refits = 0;
    bool low_accuracy = false;
};

InferenceResult run_inference(const CongruencyOracle& oracle, const TestSpec& spec,
                              const Vector& y, const SamplerOptions& opts,
                              double alpha = 0.05);

} // namespace boostinf
