#pragma once

#include "boostinf/ingest.hpp"
#include "boostinf/sampler.hpp"

#include "json.hpp"

namespace boostinf {

struct PointwiseRow {
    double c = 0.0;
    bool ok = false;
    std::string error;
    InferenceResult result;
};

struct TargetOutcome {
    TargetDecl decl;
    bool ok = false;
    std::string error;
    double estimate = std::numeric_limits<double>::quiet_NaN();
    std::optional<InferenceResult> sampling;
    // polyhedron method
    std::optional<double> p_polyhedron;
    double poly_ci_lo = 0.0, poly_ci_hi = 0.0;
    double trunc_lo = 0.0, trunc_up = 0.0;
    // pointwise targets
    std::vector<PointwiseRow> pointwise;
};

struct RunOutput {
    RunConfig cfg;
    std::vector<int> selected_ids;
    std::vector<std::string> selected_names;
    int mstop = 0;
    std::optional<std::vector<double>> cv_risk;
    std::map<std::string, std::vector<double>> coefficients; // by learner name
    double sigma2 = 0.0;
    CenteringRecord centering;
    std::vector<TargetOutcome> targets;
    double wall_seconds = 0.0;
    int exit_code = 0; // 0 ok, 2 when any target carries an error
};

// Selection plus (optionally) per-target inference. Target-level failures
// are embedded in the outcome, never dropped.
RunOutput run_pipeline(const RunConfig& cfg, const Dataset& data, bool with_inference);

nlohmann::ordered_json report_json(const RunOutput& out);
std::string report_text(const RunOutput& out);

// Plot-ready table for one pointwise target: c, fitted value, CI, p.
std::string effect_table_csv(const TargetOutcome& target);

} // namespace boostinf
