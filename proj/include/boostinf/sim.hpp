#pragma once

#include "boostinf/sampler.hpp"

#include <iosfwd>
#include <string>

namespace boostinf {

struct StoppingChoice {
    enum class Kind { fixed_m, cv } kind = Kind::fixed_m;
    int mstop = 40;
    int cv_folds = 5;
    int cv_grid_max = 100;
};

struct ScenarioConfig {
    enum class Kind { linear, additive } kind = Kind::linear;
    int n = 25;
    int p_noise = 4;
    std::vector<double> beta = {4.0, -3.0, 2.0, -1.0};
    double snr = 1.0;
    double step_length = 0.1;
    StoppingChoice stopping;
    VarianceMode variance = VarianceMode::known;
    bool run_sampling = true;
    bool run_polyhedron = false;
    bool run_naive = true;
    int replications = 100;
    int num_samples = 600; // B per hypothesis
    double alpha = 0.05;
    std::uint64_t base_seed = 1;
    int threads = 0;
    // additive scenario
    SplineConfig spline{3, 5, 2};
    double spline_df = 4.0;

    int n_signal() const {
        return kind == Kind::linear ? static_cast<int>(beta.size()) : 2;
    }
    int n_learners() const { return n_signal() + p_noise; }
};

struct GeneratedData {
    Vector y;    // centered
    Matrix x;    // covariates; centered columns for the linear design
    Vector eta;  // true signal before noise
    double sigma = 1.0;
};

// Linear design: iid standard normal columns, eta = X[, 1..4] beta,
// sigma = sd(eta) / SNR, y = eta + noise, then centered.
GeneratedData gen_linear(const ScenarioConfig& cfg, std::uint64_t seed);

// Additive design: eta_i = sin(2 x_i1) + x_i2^2 / 2 plus noise covariates;
// every covariate gets a P-spline learner.
GeneratedData gen_additive(const ScenarioConfig& cfg, std::uint64_t seed);

std::vector<BaseLearner> scenario_learners(const ScenarioConfig& cfg, const GeneratedData& data);

struct HypothesisRecord {
    int replication = 0;
    int learner_id = 0;
    int mstop = 0;
    bool signal = false;
    bool admissible = false;
    bool null_holds = false;
    double truth = 0.0;
    double estimate = std::numeric_limits<double>::quiet_NaN();
    double p_sampling = std::numeric_limits<double>::quiet_NaN();
    double p_polyhedron = std::numeric_limits<double>::quiet_NaN();
    double p_naive = std::numeric_limits<double>::quiet_NaN();
    double ci_lo = std::numeric_limits<double>::quiet_NaN();
    double ci_hi = std::numeric_limits<double>::quiet_NaN();
    bool ci_infinite = false;
    double ess = std::numeric_limits<double>::quiet_NaN();
    int accepted = 0;
    std::string error;
};

struct StudyAggregates {
    int n_replications = 0;
    int n_admissible = 0;
    int n_null_records = 0;
    double ks_noise_sampling = std::numeric_limits<double>::quiet_NaN();
    double ks_noise_polyhedron = std::numeric_limits<double>::quiet_NaN();
    double ks_noise_naive = std::numeric_limits<double>::quiet_NaN();
    double rejection_noise_sampling = std::numeric_limits<double>::quiet_NaN();
    double coverage_noise = std::numeric_limits<double>::quiet_NaN();
    double coverage_signal = std::numeric_limits<double>::quiet_NaN();
    double infinite_ci_fraction = std::numeric_limits<double>::quiet_NaN();
};

struct StudyResult {
    ScenarioConfig cfg;
    std::vector<HypothesisRecord> records;
    StudyAggregates aggregates;
};

// sup-distance of the empirical CDF from Uniform[0,1]
double ks_uniform_distance(std::vector<double> pvalues);

StudyAggregates compute_aggregates(const std::vector<HypothesisRecord>& records, double alpha);

StudyResult run_study(const ScenarioConfig& cfg);

void write_records_csv(const StudyResult& study, std::ostream& os);

// Scenario presets named after the simulation designs they reproduce.
ScenarioConfig scenario_preset(const std::string& name);
std::vector<std::string> scenario_preset_names();

} // namespace boostinf
