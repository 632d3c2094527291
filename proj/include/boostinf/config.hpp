#pragma once

#include "boostinf/base_learner.hpp"
#include "boostinf/boosting.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace boostinf {

struct LearnerDecl {
    std::string name;
    enum class Type { linear, spline, group } type = Type::linear;
    std::vector<std::string> columns;
    SplineConfig spline;
    bool deviation = false;
    std::optional<double> lambda;
    std::optional<double> df;
};

struct TargetDecl {
    std::string learner;
    enum class Kind { coefficient, pointwise, whole_function } kind = Kind::coefficient;
    std::vector<double> grid; // pointwise evaluation points
};

struct StoppingDecl {
    enum class Kind { fixed_m, cv } kind = Kind::fixed_m;
    int mstop = 100;
    int cv_folds = 5;
    int cv_grid_max = 100;
    std::uint64_t cv_seed = 1;
};

struct RunConfig {
    std::string data_path;
    std::string response;
    std::vector<LearnerDecl> learners;
    double nu = 0.1;
    StoppingDecl stopping;
    VarianceMode variance = VarianceMode::boost_residual;
    double sigma2 = 0.0; // used by VarianceMode::known
    enum class Method { sampling, polyhedron } method = Method::sampling;
    int num_samples = 1000;
    double alpha = 0.05;
    std::uint64_t seed = 1;
    int threads = 0;
    std::vector<TargetDecl> targets;
};

// Flat key = value text with repeated [learner] / [target] sections.
// Unknown keys are rejected with their line number.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

// Canonical serialization; parse_config(write_config(c)) is equivalent to c.
std::string write_config(const RunConfig& cfg);

} // namespace boostinf
