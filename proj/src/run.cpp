#include "boostinf/run.hpp"

#include "boostinf/polyhedron.hpp"
#include "boostinf/rng.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace boostinf {

namespace {

StoppingSpec stopping_spec(const RunConfig& cfg, Index n) {
    StoppingSpec spec;
    if (cfg.stopping.kind == StoppingDecl::Kind::fixed_m) {
        spec.kind = StoppingSpec::Kind::fixed_m;
        spec.mstop = cfg.stopping.mstop;
    } else {
        spec.kind = StoppingSpec::Kind::cv;
        spec.grid_max = cfg.stopping.cv_grid_max;
        spec.folds = assign_folds(static_cast<int>(n), cfg.stopping.cv_folds,
                                  cfg.stopping.cv_seed);
    }
    return spec;
}

InferenceResult sample_target(const SetSelectionOracle& oracle, const TestSpec& spec,
                              const Vector& y, const RunConfig& cfg, std::uint64_t seed) {
    SamplerOptions opts;
    opts.num_samples = cfg.num_samples;
    opts.seed = seed;
    opts.threads = cfg.threads;
    return run_inference(oracle, spec, y, opts, cfg.alpha);
}

} // namespace

RunOutput run_pipeline(const RunConfig& cfg, const Dataset& data, bool with_inference) {
    const auto t0 = std::chrono::steady_clock::now();

    RunOutput out;
    out.cfg = cfg;
    const Model model = ingest(data, cfg);
    out.centering = model.centering;

    const StoppingSpec stopping = stopping_spec(cfg, model.y.size());
    const PipelineSelection sel =
        pipeline_select(model.y, model.learners, cfg.nu, stopping);
    out.selected_ids = sel.selected;
    for (int id : sel.selected)
        out.selected_names.push_back(model.learner_names[static_cast<std::size_t>(id)]);
    out.mstop = sel.mstop;
    if (sel.cv) out.cv_risk = sel.cv->risk;
    for (const auto& [id, coef] : sel.fit.coefficients) {
        std::vector<double> c(coef.data(), coef.data() + coef.size());
        out.coefficients[model.learner_names[static_cast<std::size_t>(id)]] = std::move(c);
    }
    out.sigma2 = cfg.variance == VarianceMode::known
                     ? cfg.sigma2
                     : estimate_sigma2(sel.fit, model.y, model.learners, cfg.variance);

    if (with_inference && !cfg.targets.empty()) {
        const SelectedDesign design = selected_design(model.learners, sel.selected);
        std::optional<SetSelectionOracle> oracle;
        std::optional<Polyhedron> poly;
        if (cfg.method == RunConfig::Method::sampling)
            oracle.emplace(model.learners, cfg.nu, stopping, sel.selected);

        for (std::size_t ti = 0; ti < cfg.targets.size(); ++ti) {
            TargetOutcome outcome;
            outcome.decl = cfg.targets[ti];
            try {
                const Index lid = model.learner_index(outcome.decl.learner);
                const int id = static_cast<int>(lid);
                const BaseLearner& learner = model.learners[static_cast<std::size_t>(lid)];
                const bool selected =
                    std::find(sel.selected.begin(), sel.selected.end(), id) != sel.selected.end();
                if (!selected)
                    throw std::runtime_error("learner '" + outcome.decl.learner +
                                             "' was not selected; nothing to test");
                const Index block = design.block_of(id);
                const Index offset = design.offsets[static_cast<std::size_t>(block)];
                const Index width = design.widths[static_cast<std::size_t>(block)];

                if (cfg.method == RunConfig::Method::polyhedron && !poly) {
                    poly = build_gamma(make_certificate(sel.fit, model.learners, cfg.nu));
                }

                auto run_direction = [&](const Vector& v, std::uint64_t seed) {
                    TestSpec spec;
                    spec.mode = TestMode::direction;
                    spec.v = v;
                    spec.sigma2 = out.sigma2;
                    InferenceResult res;
                    if (cfg.method == RunConfig::Method::sampling) {
                        res = sample_target(*oracle, spec, model.y, cfg, seed);
                    } else {
                        const TruncationInterval tr =
                            truncation_limits(*poly, v, out.sigma2, model.y);
                        res.estimate = v.dot(model.y);
                        const double var = out.sigma2 * v.squaredNorm();
                        const double f =
                            trunc_gauss_cdf(res.estimate, 0.0, var, tr.lo, tr.up);
                        res.p_one_sided = 1.0 - f;
                        res.p_value = 2.0 * std::min(f, 1.0 - f);
                        std::tie(res.ci_lo, res.ci_hi) =
                            polyhedron_ci(*poly, v, out.sigma2, model.y, cfg.alpha);
                        res.bracket.lo = tr.lo;
                        res.bracket.up = tr.up;
                    }
                    return res;
                };

                switch (outcome.decl.kind) {
                case TargetDecl::Kind::coefficient: {
                    if (width != 1)
                        throw std::runtime_error("coefficient target needs a single-column learner");
                    const Vector v = test_vector_linear(design.x, offset);
                    const InferenceResult res =
                        run_direction(v, derive_seed(cfg.seed, 1000 + ti));
                    outcome.sampling = res;
                    outcome.estimate = res.estimate;
                    if (cfg.method == RunConfig::Method::polyhedron) {
                        outcome.p_polyhedron = res.p_value;
                        outcome.poly_ci_lo = res.ci_lo;
                        outcome.poly_ci_hi = res.ci_hi;
                        outcome.trunc_lo = res.bracket.lo;
                        outcome.trunc_up = res.bracket.up;
                    }
                    break;
                }
                case TargetDecl::Kind::pointwise: {
                    if (!learner.spline_block())
                        throw std::runtime_error("pointwise target needs a spline learner");
                    const SplineBlock& sb = *learner.spline_block();
                    for (std::size_t g = 0; g < outcome.decl.grid.size(); ++g) {
                        PointwiseRow row;
                        row.c = outcome.decl.grid[g];
                        try {
                            const RowVector basis_row = sb.design_row(row.c);
                            const Vector v =
                                smooth_pointwise_vector(design.x, offset, basis_row);
                            row.result = run_direction(
                                v, derive_seed(cfg.seed, 1000 + ti * 4096 + g));
                            row.ok = true;
                        } catch (const std::exception& e) {
                            row.error = e.what();
                        }
                        outcome.pointwise.push_back(std::move(row));
                    }
                    int failures = 0;
                    for (const auto& row : outcome.pointwise) failures += !row.ok;
                    if (failures > 0)
                        outcome.error = std::to_string(failures) + " of " +
                                        std::to_string(outcome.pointwise.size()) +
                                        " grid points failed";
                    break;
                }
                case TargetDecl::Kind::whole_function: {
                    if (cfg.method == RunConfig::Method::polyhedron)
                        throw std::runtime_error(
                            "whole-function tests need the sampling method");
                    TestSpec spec;
                    spec.mode = TestMode::group;
                    Matrix rest(design.x.rows(), design.x.cols() - width);
                    rest << design.x.leftCols(offset),
                        design.x.rightCols(design.x.cols() - offset - width);
                    spec.w = smooth_function_test_basis(
                        rest, design.x.middleCols(offset, width));
                    spec.sigma2 = out.sigma2;
                    const InferenceResult res = sample_target(
                        *oracle, spec, model.y, cfg, derive_seed(cfg.seed, 1000 + ti));
                    outcome.sampling = res;
                    outcome.estimate = res.estimate;
                    break;
                }
                }
                outcome.ok = outcome.error.empty();
            } catch (const std::exception& e) {
                outcome.ok = false;
                outcome.error = e.what();
            }
            out.targets.push_back(std::move(outcome));
        }
    }

    out.exit_code = 0;
    for (const auto& t : out.targets)
        if (!t.ok) out.exit_code = 2;
    out.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

namespace {

nlohmann::ordered_json json_number(double v) {
    if (std::isnan(v)) return nullptr;
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

nlohmann::ordered_json inference_json(const InferenceResult& res, bool sampling_method) {
    nlohmann::ordered_json j;
    j["estimate"] = json_number(res.estimate);
    j["p_value"] = json_number(res.p_value);
    j["p_one_sided"] = json_number(res.p_one_sided);
    j["ci_lo"] = json_number(res.ci_lo);
    j["ci_hi"] = json_number(res.ci_hi);
    if (sampling_method) {
        j["ess"] = json_number(res.ess);
        j["accepted"] = res.accepted;
        j["bracket_lo"] = json_number(res.bracket.lo);
        j["bracket_up"] = json_number(res.bracket.up);
        j["refits"] = res.refits;
        j["low_accuracy"] = res.low_accuracy;
    } else {
        j["trunc_lo"] = json_number(res.bracket.lo);
        j["trunc_up"] = json_number(res.bracket.up);
    }
    return j;
}

const char* kind_name(TargetDecl::Kind kind) {
    switch (kind) {
    case TargetDecl::Kind::coefficient: return "coefficient";
    case TargetDecl::Kind::pointwise: return "pointwise";
    case TargetDecl::Kind::whole_function: return "whole-function";
    }
    return "?";
}

} // namespace

nlohmann::ordered_json report_json(const RunOutput& out) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["config"] = write_config(out.cfg);

    nlohmann::ordered_json centering;
    centering["response_mean"] = out.centering.response_mean;
    nlohmann::ordered_json col_means = nlohmann::ordered_json::object();
    for (const auto& [name, m] : out.centering.column_means) col_means[name] = m;
    centering["column_means"] = col_means;
    j["centering"] = centering;

    nlohmann::ordered_json selection;
    selection["mstop"] = out.mstop;
    selection["selected"] = out.selected_names;
    nlohmann::ordered_json coefs = nlohmann::ordered_json::object();
    for (const auto& [name, c] : out.coefficients) coefs[name] = c;
    selection["coefficients"] = coefs;
    if (out.cv_risk) selection["cv_risk"] = *out.cv_risk;
    j["selection"] = selection;
    j["sigma2"] = out.sigma2;

    const bool sampling = out.cfg.method == RunConfig::Method::sampling;
    nlohmann::ordered_json targets = nlohmann::ordered_json::array();
    for (const auto& t : out.targets) {
        nlohmann::ordered_json tj;
        tj["learner"] = t.decl.learner;
        tj["kind"] = kind_name(t.decl.kind);
        tj["ok"] = t.ok;
        tj["error"] = t.error.empty() ? nlohmann::ordered_json(nullptr)
                                      : nlohmann::ordered_json(t.error);
        if (t.decl.kind == TargetDecl::Kind::pointwise) {
            nlohmann::ordered_json rows = nlohmann::ordered_json::array();
            for (const auto& row : t.pointwise) {
                nlohmann::ordered_json rj;
                rj["c"] = row.c;
                rj["ok"] = row.ok;
                rj["error"] = row.error.empty() ? nlohmann::ordered_json(nullptr)
                                                : nlohmann::ordered_json(row.error);
                if (row.ok) rj["inference"] = inference_json(row.result, sampling);
                rows.push_back(std::move(rj));
            }
            tj["points"] = rows;
        } else if (t.ok && t.sampling) {
            tj["inference"] = inference_json(*t.sampling, sampling);
        }
        targets.push_back(std::move(tj));
    }
    j["targets"] = targets;

    nlohmann::ordered_json timing;
    timing["wall_seconds"] = out.wall_seconds;
    j["timing"] = timing;
    return j;
}

namespace {

std::string fmt(double v, int prec = 5) {
    if (std::isnan(v)) return "-";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    return buf;
}

} // namespace

std::string report_text(const RunOutput& out) {
    std::ostringstream os;
    os << "selected (" << out.selected_names.size() << " of " << out.cfg.learners.size()
       << " learners), mstop = " << out.mstop << ":\n";
    for (const auto& name : out.selected_names) os << "  " << name << "\n";
    os << "sigma2 = " << fmt(out.sigma2) << "\n";
    if (out.targets.empty()) return os.str();

    os << "\n";
    char line[256];
    std::snprintf(line, sizeof(line), "%-18s %-14s %12s %12s %12s %12s %8s %9s\n", "target",
                  "kind", "estimate", "p_value", "ci_lo", "ci_hi", "ess", "accepted");
    os << line;
    auto emit = [&](const std::string& name, const std::string& kind, const InferenceResult& r,
                    bool with_mc) {
        std::snprintf(line, sizeof(line), "%-18s %-14s %12s %12s %12s %12s %8s %9s\n",
                      name.c_str(), kind.c_str(), fmt(r.estimate).c_str(), fmt(r.p_value).c_str(),
                      fmt(r.ci_lo).c_str(), fmt(r.ci_hi).c_str(),
                      with_mc ? fmt(r.ess, 4).c_str() : "-",
                      with_mc ? std::to_string(r.accepted).c_str() : "-");
        os << line;
    };
    const bool sampling = out.cfg.method == RunConfig::Method::sampling;
    for (const auto& t : out.targets) {
        if (!t.ok) {
            std::snprintf(line, sizeof(line), "%-18s %-14s ERROR: %s\n", t.decl.learner.c_str(),
                          kind_name(t.decl.kind), t.error.c_str());
            os << line;
            continue;
        }
        if (t.decl.kind == TargetDecl::Kind::pointwise) {
            for (const auto& row : t.pointwise)
                emit(t.decl.learner + "@" + fmt(row.c, 4), "pointwise", row.result, sampling);
        } else if (t.sampling) {
            emit(t.decl.learner, kind_name(t.decl.kind), *t.sampling, sampling);
        }
    }
    return os.str();
}

std::string effect_table_csv(const TargetOutcome& target) {
    std::ostringstream os;
    os << "c,estimate,ci_lo,ci_hi,p_value,ok,error\n";
    char buf[64];
    auto num = [&](double v) {
        if (std::isnan(v)) return std::string("nan");
        if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    for (const auto& row : target.pointwise) {
        os << num(row.c) << ',' << num(row.result.estimate) << ',' << num(row.result.ci_lo) << ','
           << num(row.result.ci_hi) << ',' << num(row.result.p_value) << ',' << int(row.ok) << ','
           << row.error << '\n';
    }
    return os.str();
}

} // namespace boostinf
