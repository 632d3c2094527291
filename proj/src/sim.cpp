#include "boostinf/sim.hpp"

#include "boostinf/normal.hpp"
#include "boostinf/parallel.hpp"
#include "boostinf/polyhedron.hpp"
#include "boostinf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace boostinf {

namespace {

double sample_sd(const Vector& x) {
    const double m = x.mean();
    return std::sqrt((x.array() - m).square().sum() / static_cast<double>(x.size() - 1));
}

Matrix random_normal_matrix(int n, int p, Rng& rng) {
    Matrix x(n, p);
    for (Index j = 0; j < p; ++j)
        for (Index i = 0; i < n; ++i)
            x(i, j) = rng.normal();
    return x;
}

} // namespace

GeneratedData gen_linear(const ScenarioConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const int p = cfg.n_learners();
    GeneratedData data;
    data.x = random_normal_matrix(cfg.n, p, rng);
    data.eta = Vector::Zero(cfg.n);
    for (std::size_t j = 0; j < cfg.beta.size(); ++j)
        data.eta += cfg.beta[j] * data.x.col(static_cast<Index>(j));
    data.sigma = sample_sd(data.eta) / cfg.snr;
    data.y = data.eta;
    for (Index i = 0; i < cfg.n; ++i) data.y(i) += data.sigma * rng.normal();
    data.y = centered(data.y);
    data.x = center_columns(data.x);
    return data;
}

GeneratedData gen_additive(const ScenarioConfig& cfg, std::uint64_t seed) {
    Rng rng(seed);
    const int p = cfg.n_learners();
    GeneratedData data;
    data.x = random_normal_matrix(cfg.n, p, rng);
    data.eta = Vector::Zero(cfg.n);
    for (Index i = 0; i < cfg.n; ++i)
        data.eta(i) = std::sin(2.0 * data.x(i, 0)) + 0.5 * data.x(i, 1) * data.x(i, 1);
    data.sigma = sample_sd(data.eta) / cfg.snr;
    data.y = data.eta;
    for (Index i = 0; i < cfg.n; ++i) data.y(i) += data.sigma * rng.normal();
    data.y = centered(data.y);
    // covariates stay raw: spline construction centers its own design block
    return data;
}

std::vector<BaseLearner> scenario_learners(const ScenarioConfig& cfg, const GeneratedData& data) {
    std::vector<BaseLearner> learners;
    learners.reserve(static_cast<std::size_t>(data.x.cols()));
    for (Index j = 0; j < data.x.cols(); ++j) {
        if (cfg.kind == ScenarioConfig::Kind::linear)
            learners.push_back(make_linear_learner(static_cast<int>(j), data.x.col(j)));
        else
            learners.push_back(make_spline_learner(static_cast<int>(j), data.x.col(j), cfg.spline,
                                                   Smoothing::for_df(cfg.spline_df)));
    }
    return learners;
}

double ks_uniform_distance(std::vector<double> pvalues) {
    if (pvalues.empty()) throw std::invalid_argument("ks_uniform_distance: empty sample");
    std::sort(pvalues.begin(), pvalues.end());
    const double n = static_cast<double>(pvalues.size());
    double d = 0.0;
    for (std::size_t i = 0; i < pvalues.size(); ++i) {
        const double hi = (static_cast<double>(i) + 1.0) / n - pvalues[i];
        const double lo = pvalues[i] - static_cast<double>(i) / n;
        d = std::max({d, hi, lo});
    }
    return d;
}

namespace {

struct ReplicationOutput {
    std::vector<HypothesisRecord> records;
};

ReplicationOutput run_replication(const ScenarioConfig& cfg, int rep) {
    ReplicationOutput out;
    const std::uint64_t rep_seed = derive_seed(cfg.base_seed, static_cast<std::uint64_t>(rep));
    const GeneratedData data = cfg.kind == ScenarioConfig::Kind::linear
                                   ? gen_linear(cfg, derive_seed(rep_seed, 0))
                                   : gen_additive(cfg, derive_seed(rep_seed, 0));
    const std::vector<BaseLearner> learners = scenario_learners(cfg, data);

    StoppingSpec stopping;
    if (cfg.stopping.kind == StoppingChoice::Kind::fixed_m) {
        stopping.kind = StoppingSpec::Kind::fixed_m;
        stopping.mstop = cfg.stopping.mstop;
    } else {
        stopping.kind = StoppingSpec::Kind::cv;
        stopping.grid_max = cfg.stopping.cv_grid_max;
        stopping.folds = assign_folds(cfg.n, cfg.stopping.cv_folds, derive_seed(rep_seed, 1));
    }

    const PipelineSelection sel = pipeline_select(data.y, learners, cfg.step_length, stopping);

    bool admissible = true;
    for (int j = 0; j < cfg.n_signal(); ++j)
        admissible = admissible &&
                     std::find(sel.selected.begin(), sel.selected.end(), j) != sel.selected.end();

    const double sigma2 = cfg.variance == VarianceMode::known
                              ? data.sigma * data.sigma
                              : estimate_sigma2(sel.fit, data.y, learners, cfg.variance);

    const SelectedDesign design = selected_design(learners, sel.selected);

    // the polyhedron conditions on the realized path; only defined for a
    // fixed iteration count
    std::optional<Polyhedron> poly;
    if (cfg.run_polyhedron && cfg.kind == ScenarioConfig::Kind::linear &&
        cfg.stopping.kind == StoppingChoice::Kind::fixed_m) {
        poly = build_gamma(make_certificate(sel.fit, learners, cfg.step_length));
    }

    const SetSelectionOracle oracle(learners, cfg.step_length, stopping, sel.selected);

    for (std::size_t b = 0; b < design.ids.size(); ++b) {
        const int id = design.ids[b];
        HypothesisRecord rec;
        rec.replication = rep;
        rec.learner_id = id;
        rec.mstop = sel.mstop;
        rec.signal = id < cfg.n_signal();
        rec.admissible = admissible;
        try {
            TestSpec spec;
            spec.sigma2 = sigma2;
            spec.null_value = 0.0;
            if (cfg.kind == ScenarioConfig::Kind::linear) {
                spec.mode = TestMode::direction;
                spec.v = test_vector_linear(design.x, design.offsets[b]);
                rec.truth = spec.v.dot(data.eta);
                rec.null_holds = std::abs(rec.truth) < 1e-8;
                rec.estimate = spec.v.dot(data.y);
                if (cfg.run_naive) {
                    const double z = rec.estimate /
                                     std::sqrt(sigma2 * spec.v.squaredNorm());
                    rec.p_naive = 2.0 * norm_cdf(-std::abs(z));
                }
                if (poly)
                    rec.p_polyhedron =
                        polyhedron_pvalue(*poly, spec.v, sigma2, data.y, 0.0);
            } else {
                spec.mode = TestMode::group;
                const Matrix block = design.x.middleCols(design.offsets[b], design.widths[b]);
                Matrix rest(design.x.rows(), design.x.cols() - design.widths[b]);
                rest << design.x.leftCols(design.offsets[b]),
                    design.x.rightCols(design.x.cols() - design.offsets[b] - design.widths[b]);
                spec.w = smooth_function_test_basis(rest, block);
                // inner-product truth is only pinned down under the null
                rec.truth = rec.signal ? std::numeric_limits<double>::quiet_NaN() : 0.0;
                rec.null_holds = !rec.signal;
                rec.estimate = (spec.w * (spec.w.transpose() * data.y)).norm();
            }
            if (cfg.run_sampling) {
                SamplerOptions opts;
                opts.num_samples = cfg.num_samples;
                opts.seed = derive_seed(rep_seed, 100 + static_cast<std::uint64_t>(id));
                opts.threads = 1;
                const InferenceResult res = run_inference(oracle, spec, data.y, opts, cfg.alpha);
                rec.p_sampling = res.p_value;
                rec.ci_lo = res.ci_lo;
                rec.ci_hi = res.ci_hi;
                rec.ci_infinite = std::isinf(res.ci_lo) || std::isinf(res.ci_hi);
                rec.ess = res.ess;
                rec.accepted = res.accepted;
            }
        } catch (const std::exception& e) {
            rec.error = e.what();
        }
        out.records.push_back(std::move(rec));
    }
    return out;
}

} // namespace

StudyAggregates compute_aggregates(const std::vector<HypothesisRecord>& records, double alpha) {
    StudyAggregates agg;
    std::vector<double> p_sampling, p_poly, p_naive;
    int covered_noise = 0, total_noise = 0, covered_signal = 0, total_signal = 0;
    int infinite_ci = 0, with_ci = 0;
    int max_rep = -1, n_adm = 0;
    std::vector<char> seen_adm;
    for (const auto& r : records) {
        max_rep = std::max(max_rep, r.replication);
        if (static_cast<std::size_t>(r.replication) >= seen_adm.size())
            seen_adm.resize(r.replication + 1, 0);
        if (r.admissible && r.error.empty()) seen_adm[r.replication] |= 1;
        if (!r.error.empty()) continue;
        if (r.admissible && r.null_holds && !r.signal) {
            if (std::isfinite(r.p_sampling)) p_sampling.push_back(r.p_sampling);
            if (std::isfinite(r.p_polyhedron)) p_poly.push_back(r.p_polyhedron);
            if (std::isfinite(r.p_naive)) p_naive.push_back(r.p_naive);
        }
        if (r.admissible && std::isfinite(r.p_sampling) && std::isfinite(r.truth) &&
            !std::isnan(r.ci_lo) && !std::isnan(r.ci_hi)) {
            const bool covers = (r.ci_lo <= r.truth) && (r.truth <= r.ci_hi);
            if (r.signal) {
                ++total_signal;
                covered_signal += covers;
            } else {
                ++total_noise;
                covered_noise += covers;
            }
            ++with_ci;
            infinite_ci += r.ci_infinite;
        }
    }
    for (char c : seen_adm) n_adm += c;
    agg.n_replications = max_rep + 1;
    agg.n_admissible = n_adm;
    agg.n_null_records = static_cast<int>(p_sampling.size());
    if (!p_sampling.empty()) {
        agg.ks_noise_sampling = ks_uniform_distance(p_sampling);
        int rejected = 0;
        for (double p : p_sampling) rejected += (p < alpha);
        agg.rejection_noise_sampling = static_cast<double>(rejected) /
                                       static_cast<double>(p_sampling.size());
    }
    if (!p_poly.empty()) agg.ks_noise_polyhedron = ks_uniform_distance(p_poly);
    if (!p_naive.empty()) agg.ks_noise_naive = ks_uniform_distance(p_naive);
    if (total_noise > 0)
        agg.coverage_noise = static_cast<double>(covered_noise) / static_cast<double>(total_noise);
    if (total_signal > 0)
        agg.coverage_signal =
            static_cast<double>(covered_signal) / static_cast<double>(total_signal);
    if (with_ci > 0)
        agg.infinite_ci_fraction = static_cast<double>(infinite_ci) / static_cast<double>(with_ci);
    return agg;
}

StudyResult run_study(const ScenarioConfig& cfg) {
    if (cfg.replications < 1) throw std::invalid_argument("run_study: need at least one replication");
    StudyResult study;
    study.cfg = cfg;

    std::vector<ReplicationOutput> outputs(cfg.replications);
    parallel_for(static_cast<std::size_t>(cfg.replications), cfg.threads, [&](std::size_t rep) {
        try {
            outputs[rep] = run_replication(cfg, static_cast<int>(rep));
        } catch (const std::exception& e) {
            // a replication-level failure becomes a single error record
            HypothesisRecord rec;
            rec.replication = static_cast<int>(rep);
            rec.learner_id = -1;
            rec.error = e.what();
            outputs[rep].records = {rec};
        }
    });
    for (auto& o : outputs)
        for (auto& r : o.records) study.records.push_back(std::move(r));
    study.aggregates = compute_aggregates(study.records, cfg.alpha);
    return study;
}

namespace {

std::string fmt_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

void write_records_csv(const StudyResult& study, std::ostream& os) {
    os << "replication,learner,mstop,signal,admissible,null_holds,truth,estimate,"
          "p_sampling,p_polyhedron,p_naive,ci_lo,ci_hi,ci_infinite,ess,accepted,error\n";
    for (const auto& r : study.records) {
        os << r.replication << ',' << r.learner_id << ',' << r.mstop << ',' << int(r.signal)
           << ',' << int(r.admissible) << ',' << int(r.null_holds) << ',' << fmt_double(r.truth)
           << ',' << fmt_double(r.estimate) << ',' << fmt_double(r.p_sampling) << ','
           << fmt_double(r.p_polyhedron) << ',' << fmt_double(r.p_naive) << ','
           << fmt_double(r.ci_lo) << ',' << fmt_double(r.ci_hi) << ',' << int(r.ci_infinite)
           << ',' << fmt_double(r.ess) << ',' << r.accepted << ',' << r.error << '\n';
    }
}

ScenarioConfig scenario_preset(const std::string& name) {
    ScenarioConfig cfg;
    if (name == "linear-n25-p8-snr1") {
        cfg.n = 25;
        cfg.p_noise = 4;
        cfg.snr = 1.0;
    } else if (name == "linear-n25-p26-snr1") {
        cfg.n = 25;
        cfg.p_noise = 22;
        cfg.snr = 1.0;
    } else if (name == "linear-n25-p26-snr4") {
        cfg.n = 25;
        cfg.p_noise = 22;
        cfg.snr = 4.0;
    } else if (name == "linear-n100-p26-snr1") {
        cfg.n = 100;
        cfg.p_noise = 22;
        cfg.snr = 1.0;
    } else if (name == "linear-n100-p26-snr4") {
        cfg.n = 100;
        cfg.p_noise = 22;
        cfg.snr = 4.0;
    } else if (name == "additive-n300") {
        cfg.kind = ScenarioConfig::Kind::additive;
        cfg.n = 300;
        cfg.p_noise = 13;
        cfg.snr = 0.5;
        cfg.stopping.mstop = 50;
        cfg.run_naive = false;
    } else {
        throw std::invalid_argument("unknown scenario preset: " + name);
    }
    cfg.stopping.kind = StoppingChoice::Kind::fixed_m;
    if (cfg.kind == ScenarioConfig::Kind::linear) cfg.stopping.mstop = 40;
    return cfg;
}

std::vector<std::string> scenario_preset_names() {
    return {"linear-n25-p8-snr1",   "linear-n25-p26-snr1", "linear-n25-p26-snr4",
            "linear-n100-p26-snr1", "linear-n100-p26-snr4", "additive-n300"};
}

} // namespace boostinf
