#include "boostinf/sampler.hpp"

#include "boostinf/parallel.hpp"
#include "boostinf/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace boostinf {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594;

double log_target_density(double r, const SampleBatch& batch, double sigma2) {
    if (batch.dim == 1) // N(0, scale2)
        return -0.5 * (kLog2Pi + std::log(batch.scale2)) - r * r / (2.0 * batch.scale2);
    // sigma * chi_w on r > 0
    if (!(r > 0.0)) return -std::numeric_limits<double>::infinity();
    const double w = batch.dim;
    const double sigma = std::sqrt(sigma2);
    return (w - 1.0) * std::log(r / sigma) - r * r / (2.0 * sigma2) -
           (0.5 * w - 1.0) * 0.6931471805599453094172321 - std::lgamma(0.5 * w) -
           std::log(sigma);
}

} // namespace

SetSelectionOracle::SetSelectionOracle(std::vector<BaseLearner> learners, double step_length,
                                       StoppingSpec stopping, std::vector<int> reference)
    : learners_(std::move(learners)), step_length_(step_length), stopping_(std::move(stopping)),
      reference_(std::move(reference)) {
    std::sort(reference_.begin(), reference_.end());
    if (stopping_.kind == StoppingSpec::Kind::cv) {
        if (!stopping_.folds)
            throw std::invalid_argument("SetSelectionOracle: cv stopping requires fold assignment");
        cv_plan_.emplace(learners_, *stopping_.folds);
    }
}

std::vector<int> SetSelectionOracle::select(const Vector& y) const {
    BoostConfig cfg;
    cfg.step_length = step_length_;
    cfg.mstop = stopping_.kind == StoppingSpec::Kind::fixed_m
                    ? stopping_.mstop
                    : cv_plan_->run(y, step_length_, stopping_.grid_max).chosen_mstop;
    return boost_select(y, learners_, cfg);
}

bool SetSelectionOracle::congruent(const Vector& y) const {
    return select(y) == reference_;
}

Bracket line_search_bracket(const CongruencyOracle& oracle, const ProbeLine& line,
                            const TestSpec& spec, const SamplerOptions& opts) {
    if (!oracle.congruent(line.at(line.r_obs)))
        throw std::runtime_error("line_search_bracket: oracle not congruent at the observation");

    const double sigma_r = std::sqrt(spec.scale2());
    const double r_obs = line.r_obs;
    double hard_lo = r_obs - opts.hard_bound_sigmas * sigma_r;
    const double hard_up = r_obs + opts.hard_bound_sigmas * sigma_r;
    if (spec.mode == TestMode::group) hard_lo = 0.0;

    Bracket out;
    int refits = 1; // self-congruency probe above

    auto search_side = [&](double hard) -> std::pair<double, bool> {
        const int per_side = std::max(4, opts.search_budget / 2);
        auto probe = [&](double r) {
            ++refits;
            return oracle.congruent(line.at(r));
        };
        if (probe(hard)) return {hard, true}; // congruent out to the hard bound
        int used = 1;

        // inward scan: catches congruent regions away from r_obs
        const int n_scan = std::max(1, per_side / 2);
        double outer = hard;
        double inner = r_obs;
        for (int k = 1; k <= n_scan; ++k) {
            const double t = hard + (r_obs - hard) * static_cast<double>(k) /
                                        static_cast<double>(n_scan + 1);
            ++used;
            if (probe(t)) {
                inner = t;
                break;
            }
            outer = t;
        }
        // bisection: keep outer non-congruent, pull it toward the boundary
        for (; used < per_side; ++used) {
            const double mid = 0.5 * (outer + inner);
            if (probe(mid))
                inner = mid;
            else
                outer = mid;
        }
        return {outer, false};
    };

    auto [lo, lo_hard] = search_side(hard_lo);
    auto [up, up_hard] = search_side(hard_up);
    out.lo = lo;
    out.up = up;
    out.lo_at_hard_bound = lo_hard;
    out.up_at_hard_bound = up_hard;
    out.refits = refits;
    if (!(out.lo < r_obs && r_obs < out.up))
        throw std::runtime_error("line_search_bracket: degenerate bracket");
    return out;
}

SampleBatch draw_batch(const CongruencyOracle& oracle, const ProbeLine& line,
                       const TestSpec& spec, const Bracket& bracket,
                       const SamplerOptions& opts) {
    if (opts.num_samples < 1) throw std::invalid_argument("draw_batch: need B >= 1");
    if (!(bracket.lo < bracket.up)) throw std::invalid_argument("draw_batch: empty bracket");

    SampleBatch batch;
    batch.proposal = opts.proposal;
    batch.bracket = bracket;
    batch.r_obs = line.r_obs;
    batch.scale2 = spec.scale2();
    batch.dim = spec.dim();

    const int b_total = opts.num_samples;
    batch.draws.resize(b_total);
    batch.congruent.assign(b_total, 0);
    batch.log_weights.resize(b_total);

    const double sigma_r = std::sqrt(batch.scale2);
    const double log_unif = -std::log(bracket.width());
    for (int b = 0; b < b_total; ++b) {
        Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(b)));
        double r, log_prop;
        if (opts.proposal == Proposal::uniform_bracket) {
            r = bracket.lo + bracket.width() * rng.uniform01();
            log_prop = log_unif;
        } else {
            r = line.r_obs + sigma_r * rng.normal();
            log_prop = -0.5 * (kLog2Pi + std::log(batch.scale2)) -
                       (r - line.r_obs) * (r - line.r_obs) / (2.0 * batch.scale2);
        }
        batch.draws[b] = r;
        batch.log_weights[b] = log_target_density(r, batch, spec.sigma2) - log_prop;
    }

    parallel_for(static_cast<std::size_t>(b_total), opts.threads, [&](std::size_t b) {
        batch.congruent[b] = oracle.congruent(line.at(batch.draws[b])) ? 1 : 0;
    });

    if (batch.accepted() == 0)
        throw std::runtime_error("no accepted samples; increase B or widen search");
    return batch;
}

int SampleBatch::accepted() const {
    int n = 0;
    for (char c : congruent) n += c;
    return n;
}

std::vector<double> SampleBatch::weights() const {
    std::vector<double> w(log_weights.size());
    for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights[i]);
    return w;
}

double pvalue_hat(const SampleBatch& batch, double t) {
    // log terms: log w_b + r_b t / scale2, summed over congruent draws
    const double inv_scale2 = 1.0 / batch.scale2;
    double max_term = -std::numeric_limits<double>::infinity();
    std::vector<double> terms(batch.draws.size(),
                              -std::numeric_limits<double>::infinity());
    for (std::size_t b = 0; b < batch.draws.size(); ++b) {
        if (!batch.congruent[b]) continue;
        terms[b] = batch.log_weights[b] + batch.draws[b] * t * inv_scale2;
        max_term = std::max(max_term, terms[b]);
    }
    if (!std::isfinite(max_term))
        throw std::runtime_error("pvalue_hat: Monte Carlo degenerate (no usable weight)");
    double num = 0.0, den = 0.0;
    for (std::size_t b = 0; b < batch.draws.size(); ++b) {
        if (!batch.congruent[b]) continue;
        const double e = std::exp(terms[b] - max_term);
        den += e;
        if (batch.draws[b] > batch.r_obs) num += e;
    }
    if (!(den > 0.0))
        throw std::runtime_error("pvalue_hat: Monte Carlo degenerate (zero denominator)");
    return num / den;
}

double effective_sample_size(std::span<const double> weights) {
    double wmax = 0.0;
    for (double w : weights) {
        if (w < 0.0 || !std::isfinite(w))
            throw std::invalid_argument("effective_sample_size: weights must be finite and >= 0");
        wmax = std::max(wmax, w);
    }
    if (!(wmax > 0.0)) throw std::invalid_argument("effective_sample_size: all weights zero");
    double s = 0.0, s2 = 0.0;
    for (double w : weights) {
        const double v = w / wmax;
        s += v;
        s2 += v * v;
    }
    return s * s / s2;
}

namespace {

// same formula from log weights; immune to exp overflow
double ess_from_log(std::span<const double> log_weights) {
    double lmax = -std::numeric_limits<double>::infinity();
    for (double lw : log_weights) lmax = std::max(lmax, lw);
    if (!std::isfinite(lmax))
        throw std::invalid_argument("effective_sample_size: all weights zero");
    double s = 0.0, s2 = 0.0;
    for (double lw : log_weights) {
        const double v = std::exp(lw - lmax);
        s += v;
        s2 += v * v;
    }
    return s * s / s2;
}

} // namespace

std::pair<double, double> invert_ci(const SampleBatch& batch, const CiOptions& opts) {
    const double sigma_r = std::sqrt(batch.scale2);
    const double inf = std::numeric_limits<double>::infinity();

    // pvalue_hat is nondecreasing in rho on a fixed batch
    auto solve = [&](double target, bool lower_side) -> double {
        double left = batch.r_obs, right = batch.r_obs;
        bool have_left = false, have_right = false;
        for (double k = 1.0; k <= opts.max_expansion_sigmas; k *= 2.0) {
            if (!have_left) {
                left = batch.r_obs - k * sigma_r;
                have_left = pvalue_hat(batch, left) <= target;
            }
            if (!have_right) {
                right = batch.r_obs + k * sigma_r;
                have_right = pvalue_hat(batch, right) >= target;
            }
            if (have_left && have_right) break;
        }
        // a side that never crosses its target is reported infinite in the
        // side's own direction (conservative when the batch degenerates)
        if (!have_left || !have_right) return lower_side ? -inf : inf;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (left + right);
            const double p = pvalue_hat(batch, mid);
            if (std::abs(p - target) < opts.p_tol || right - left < 1e-6 * sigma_r)
                return mid;
            if (p < target)
                left = mid;
            else
                right = mid;
        }
        return 0.5 * (left + right);
    };

    const double lo = solve(0.5 * opts.alpha, true);
    const double hi = solve(1.0 - 0.5 * opts.alpha, false);
    return {lo, hi};
}

InferenceResult run_inference(const CongruencyOracle& oracle, const TestSpec& spec,
                              const Vector& y, const SamplerOptions& opts, double alpha) {
    const ProbeLine line = decompose(y, spec);
    InferenceResult out;
    out.estimate = line.r_obs;

    out.bracket = line_search_bracket(oracle, line, spec, opts);
    const SampleBatch batch = draw_batch(oracle, line, spec, out.bracket, opts);

    out.p_one_sided = pvalue_hat(batch, spec.null_value);
    out.p_value = spec.mode == TestMode::direction
                      ? 2.0 * std::min(out.p_one_sided, 1.0 - out.p_one_sided)
                      : out.p_one_sided;
    CiOptions ci;
    ci.alpha = alpha;
    std::tie(out.ci_lo, out.ci_hi) = invert_ci(batch, ci);
    out.ess = ess_from_log(batch.log_weights);
    out.accepted = batch.accepted();
    out.refits = out.bracket.refits + opts.num_samples;
    out.low_accuracy = out.accepted < opts.min_accepted;
    return out;
}

} // namespace boostinf
