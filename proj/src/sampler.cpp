#include "mrs/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mrs/errors.hpp"

namespace mrs {

void GhdDagModel::validate() const {
    if (static_cast<int>(mechanisms.size()) != dag.node_count())
        throw std::invalid_argument("GhdDagModel: one mechanism per node required");
    for (int j = 0; j < dag.node_count(); ++j) {
        const auto& pa = dag.parents(j);
        const auto& mech = mechanisms[j];
        if (mech.weights.size() != pa.size())
            throw std::invalid_argument("GhdDagModel: weight keys do not match parents of node " +
                                        std::to_string(j));
        for (size_t i = 0; i < mech.weights.size(); ++i)
            if (mech.weights[i].first != pa[i])
                throw std::invalid_argument("GhdDagModel: weight keys do not match parents of node " +
                                            std::to_string(j));
        // samplers exist for Poisson, hyper-Poisson and binomial only, and
        // the link must match the family
        const bool is_binomial = mech.binomial_trials > 0;
        if (is_binomial != (mech.link == LinkKind::logit_probability))
            throw std::invalid_argument("GhdDagModel: logit link is for binomial nodes, node " +
                                        std::to_string(j));
        if (!is_binomial) {
            const bool poisson = mech.family.upper.empty() && mech.family.lower.empty();
            const bool hyper = mech.family.upper == std::vector<double>{1.0} &&
                               mech.family.lower.size() == 1;
            if (!poisson && !hyper)
                throw std::invalid_argument("GhdDagModel: no sampler for the family of node " +
                                            std::to_string(j));
        }
    }
}

namespace {

// Weight in [-1.75,-0.25] u [0.25,1.75], each interval with probability 1/2.
double draw_two_sided_weight(SplitMix64& rng) {
    const double magnitude = uniform_real(rng, 0.25, 1.75);
    return (rng() & 1u) ? magnitude : -magnitude;
}

GhdDagModel make_model(const Dag& dag, std::uint64_t seed, bool hybrid) {
    SplitMix64 rng(derive_stream(seed));
    GhdDagModel model{dag, {}};
    model.mechanisms.resize(dag.node_count());

    std::vector<int> position(dag.node_count(), 0);
    if (hybrid) {
        const auto order = dag.canonical_topological_order();
        for (int m = 0; m < dag.node_count(); ++m) position[order[m]] = m;
    }

    for (int j = 0; j < dag.node_count(); ++j) {
        NodeMechanism& mech = model.mechanisms[j];
        if (hybrid) {
            switch (position[j] % 4) {
                case 0: mech.family = GhdFamily::poisson(); break;
                case 1:
                case 3:
                    mech.family = GhdFamily::binomial(3);
                    mech.binomial_trials = 3;
                    break;
                case 2: mech.family = GhdFamily::hyper_poisson(2.0); break;
            }
            mech.link = mech.binomial_trials > 0 ? LinkKind::logit_probability : LinkKind::log_rate;
        } else {
            mech.family = GhdFamily::poisson();
            mech.link = LinkKind::log_rate;
        }
        mech.damped_transfer = true;
        mech.intercept = uniform_real(rng, 1.0, 3.0);
        for (int parent : dag.parents(j)) {
            const double w = hybrid ? uniform_real(rng, -1.2, -0.2) : draw_two_sided_weight(rng);
            mech.weights.push_back({parent, w});
        }
    }
    model.validate();
    return model;
}

}  // namespace

GhdDagModel random_poisson_model(const Dag& dag, std::uint64_t rng_seed) {
    return make_model(dag, rng_seed, false);
}

GhdDagModel random_hybrid_model(const Dag& dag, std::uint64_t rng_seed) {
    return make_model(dag, rng_seed, true);
}

namespace {

std::int64_t poisson_inversion(SplitMix64& rng, double rate) {
    const double p0 = std::exp(-rate);
    double u = uniform01(rng);
    double p = p0;
    std::int64_t x = 0;
    while (u > p && x < 2000) {
        u -= p;
        ++x;
        p *= rate / static_cast<double>(x);
    }
    return x;
}

// PTRD transformed rejection (Hormann 1993), valid for rate >= 10.
std::int64_t poisson_ptrd(SplitMix64& rng, double rate) {
    const double smu = std::sqrt(rate);
    const double b = 0.931 + 2.53 * smu;
    const double a = -0.059 + 0.02483 * b;
    const double inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
    const double v_r = 0.9277 - 3.6224 / (b - 2.0);

    for (;;) {
        const double u = uniform01(rng) - 0.5;
        const double v = uniform01(rng);
        const double us = 0.5 - std::abs(u);
        const double kf = std::floor((2.0 * a / us + b) * u + rate + 0.43);
        if (us >= 0.07 && v <= v_r) return static_cast<std::int64_t>(kf);
        if (kf < 0.0 || (us < 0.013 && v > us)) continue;
        const double k = kf;
        const double lhs = std::log(v * inv_alpha / (a / (us * us) + b));
        const double rhs = k * std::log(rate) - rate - std::lgamma(k + 1.0);
        if (lhs <= rhs) return static_cast<std::int64_t>(kf);
    }
}

}  // namespace

std::int64_t sample_poisson(SplitMix64& rng, double rate) {
    if (rate < 0.0 || !std::isfinite(rate))
        throw std::invalid_argument("sample_poisson: bad rate");
    if (rate == 0.0) return 0;
    if (rate < 30.0) return poisson_inversion(rng, rate);
    return poisson_ptrd(rng, rate);
}

std::int64_t sample_binomial(SplitMix64& rng, int trials, double prob) {
    if (trials < 0 || prob < 0.0 || prob > 1.0)
        throw std::invalid_argument("sample_binomial: bad parameters");
    std::int64_t x = 0;
    for (int i = 0; i < trials; ++i)
        if (uniform01(rng) < prob) ++x;
    return x;
}

std::int64_t sample_hyper_poisson(SplitMix64& rng, double theta, double b, bool* ok) {
    if (ok) *ok = true;
    if (theta < 0.0 || !std::isfinite(theta))
        throw std::invalid_argument("sample_hyper_poisson: bad theta");
    if (theta == 0.0) return 0;
    const GhdFamily family = GhdFamily::hyper_poisson(b);
    const double u = uniform01(rng);
    // Inverse CDF over the pmf, clamped once the cumulative mass is within
    // 1e-12 of one or the tail has numerically died (a draw landing in that
    // sliver takes the last support point). The walk budget flags runaway
    // theta instead of spinning.
    constexpr std::int64_t kMaxSupport = 1000000;
    double cum = 0.0;
    for (std::int64_t x = 0; x < kMaxSupport; ++x) {
        const double p = ghd_pmf(family, theta, x);
        cum += p;
        if (u < cum || cum >= 1.0 - 1e-12) return x;
        if (p <= 1e-17 && cum > 0.5) return x;  // exhausted tail
    }
    if (ok) *ok = false;
    return 0;
}

namespace {

struct RowWorkspace {
    std::vector<std::int64_t> values;
};

// Samples one row into ws.values (indexed by node id). Returns false when a
// rate overflowed; overflowed cells hold 0.
bool sample_row(const GhdDagModel& model, const std::vector<int>& topo, std::uint64_t seed,
                std::int64_t row, double overflow_cap, RowWorkspace& ws) {
    SplitMix64 rng(derive_stream(seed, static_cast<std::uint64_t>(row)));
    bool ok = true;
    const double log_cap = std::log(std::max(overflow_cap, 1e-300));
    for (int node : topo) {
        const NodeMechanism& mech = model.mechanisms[node];
        double eta = mech.intercept;
        for (const auto& [parent, w] : mech.weights) {
            const double x = static_cast<double>(ws.values[parent]);
            eta += w * (mech.damped_transfer ? std::log1p(std::min(x, kDampedTransferCeiling)) : x);
        }
        std::int64_t value = 0;
        if (mech.link == LinkKind::logit_probability) {
            const double prob = 1.0 / (1.0 + std::exp(-eta));
            value = sample_binomial(rng, mech.binomial_trials, prob);
        } else if (overflow_cap <= 0.0 || eta > log_cap) {
            ok = false;
        } else {
            const double theta = std::exp(eta);
            if (mech.family.lower.empty()) {
                value = sample_poisson(rng, theta);
            } else {
                bool draw_ok = true;
                value = sample_hyper_poisson(rng, theta, mech.family.lower[0], &draw_ok);
                if (!draw_ok) {
                    ok = false;
                    value = 0;
                }
            }
        }
        ws.values[node] = value;
    }
    return ok;
}

}  // namespace

SampleResult forward_sample(const GhdDagModel& model, std::int64_t n, std::uint64_t rng_seed,
                            double overflow_cap, int threads) {
    if (n < 1) throw std::invalid_argument("forward_sample: n must be >= 1");
    model.validate();
    const int p = model.dag.node_count();
    const auto topo = model.dag.canonical_topological_order();

    SampleResult result;
    result.data.columns.resize(p);
    for (int j = 0; j < p; ++j) result.data.columns[j] = "X" + std::to_string(j);
    result.data.values.assign(p, std::vector<std::int64_t>(n, 0));

    bool overflow = false;
#pragma omp parallel num_threads(std::max(1, threads)) if (threads > 1)
    {
        RowWorkspace ws;
        ws.values.assign(p, 0);
#pragma omp for schedule(static) reduction(|| : overflow)
        for (std::int64_t i = 0; i < n; ++i) {
            const bool ok = sample_row(model, topo, rng_seed, i, overflow_cap, ws);
            overflow = overflow || !ok;
            for (int j = 0; j < p; ++j) result.data.values[j][i] = ws.values[j];
        }
    }
    result.overflow = overflow;
    return result;
}

ModelAndData regenerate_until_valid(const Dag& dag, ModelKind kind, std::int64_t n,
                                    std::uint64_t rng_seed, int max_retries, double overflow_cap,
                                    int threads) {
    if (max_retries < 1) throw std::invalid_argument("regenerate_until_valid: max_retries >= 1");
    for (int attempt = 0; attempt < max_retries; ++attempt) {
        const std::uint64_t model_seed = derive_stream(rng_seed, 2ull * attempt);
        const std::uint64_t data_seed = derive_stream(rng_seed, 2ull * attempt + 1);
        GhdDagModel model = kind == ModelKind::poisson ? random_poisson_model(dag, model_seed)
                                                       : random_hybrid_model(dag, model_seed);
        SampleResult sample = forward_sample(model, n, data_seed, overflow_cap, threads);
        if (sample.overflow) continue;
        bool constant_column = false;
        for (const auto& col : sample.data.values) {
            const auto [lo, hi] = std::minmax_element(col.begin(), col.end());
            if (*lo == *hi) {
                constant_column = true;
                break;
            }
        }
        if (constant_column) continue;
        return {std::move(model), std::move(sample.data)};
    }
    throw ExhaustedRetriesError("regenerate_until_valid: no valid draw in " +
                                std::to_string(max_retries) + " attempts");
}

}  // namespace mrs
