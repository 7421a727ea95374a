#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "mrs/dataset.hpp"
#include "mrs/ghd.hpp"
#include "mrs/graph.hpp"
#include "mrs/rng.hpp"

namespace mrs {

enum class LinkKind { log_rate, logit_probability };

// Parent values above this saturate inside damped links.
inline constexpr double kDampedTransferCeiling = 49.0;

// Conditional mechanism of one node: its family plus the link taking the
// parents' values to the family parameter. log_rate gives
// theta = exp(intercept + sum w_k t(x_k)); logit_probability gives the
// binomial success probability through the inverse logit of the same linear
// predictor. The transfer t is the identity for literal mechanisms; with
// damped_transfer set it is log1p(min(x, 49)), which keeps chains of
// positive weights from amplifying counts past any cap and keeps strongly
// negative weights from zeroing a column outright. The random generators use
// the damped transfer; hand-built mechanisms default to the literal one.
struct NodeMechanism {
    GhdFamily family;
    LinkKind link = LinkKind::log_rate;
    bool damped_transfer = false;
    double intercept = 0.0;
    std::vector<std::pair<int, double>> weights;  // (parent id, weight), sorted by id
    int binomial_trials = 0;                      // > 0 iff family is binomial
};

struct GhdDagModel {
    Dag dag;
    std::vector<NodeMechanism> mechanisms;  // indexed by node id

    // Checks that each mechanism's weight keys are exactly the node's parents.
    void validate() const;
};

enum class ModelKind { poisson, hybrid };

// All nodes Poisson with log-rate links; weights uniform on
// [-1.75,-0.25] u [0.25,1.75] (each side with probability 1/2), intercepts
// uniform on [1,3]. Deterministic in rng_seed.
GhdDagModel random_poisson_model(const Dag& dag, std::uint64_t rng_seed);

// Families cycle with the node's position in the canonical topological
// ordering: Poisson, Binomial(3), hyper-Poisson(2), Binomial(3), ...
// Weights uniform on [-1.2,-0.2], intercepts uniform on [1,3].
GhdDagModel random_hybrid_model(const Dag& dag, std::uint64_t rng_seed);

// Low-level count samplers. Poisson uses inversion below rate 30 and
// Hormann's PTRD transformed rejection above; hyper-Poisson walks its pmf
// (inverse CDF). All consume only the given stream.
std::int64_t sample_poisson(SplitMix64& rng, double rate);
std::int64_t sample_binomial(SplitMix64& rng, int trials, double prob);
// ok is cleared when the pmf walk exceeds its support budget.
std::int64_t sample_hyper_poisson(SplitMix64& rng, double theta, double b, bool* ok);

struct SampleResult {
    Dataset data;
    bool overflow = false;  // some rate exceeded overflow_cap; regenerate
};

// Forward sampling: rows are independent, each row uses the stream
// derive_stream(seed, row) and samples its nodes in canonical topological
// order. Rates above overflow_cap set the overflow flag and yield 0 for the
// affected cell, so the output bytes stay deterministic either way.
SampleResult forward_sample(const GhdDagModel& model, std::int64_t n, std::uint64_t rng_seed,
                            double overflow_cap = 1e9, int threads = 1);

struct ModelAndData {
    GhdDagModel model;
    Dataset data;
};

// Draw (model, dataset) pairs until no column is constant and nothing
// overflowed, advancing the seed per attempt. Throws ExhaustedRetriesError.
ModelAndData regenerate_until_valid(const Dag& dag, ModelKind kind, std::int64_t n,
                                    std::uint64_t rng_seed, int max_retries = 100,
                                    double overflow_cap = 1e9, int threads = 1);

}  // namespace mrs
