#pragma once

#include "mrs/dataset.hpp"
#include "mrs/sampler.hpp"
#include "mrs/scoring.hpp"
#include "mrs/skeleton.hpp"

// Straightforward single-threaded implementations of the parallel kernels.
// They trade speed for obviousness and exist so the fast paths have an
// in-repo twin to be checked against (tests assert identical output) and a
// baseline for the comparison benchmark.
namespace mrs::reference {

// Row-by-row sampling with the same stream derivation as the parallel kernel.
SampleResult forward_sample(const GhdDagModel& model, std::int64_t n, std::uint64_t rng_seed,
                            double overflow_cap = 1e9);

// Scores one candidate by materializing each cell with a fresh scan.
double marginal_score(const Dataset& data, int j, const ScoreConfig& cfg);
CellScoreResult conditional_score(const Dataset& data, int j, const std::vector<int>& C,
                                  const ScoreConfig& cfg);

// The step-2 loop with the reference scorer, serial.
OrderingResult estimate_ordering(const Dataset& data, const Skeleton& skeleton,
                                 const ScoreConfig& cfg);

// Edge-by-edge PC level sweep, serial.
Skeleton learn_skeleton(const Dataset& data, const CiConfig& cfg);

}  // namespace mrs::reference
