#pragma once

#include <string>
#include <vector>

#include "mrs/dataset.hpp"
#include "mrs/graph.hpp"

namespace mrs {

// Settings for the built-in constraint-based skeleton learner.
struct CiConfig {
    double alpha = 0.05;       // significance level
    int max_conditioning = 2;  // largest conditioning set size
    int max_category = 10;     // counts above this collapse into one category

    void validate() const;
};

struct CiResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

// Likelihood-ratio (G^2) test of X_i independent of X_j given X_S on the
// stratified contingency table. Counts above max_category are pooled.
// Degrees of freedom accumulate (r_i - 1)(r_j - 1) per stratum from the
// nonzero margins; strata with fewer than two categories on either side are
// skipped. Throws DegenerateTableError when the total df is zero (callers
// treat that as independence).
CiResult ci_test_g2(const Dataset& data, int i, int j, const std::vector<int>& S,
                    const CiConfig& cfg);

// PC-style skeleton phase: start complete; for conditioning sizes
// l = 0..max_conditioning remove edge i-j whenever some size-l subset of the
// common level-start neighborhood of i and j gives p > alpha (degenerate
// tables count as independence). Subset enumeration is lexicographic and
// removals apply between levels, so the result is deterministic and edge
// tests within a level are independent.
Skeleton learn_skeleton(const Dataset& data, const CiConfig& cfg, int threads = 1);

// Where step 1 of the pipeline gets its neighborhood structure.
struct SkeletonSource {
    enum class Mode { oracle, file, learned } mode = Mode::learned;
    std::string path;  // file mode
    CiConfig ci;       // learned mode

    static SkeletonSource oracle();
    static SkeletonSource file(std::string path);
    static SkeletonSource learned(CiConfig cfg);
};

Skeleton resolve_skeleton(const SkeletonSource& source, const Dataset& data,
                          const Dag* true_dag = nullptr, int threads = 1);

}  // namespace mrs
