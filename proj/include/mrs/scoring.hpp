#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mrs/dataset.hpp"
#include "mrs/ghd.hpp"
#include "mrs/graph.hpp"
#include "mrs/skeleton.hpp"

namespace mrs {

// Governs the moments-ratio scores of step 2.
struct ScoreConfig {
    int r = 2;                     // moment order, >= 2
    std::int64_t n_min = 1;        // cell inclusion threshold
    double denom_epsilon = 1e-9;   // denominators at or below this drop the cell
    std::vector<GhdFamily> families;  // per node; empty means all Poisson

    enum class TieBreak { lowest_id, seeded_random };
    TieBreak tie_break = TieBreak::lowest_id;
    std::uint64_t tie_seed = 0;

    void validate() const;
    GhdFamily family_for(int node) const;
};

// Per-node family builders for the misspecification settings.
std::vector<GhdFamily> families_all_poisson(int p);
std::vector<GhdFamily> families_all_hyper_poisson(int p, double b);
// Plug-in b = sample variance / sample mean per column, clamped below at 1e-6.
std::vector<GhdFamily> families_auto_hyper_poisson(const Dataset& data);
double hyper_poisson_b_estimate(const std::vector<std::int64_t>& column);

// One cell of a conditional table: the configuration of the key columns,
// how many rows matched, and the power sums of the target column over them.
struct TableCell {
    std::vector<std::int64_t> key;
    std::int64_t count = 0;
    std::vector<double> power_sums;  // power_sums[k] = sum x^k, k = 0..r
};

// Grouped view of column j by the configurations of columns C, with cells
// under n_min already dropped. Cells are sorted by key, so downstream
// accumulation order is deterministic.
struct ConditionalTable {
    std::vector<int> key_columns;
    std::vector<TableCell> cells;
    std::int64_t total_kept = 0;  // sum of retained counts
};

ConditionalTable build_conditional_table(const Dataset& data, int j, const std::vector<int>& C,
                                         int r, std::int64_t n_min);

// c_r * m1^r - sum_{k=0}^{r-1} s(r,k) m_k for moments m_k = E(X^k), m_0 = 1.
double score_denominator(const GhdFamily& family, int r, const std::vector<double>& moments);

// E(X^r) over that denominator; +inf when the denominator is not positive
// enough. moments must run k = 0..r.
double score_from_moments(const GhdFamily& family, int r, const std::vector<double>& moments,
                          double denom_epsilon);

double marginal_score(const Dataset& data, int j, const ScoreConfig& cfg);

struct CellScoreResult {
    double score = 0.0;
    std::int64_t cells_used = 0;
};

// Weighted per-cell ratio over the conditional table of X_j given X_C;
// cells failing the denominator guard leave both the numerator and the
// weight normalization. +inf sentinel when nothing survives.
CellScoreResult conditional_score(const Dataset& data, int j, const std::vector<int>& C,
                                  const ScoreConfig& cfg);

// One row of the diagnostics trace: candidate node at ordering position m
// with its candidate parents and score.
struct ScoredCandidate {
    int position = 0;  // 1-based m
    int node = 0;
    std::vector<int> candidate_parents;
    double score = 0.0;
    std::int64_t cells_used = 0;
};

struct OrderingResult {
    Ordering ordering;
    std::vector<ScoredCandidate> trace;
};

// Step 2: positions filled by argmin of the scores, candidate parents taken
// as neighborhood intersected with placed nodes, last node by elimination.
// Candidates within a position are scored independently (parallel when
// threads > 1) and reduced deterministically.
OrderingResult estimate_ordering(const Dataset& data, const Skeleton& skeleton,
                                 const ScoreConfig& cfg, int threads = 1);

// Each skeleton edge directed from the earlier to the later node.
Dag orient_edges(const Skeleton& skeleton, const Ordering& ord);

struct LearnResult {
    Dag dag;
    Ordering ordering;
    Skeleton skeleton;
    std::vector<ScoredCandidate> trace;
};

LearnResult learn(const Dataset& data, const SkeletonSource& source, const ScoreConfig& cfg,
                  const Dag* true_dag = nullptr, int threads = 1);

// Overdispersion baseline: the same loop with the per-cell moments
// difference E((X)_2 | x) - E(X | x)^2 in place of the ratio.
Ordering ods_ordering(const Dataset& data, const Skeleton& skeleton, std::int64_t n_min,
                      int threads = 1);

// Trace CSV: "# families:" header comments, then one line per evaluated
// candidate: m,node,score,cells_used,candidate_parents (ids ';'-joined).
void write_trace_csv(const std::vector<ScoredCandidate>& trace, const ScoreConfig& cfg,
                     const std::string& path);

// Margin diagnostic: candidates that were passed over at their position even
// though their score sat within m_min of 1. The argmin is only trustworthy
// when every unplaced non-root keeps that margin, so hits flag positions
// where the ordering decision was thin.
struct MarginDiagnostic {
    int position = 0;
    int node = 0;
    double score = 0.0;
};
std::vector<MarginDiagnostic> margin_violations(const std::vector<ScoredCandidate>& trace,
                                                const Ordering& ordering, double m_min);

}  // namespace mrs
