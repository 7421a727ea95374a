#include "mrs/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "mrs/errors.hpp"

namespace mrs::reference {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

SampleResult forward_sample(const GhdDagModel& model, std::int64_t n, std::uint64_t rng_seed,
                            double overflow_cap) {
    return mrs::forward_sample(model, n, rng_seed, overflow_cap, /*threads=*/1);
}

namespace {

double cell_ratio(const std::vector<double>& sums, std::int64_t count, double c_r, int r,
                  const std::vector<long long>& srow, double eps) {
    const double n = static_cast<double>(count);
    const double m1 = sums[1] / n;
    double den = c_r * pow_int(m1, r);
    for (int k = 1; k < r; ++k) den -= static_cast<double>(srow[k]) * (sums[k] / n);
    if (!(den > eps)) return kInf;
    return (sums[r] / n) / den;
}

}  // namespace

double marginal_score(const Dataset& data, int j, const ScoreConfig& cfg) {
    cfg.validate();
    const auto& col = data.values[j];
    std::vector<double> sums(cfg.r + 1, 0.0);
    for (std::int64_t v : col) {
        double xk = 1.0;
        for (int k = 0; k <= cfg.r; ++k) {
            sums[k] += xk;
            xk *= static_cast<double>(v);
        }
    }
    std::vector<double> moments(cfg.r + 1);
    for (int k = 0; k <= cfg.r; ++k) moments[k] = sums[k] / static_cast<double>(col.size());
    return score_from_moments(cfg.family_for(j), cfg.r, moments, cfg.denom_epsilon);
}

CellScoreResult conditional_score(const Dataset& data, int j, const std::vector<int>& C,
                                  const ScoreConfig& cfg) {
    cfg.validate();
    if (C.empty()) return {reference::marginal_score(data, j, cfg), 1};

    const std::int64_t n = data.n();
    // Distinct configurations in key order.
    std::map<std::vector<std::int64_t>, std::int64_t> counts;
    std::vector<std::int64_t> key(C.size());
    for (std::int64_t row = 0; row < n; ++row) {
        for (size_t s = 0; s < C.size(); ++s) key[s] = data.values[C[s]][row];
        counts[key] += 1;
    }

    const double c_r = cmr_coefficient(cfg.family_for(j), cfg.r);
    const auto& srow = stirling_first_row(cfg.r);

    double weighted = 0.0;
    std::int64_t kept = 0;
    std::int64_t cells_used = 0;
    for (const auto& [cell_key, count] : counts) {
        if (count < cfg.n_min) continue;
        std::vector<double> sums(cfg.r + 1, 0.0);
        for (std::int64_t row = 0; row < n; ++row) {
            bool match = true;
            for (size_t s = 0; s < C.size() && match; ++s)
                match = data.values[C[s]][row] == cell_key[s];
            if (!match) continue;
            double xk = 1.0;
            for (int k = 0; k <= cfg.r; ++k) {
                sums[k] += xk;
                xk *= static_cast<double>(data.values[j][row]);
            }
        }
        const double ratio = cell_ratio(sums, count, c_r, cfg.r, srow, cfg.denom_epsilon);
        if (ratio == kInf) continue;
        weighted += static_cast<double>(count) * ratio;
        kept += count;
        ++cells_used;
    }
    if (cells_used == 0) return {kInf, 0};
    return {weighted / static_cast<double>(kept), cells_used};
}

OrderingResult estimate_ordering(const Dataset& data, const Skeleton& skeleton,
                                 const ScoreConfig& cfg) {
    cfg.validate();
    const int p = data.p();
    if (skeleton.node_count() != p)
        throw std::invalid_argument("reference::estimate_ordering: node count mismatch");

    std::vector<int> identity(p);
    for (int i = 0; i < p; ++i) identity[i] = i;
    OrderingResult result{Ordering{identity}, {}};
    if (p == 1) return result;

    std::vector<char> placed(p, 0);
    std::vector<int> sequence;
    for (int m = 1; m <= p - 1; ++m) {
        int best_node = -1;
        double best_score = kInf;
        bool have_best = false;
        for (int j = 0; j < p; ++j) {
            if (placed[j]) continue;
            std::vector<int> parents;
            for (int v : skeleton.neighbors(j))
                if (placed[v]) parents.push_back(v);
            const CellScoreResult r = reference::conditional_score(data, j, parents, cfg);
            result.trace.push_back({m, j, parents, r.score, r.cells_used});
            const bool better = !have_best || r.score < best_score ||
                                (r.score == best_score && j < best_node);
            if (better) {
                best_node = j;
                best_score = r.score;
                have_best = true;
            }
        }
        placed[best_node] = 1;
        sequence.push_back(best_node);
    }
    for (int j = 0; j < p; ++j)
        if (!placed[j]) sequence.push_back(j);
    result.ordering = Ordering(sequence);
    return result;
}

Skeleton learn_skeleton(const Dataset& data, const CiConfig& cfg) {
    return mrs::learn_skeleton(data, cfg, /*threads=*/1);
}

}  // namespace mrs::reference
