#include "mrs/skeleton.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include <boost/math/special_functions/gamma.hpp>

#include "mrs/errors.hpp"
#include "mrs/rng.hpp"

namespace mrs {

void CiConfig::validate() const {
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("CiConfig: alpha in (0,1)");
    if (max_conditioning < 0) throw std::invalid_argument("CiConfig: max_conditioning >= 0");
    if (max_category < 1) throw std::invalid_argument("CiConfig: max_category >= 1");
}

namespace {

int collapse(std::int64_t v, int cap) {
    return static_cast<int>(std::min<std::int64_t>(v, cap));
}

struct StratumKeyHash {
    size_t operator()(const std::vector<int>& key) const {
        std::uint64_t h = 0x9e3779b97f4a7c15ull;
        for (int v : key) h = mix64(h ^ static_cast<std::uint64_t>(v));
        return static_cast<size_t>(h);
    }
};

}  // namespace

CiResult ci_test_g2(const Dataset& data, int i, int j, const std::vector<int>& S,
                    const CiConfig& cfg) {
    cfg.validate();
    if (i == j) throw std::invalid_argument("ci_test_g2: i == j");
    for (int s : S)
        if (s == i || s == j) throw std::invalid_argument("ci_test_g2: S overlaps {i,j}");
    if (static_cast<int>(S.size()) > cfg.max_conditioning)
        throw std::invalid_argument("ci_test_g2: |S| exceeds max_conditioning");

    const int cats = cfg.max_category + 1;
    const std::int64_t n = data.n();
    const auto& xi = data.values[i];
    const auto& xj = data.values[j];

    // One dense cats x cats table per stratum of X_S.
    std::unordered_map<std::vector<int>, std::vector<std::int64_t>, StratumKeyHash> strata;
    std::vector<int> key(S.size());
    for (std::int64_t row = 0; row < n; ++row) {
        for (size_t s = 0; s < S.size(); ++s) key[s] = collapse(data.values[S[s]][row], cfg.max_category);
        auto& table = strata[key];
        if (table.empty()) table.assign(static_cast<size_t>(cats) * cats, 0);
        table[static_cast<size_t>(collapse(xi[row], cfg.max_category)) * cats +
              collapse(xj[row], cfg.max_category)] += 1;
    }

    double g2 = 0.0;
    long long df = 0;
    std::vector<std::int64_t> row_margin(cats), col_margin(cats);
    for (const auto& [unused_key, table] : strata) {
        std::int64_t total = 0;
        std::fill(row_margin.begin(), row_margin.end(), 0);
        std::fill(col_margin.begin(), col_margin.end(), 0);
        for (int a = 0; a < cats; ++a)
            for (int b = 0; b < cats; ++b) {
                const std::int64_t o = table[static_cast<size_t>(a) * cats + b];
                row_margin[a] += o;
                col_margin[b] += o;
                total += o;
            }
        const int ri = static_cast<int>(std::count_if(row_margin.begin(), row_margin.end(),
                                                      [](std::int64_t m) { return m > 0; }));
        const int rj = static_cast<int>(std::count_if(col_margin.begin(), col_margin.end(),
                                                      [](std::int64_t m) { return m > 0; }));
        if (ri < 2 || rj < 2) continue;
        df += static_cast<long long>(ri - 1) * (rj - 1);
        for (int a = 0; a < cats; ++a) {
            if (row_margin[a] == 0) continue;
            for (int b = 0; b < cats; ++b) {
                const std::int64_t o = table[static_cast<size_t>(a) * cats + b];
                if (o == 0) continue;
                const double expected = static_cast<double>(row_margin[a]) * col_margin[b] / total;
                g2 += 2.0 * static_cast<double>(o) * std::log(static_cast<double>(o) / expected);
            }
        }
    }

    if (df == 0) throw DegenerateTableError("ci_test_g2: zero effective degrees of freedom");
    g2 = std::max(g2, 0.0);
    const double p = boost::math::gamma_q(0.5 * static_cast<double>(df), 0.5 * g2);
    return {g2, p};
}

namespace {

// True when some size-l subset of `pool` (lexicographic order) separates
// i and j at level alpha. Degenerate tables count as separation.
bool find_separating_subset(const Dataset& data, int i, int j, const std::vector<int>& pool,
                            int l, const CiConfig& cfg) {
    const int m = static_cast<int>(pool.size());
    if (l > m) return false;
    std::vector<int> idx(l);
    for (int k = 0; k < l; ++k) idx[k] = k;
    std::vector<int> subset(l);
    for (;;) {
        for (int k = 0; k < l; ++k) subset[k] = pool[idx[k]];
        try {
            if (ci_test_g2(data, i, j, subset, cfg).p_value > cfg.alpha) return true;
        } catch (const DegenerateTableError&) {
            return true;
        }
        int k = l - 1;
        while (k >= 0 && idx[k] == m - l + k) --k;
        if (k < 0) break;
        ++idx[k];
        for (int t = k + 1; t < l; ++t) idx[t] = idx[t - 1] + 1;
    }
    return false;
}

}  // namespace

Skeleton learn_skeleton(const Dataset& data, const CiConfig& cfg, int threads) {
    cfg.validate();
    data.validate();
    Skeleton skeleton = Skeleton::complete(data.p());

    for (int l = 0; l <= cfg.max_conditioning; ++l) {
        const std::vector<Edge> edges = skeleton.pairs();
        // Level-start adjacency; removals wait for the barrier below.
        std::vector<std::vector<int>> adj(data.p());
        for (int v = 0; v < data.p(); ++v) adj[v] = skeleton.neighbors(v);

        std::vector<char> remove(edges.size(), 0);
        const int edge_count = static_cast<int>(edges.size());
#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads)) if (threads > 1)
        for (int e = 0; e < edge_count; ++e) {
            const auto [a, b] = edges[e];
            // Conditioning pool: level-start neighbors of BOTH endpoints. For
            // count-DAG data a separator node sits on a dependence path, so it
            // shows marginal dependence with both ends; restricting to the
            // common neighborhood keeps the null-data false-edge rate at the
            // test level instead of letting spurious one-sided neighbors prune
            // level-0 survivors down to a fraction of alpha.
            std::vector<int> pool;
            std::set_intersection(adj[a].begin(), adj[a].end(), adj[b].begin(), adj[b].end(),
                                  std::back_inserter(pool));
            remove[e] = find_separating_subset(data, a, b, pool, l, cfg) ? 1 : 0;
        }
        for (int e = 0; e < edge_count; ++e)
            if (remove[e]) skeleton.remove_edge(edges[e].first, edges[e].second);

        bool any_pool_left = false;
        for (int v = 0; v < data.p() && !any_pool_left; ++v)
            if (static_cast<int>(skeleton.neighbors(v).size()) - 1 >= l + 1) any_pool_left = true;
        if (!any_pool_left) break;
    }
    return skeleton;
}

SkeletonSource SkeletonSource::oracle() {
    SkeletonSource s;
    s.mode = Mode::oracle;
    return s;
}

SkeletonSource SkeletonSource::file(std::string path) {
    SkeletonSource s;
    s.mode = Mode::file;
    s.path = std::move(path);
    return s;
}

SkeletonSource SkeletonSource::learned(CiConfig cfg) {
    SkeletonSource s;
    s.mode = Mode::learned;
    s.ci = cfg;
    return s;
}

Skeleton resolve_skeleton(const SkeletonSource& source, const Dataset& data, const Dag* true_dag,
                          int threads) {
    switch (source.mode) {
        case SkeletonSource::Mode::oracle:
            if (!true_dag) throw UsageError("oracle skeleton requested without a true graph");
            if (true_dag->node_count() != data.p())
                throw DataError("oracle graph node count does not match data");
            return skeleton_of(*true_dag);
        case SkeletonSource::Mode::file: {
            Skeleton s = read_skeleton_file(source.path);
            if (s.node_count() != data.p()) {
                if (s.node_count() > data.p())
                    throw DataError("skeleton file node count exceeds data columns");
                s = Skeleton::from_pairs(data.p(), s.pairs());
            }
            return s;
        }
        case SkeletonSource::Mode::learned:
            return learn_skeleton(data, source.ci, threads);
    }
    throw std::logic_error("resolve_skeleton: unreachable");
}

}  // namespace mrs
