#include "mrs/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "mrs/errors.hpp"
#include "mrs/rng.hpp"

namespace mrs {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void ScoreConfig::validate() const {
    if (r < 2) throw std::invalid_argument("ScoreConfig: r must be >= 2");
    if (n_min < 1) throw std::invalid_argument("ScoreConfig: n_min must be >= 1");
    if (denom_epsilon <= 0.0) throw std::invalid_argument("ScoreConfig: denom_epsilon > 0");
    for (const auto& f : families) f.validate();
}

GhdFamily ScoreConfig::family_for(int node) const {
    if (families.empty()) return GhdFamily::poisson();
    if (node < 0 || node >= static_cast<int>(families.size()))
        throw std::invalid_argument("ScoreConfig: no family for node " + std::to_string(node));
    return families[node];
}

std::vector<GhdFamily> families_all_poisson(int p) {
    return std::vector<GhdFamily>(p, GhdFamily::poisson());
}

std::vector<GhdFamily> families_all_hyper_poisson(int p, double b) {
    return std::vector<GhdFamily>(p, GhdFamily::hyper_poisson(b));
}

double hyper_poisson_b_estimate(const std::vector<std::int64_t>& column) {
    const double n = static_cast<double>(column.size());
    if (n < 1) return 1.0;
    double s1 = 0.0, s2 = 0.0;
    for (std::int64_t v : column) {
        s1 += static_cast<double>(v);
        s2 += static_cast<double>(v) * static_cast<double>(v);
    }
    const double mean = s1 / n;
    const double var = s2 / n - mean * mean;
    const double ratio = mean > 0.0 ? var / mean : 0.0;
    return std::max(ratio, 1e-6);
}

std::vector<GhdFamily> families_auto_hyper_poisson(const Dataset& data) {
    std::vector<GhdFamily> out;
    out.reserve(data.p());
    for (const auto& col : data.values)
        out.push_back(GhdFamily::hyper_poisson(hyper_poisson_b_estimate(col)));
    return out;
}

namespace {

constexpr int kMaxTableR = 8;

// Reusable grouping of one target column by the configurations of the key
// columns. Open addressing over mixed 64-bit hashes with the full keys kept
// in a flat arena; every buffer survives between scores, so a score costs one
// row scan and no allocation in the steady state. Cells accumulate in row
// order and are visited in key order, matching the obvious implementation
// bit for bit.
class CellTable {
  public:
    void build(const Dataset& data, int j, const std::vector<int>& C, int r) {
        klen_ = static_cast<int>(C.size());
        r_ = r;
        const std::int64_t n = data.n();
        cells_ = 0;
        key_arena_.clear();
        counts_.clear();
        sums_.clear();
        reserve_slots(static_cast<size_t>(n) * 2);

        const auto& xj = data.values[j];
        std::vector<std::int64_t>& key = key_buf_;
        key.resize(klen_);
        for (std::int64_t row = 0; row < n; ++row) {
            std::uint64_t h = 0x9e3779b97f4a7c15ull;
            for (int s = 0; s < klen_; ++s) {
                key[s] = data.values[C[s]][row];
                h = mix64(h ^ static_cast<std::uint64_t>(key[s]));
            }
            const int cell = find_or_insert(key, h);
            counts_[cell] += 1;
            double* sums = &sums_[static_cast<size_t>(cell) * (r_ + 1)];
            const double x = static_cast<double>(xj[row]);
            double xk = 1.0;
            for (int k = 0; k <= r_; ++k) {
                sums[k] += xk;
                xk *= x;
            }
        }

        order_.resize(cells_);
        for (int i = 0; i < cells_; ++i) order_[i] = i;
        std::sort(order_.begin(), order_.end(), [&](int a, int b) {
            const std::int64_t* ka = &key_arena_[static_cast<size_t>(a) * klen_];
            const std::int64_t* kb = &key_arena_[static_cast<size_t>(b) * klen_];
            return std::lexicographical_compare(ka, ka + klen_, kb, kb + klen_);
        });
    }

    // Visits cells in key order.
    template <class Fn>
    void for_each_sorted(Fn&& fn) const {
        for (int idx : order_) {
            fn(&key_arena_[static_cast<size_t>(idx) * klen_], counts_[idx],
               &sums_[static_cast<size_t>(idx) * (r_ + 1)]);
        }
    }

  private:
    int klen_ = 0;
    int r_ = 2;
    int cells_ = 0;
    std::vector<std::int64_t> key_arena_;
    std::vector<std::int64_t> counts_;
    std::vector<double> sums_;
    std::vector<int> order_;
    std::vector<std::int64_t> key_buf_;
    std::vector<std::uint64_t> slot_hash_;
    std::vector<int> slot_cell_;
    std::vector<std::uint64_t> slot_gen_;  // slot is live iff slot_gen_ == gen_
    std::uint64_t gen_ = 0;
    size_t mask_ = 0;

    // Generation stamps make stale slots look empty, so reuse does not pay an
    // O(capacity) clear per build.
    void reserve_slots(size_t want) {
        size_t cap = 64;
        while (cap < want) cap <<= 1;
        if (slot_hash_.size() < cap) {
            slot_hash_.assign(cap, 0);
            slot_cell_.assign(cap, 0);
            slot_gen_.assign(cap, 0);
            gen_ = 0;
        }
        ++gen_;
        mask_ = slot_hash_.size() - 1;
    }

    bool keys_equal(int cell, const std::vector<std::int64_t>& key) const {
        const std::int64_t* stored = &key_arena_[static_cast<size_t>(cell) * klen_];
        for (int s = 0; s < klen_; ++s)
            if (stored[s] != key[s]) return false;
        return true;
    }

    int find_or_insert(const std::vector<std::int64_t>& key, std::uint64_t h) {
        size_t slot = static_cast<size_t>(h) & mask_;
        for (;;) {
            if (slot_gen_[slot] != gen_) {
                slot_gen_[slot] = gen_;
                slot_hash_[slot] = h;
                slot_cell_[slot] = cells_;
                key_arena_.insert(key_arena_.end(), key.begin(), key.end());
                counts_.push_back(0);
                sums_.resize(sums_.size() + (r_ + 1), 0.0);
                return cells_++;
            }
            if (slot_hash_[slot] == h && keys_equal(slot_cell_[slot], key)) return slot_cell_[slot];
            slot = (slot + 1) & mask_;
        }
    }
};

CellTable& workspace_table() {
    thread_local CellTable table;
    return table;
}

}  // namespace

ConditionalTable build_conditional_table(const Dataset& data, int j, const std::vector<int>& C,
                                         int r, std::int64_t n_min) {
    if (r > kMaxTableR) throw std::invalid_argument("build_conditional_table: r too large");
    ConditionalTable table;
    table.key_columns = C;
    CellTable& cells = workspace_table();
    cells.build(data, j, C, r);
    cells.for_each_sorted([&](const std::int64_t* key, std::int64_t count, const double* sums) {
        if (count < n_min) return;
        TableCell cell;
        cell.key.assign(key, key + C.size());
        cell.count = count;
        cell.power_sums.assign(sums, sums + r + 1);
        table.total_kept += count;
        table.cells.push_back(std::move(cell));
    });
    return table;
}

double score_denominator(const GhdFamily& family, int r, const std::vector<double>& moments) {
    if (static_cast<int>(moments.size()) < r)
        throw std::invalid_argument("score_denominator: needs moments k = 0..r-1");
    const double c_r = cmr_coefficient(family, r);
    const auto& srow = stirling_first_row(r);
    double out = c_r * pow_int(moments[1], r);
    for (int k = 1; k < r; ++k)  // s(r,0) = 0 for r >= 1
        out -= static_cast<double>(srow[k]) * moments[k];
    return out;
}

double score_from_moments(const GhdFamily& family, int r, const std::vector<double>& moments,
                          double denom_epsilon) {
    if (static_cast<int>(moments.size()) < r + 1)
        throw std::invalid_argument("score_from_moments: needs moments k = 0..r");
    const double den = score_denominator(family, r, moments);
    if (!(den > denom_epsilon)) return kInf;
    return moments[r] / den;
}

namespace {

std::vector<double> column_moments(const std::vector<std::int64_t>& col, int r) {
    std::vector<double> sums(r + 1, 0.0);
    for (std::int64_t v : col) {
        const double x = static_cast<double>(v);
        double xk = 1.0;
        for (int k = 0; k <= r; ++k) {
            sums[k] += xk;
            xk *= x;
        }
    }
    const double n = static_cast<double>(col.size());
    for (double& s : sums) s /= n;
    return sums;
}

// Shared fast path: c_r and the Stirling row are hoisted out of the cell loop.
struct ScoreKernel {
    int r;
    double c_r;
    const std::vector<long long>* srow;
    double eps;

    double from_sums(const double* power_sums, std::int64_t count) const {
        const double n = static_cast<double>(count);
        const double m1 = power_sums[1] / n;
        double den = c_r * pow_int(m1, r);
        for (int k = 1; k < r; ++k) den -= static_cast<double>((*srow)[k]) * (power_sums[k] / n);
        if (!(den > eps)) return kInf;
        return (power_sums[r] / n) / den;
    }
};

ScoreKernel make_kernel(const GhdFamily& family, const ScoreConfig& cfg) {
    return {cfg.r, cmr_coefficient(family, cfg.r), &stirling_first_row(cfg.r), cfg.denom_epsilon};
}

}  // namespace

double marginal_score(const Dataset& data, int j, const ScoreConfig& cfg) {
    cfg.validate();
    if (data.values[j].empty()) throw std::invalid_argument("marginal_score: empty column");
    return score_from_moments(cfg.family_for(j), cfg.r, column_moments(data.values[j], cfg.r),
                              cfg.denom_epsilon);
}

namespace {

CellScoreResult conditional_score_with_kernel(const Dataset& data, int j,
                                              const std::vector<int>& C, std::int64_t n_min,
                                              const ScoreKernel& kernel) {
    CellTable& table = workspace_table();
    table.build(data, j, C, kernel.r);

    double weighted = 0.0;
    std::int64_t kept = 0;
    std::int64_t cells_used = 0;
    table.for_each_sorted([&](const std::int64_t*, std::int64_t count, const double* sums) {
        if (count < n_min) return;
        const double ratio = kernel.from_sums(sums, count);
        if (ratio == kInf) return;  // dropped from numerator and normalization
        weighted += static_cast<double>(count) * ratio;
        kept += count;
        ++cells_used;
    });
    if (cells_used == 0) return {kInf, 0};
    return {weighted / static_cast<double>(kept), cells_used};
}

double marginal_score_with_kernel(const Dataset& data, int j, const ScoreKernel& kernel) {
    const auto& col = data.values[j];
    std::vector<double> sums(kernel.r + 1, 0.0);
    for (std::int64_t v : col) {
        const double x = static_cast<double>(v);
        double xk = 1.0;
        for (int k = 0; k <= kernel.r; ++k) {
            sums[k] += xk;
            xk *= x;
        }
    }
    return kernel.from_sums(sums.data(), static_cast<std::int64_t>(col.size()));
}

}  // namespace

CellScoreResult conditional_score(const Dataset& data, int j, const std::vector<int>& C,
                                  const ScoreConfig& cfg) {
    cfg.validate();
    if (cfg.r > kMaxTableR) throw std::invalid_argument("conditional_score: r too large");
    if (C.empty()) return {marginal_score(data, j, cfg), 1};
    return conditional_score_with_kernel(data, j, C, cfg.n_min, make_kernel(cfg.family_for(j), cfg));
}

namespace {

struct Candidate {
    int node;
    std::vector<int> parents;
    double score;
    std::int64_t cells_used;
};

// argmin with the configured tie rule; sentinel scores lose to any finite one.
int pick_best(const std::vector<Candidate>& candidates, int count, const ScoreConfig& cfg) {
    int best = 0;
    auto key = [&](int node) {
        return cfg.tie_break == ScoreConfig::TieBreak::lowest_id
                   ? static_cast<std::uint64_t>(node)
                   : mix64(cfg.tie_seed ^ static_cast<std::uint64_t>(node));
    };
    for (int i = 1; i < count; ++i) {
        const auto& a = candidates[i];
        const auto& b = candidates[best];
        if (a.score < b.score || (a.score == b.score && key(a.node) < key(b.node))) best = i;
    }
    return best;
}

// The generic step-2 loop shared by the ratio scorer and the ODS baseline.
template <class ScoreFn>
OrderingResult ordering_loop(const Dataset& data, const Skeleton& skeleton, ScoreFn&& score_fn,
                             const ScoreConfig& cfg, int threads, bool want_trace) {
    const int p = data.p();
    if (skeleton.node_count() != p)
        throw std::invalid_argument("estimate_ordering: skeleton/data node count mismatch");

    OrderingResult result{Ordering{[&] {
                              std::vector<int> identity(p);
                              for (int i = 0; i < p; ++i) identity[i] = i;
                              return identity;
                          }()},
                          {}};
    if (p == 1) return result;

    std::vector<int> sequence;
    sequence.reserve(p);
    std::vector<char> placed(p, 0);
    if (want_trace) result.trace.reserve(static_cast<size_t>(p) * (p + 1) / 2);

    std::vector<Candidate> candidates(p);  // slots reused across positions
    for (int m = 1; m <= p - 1; ++m) {
        int count = 0;
        for (int j = 0; j < p; ++j) {
            if (placed[j]) continue;
            Candidate& c = candidates[count++];
            c.node = j;
            c.parents.clear();
            for (int v : skeleton.neighbors(j))
                if (placed[v]) c.parents.push_back(v);
        }

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, threads)) if (threads > 1)
        for (int i = 0; i < count; ++i) {
            auto [score, cells] = score_fn(candidates[i].node, candidates[i].parents);
            candidates[i].score = std::isnan(score) ? kInf : score;
            candidates[i].cells_used = cells;
        }

        if (want_trace)
            for (int i = 0; i < count; ++i) {
                const Candidate& c = candidates[i];
                result.trace.push_back({m, c.node, c.parents, c.score, c.cells_used});
            }

        const int chosen = pick_best(candidates, count, cfg);
        placed[candidates[chosen].node] = 1;
        sequence.push_back(candidates[chosen].node);
    }
    for (int j = 0; j < p; ++j)
        if (!placed[j]) sequence.push_back(j);

    result.ordering = Ordering(sequence);
    return result;
}

}  // namespace

OrderingResult estimate_ordering(const Dataset& data, const Skeleton& skeleton,
                                 const ScoreConfig& cfg, int threads) {
    cfg.validate();
    data.validate();
    if (cfg.r > kMaxTableR) throw std::invalid_argument("estimate_ordering: r too large");
    if (!cfg.families.empty() && static_cast<int>(cfg.families.size()) != data.p())
        throw std::invalid_argument("estimate_ordering: families size must match p");
    std::vector<ScoreKernel> kernels;
    kernels.reserve(data.p());
    for (int j = 0; j < data.p(); ++j) kernels.push_back(make_kernel(cfg.family_for(j), cfg));
    auto score_fn = [&](int node, const std::vector<int>& parents) {
        if (parents.empty())
            return std::pair<double, std::int64_t>{
                marginal_score_with_kernel(data, node, kernels[node]), 1};
        const CellScoreResult r =
            conditional_score_with_kernel(data, node, parents, cfg.n_min, kernels[node]);
        return std::pair<double, std::int64_t>{r.score, r.cells_used};
    };
    return ordering_loop(data, skeleton, score_fn, cfg, threads, /*want_trace=*/true);
}

Dag orient_edges(const Skeleton& skeleton, const Ordering& ord) {
    if (ord.size() != skeleton.node_count())
        throw std::invalid_argument("orient_edges: size mismatch");
    const std::vector<int> pos = ord.positions();
    std::vector<Edge> edges;
    edges.reserve(skeleton.pairs().size());
    for (auto [a, b] : skeleton.pairs()) {
        if (pos[a] < pos[b])
            edges.push_back({a, b});
        else
            edges.push_back({b, a});
    }
    return Dag::from_edges(skeleton.node_count(), edges);
}

LearnResult learn(const Dataset& data, const SkeletonSource& source, const ScoreConfig& cfg,
                  const Dag* true_dag, int threads) {
    Skeleton skeleton = resolve_skeleton(source, data, true_dag, threads);
    OrderingResult ordering = estimate_ordering(data, skeleton, cfg, threads);
    Dag dag = orient_edges(skeleton, ordering.ordering);
    return {std::move(dag), std::move(ordering.ordering), std::move(skeleton),
            std::move(ordering.trace)};
}

Ordering ods_ordering(const Dataset& data, const Skeleton& skeleton, std::int64_t n_min,
                      int threads) {
    data.validate();
    ScoreConfig cfg;  // tie handling shared with the ratio scorer
    cfg.n_min = n_min;

    auto difference = [](const double* power_sums, std::int64_t count) {
        const double n = static_cast<double>(count);
        const double m1 = power_sums[1] / n;
        const double m2 = power_sums[2] / n;
        return (m2 - m1) - m1 * m1;  // E((X)_2) - E(X)^2
    };

    auto score_fn = [&](int node, const std::vector<int>& parents) {
        if (parents.empty()) {
            const auto m = column_moments(data.values[node], 2);
            return std::pair<double, std::int64_t>{(m[2] - m[1]) - m[1] * m[1], 1};
        }
        CellTable& table = workspace_table();
        table.build(data, node, parents, 2);
        double weighted = 0.0;
        std::int64_t kept = 0;
        std::int64_t cells_used = 0;
        table.for_each_sorted([&](const std::int64_t*, std::int64_t count, const double* sums) {
            if (count < n_min) return;
            weighted += static_cast<double>(count) * difference(sums, count);
            kept += count;
            ++cells_used;
        });
        if (cells_used == 0) return std::pair<double, std::int64_t>{kInf, 0};
        return std::pair<double, std::int64_t>{weighted / static_cast<double>(kept), cells_used};
    };
    return ordering_loop(data, skeleton, score_fn, cfg, threads, /*want_trace=*/false).ordering;
}

void write_trace_csv(const std::vector<ScoredCandidate>& trace, const ScoreConfig& cfg,
                     const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write trace: " + path);
    out << "# r=" << cfg.r << " n_min=" << cfg.n_min << "\n";
    if (cfg.families.empty()) {
        out << "# families: all poisson\n";
    } else {
        out << "# families:";
        for (size_t j = 0; j < cfg.families.size(); ++j) {
            const auto& f = cfg.families[j];
            char buf[64];
            if (f.label == "hyper-poisson")
                std::snprintf(buf, sizeof(buf), " %zu=hyperpoisson(b=%.6g)", j, f.lower[0]);
            else if (f.label == "binomial")
                std::snprintf(buf, sizeof(buf), " %zu=binomial(N=%g)", j, -f.upper[0]);
            else if (f.label == "negative-binomial")
                std::snprintf(buf, sizeof(buf), " %zu=negbin(k=%.6g)", j, f.upper[0]);
            else
                std::snprintf(buf, sizeof(buf), " %zu=%s", j, f.label.c_str());
            out << buf;
        }
        out << "\n";
    }
    out << "m,node,score,cells_used,candidate_parents\n";
    char num[64];
    for (const auto& c : trace) {
        if (std::isinf(c.score))
            std::snprintf(num, sizeof(num), "inf");
        else
            std::snprintf(num, sizeof(num), "%.9g", c.score);
        out << c.position << "," << c.node << "," << num << "," << c.cells_used << ",";
        for (size_t i = 0; i < c.candidate_parents.size(); ++i)
            out << (i ? ";" : "") << c.candidate_parents[i];
        out << "\n";
    }
}

std::vector<MarginDiagnostic> margin_violations(const std::vector<ScoredCandidate>& trace,
                                                const Ordering& ordering, double m_min) {
    if (m_min <= 0.0) throw std::invalid_argument("margin_violations: m_min must be > 0");
    std::vector<MarginDiagnostic> out;
    for (const auto& c : trace) {
        if (c.position - 1 >= ordering.size()) continue;
        if (c.node == ordering.sequence[c.position - 1]) continue;  // the winner itself
        if (c.score < 1.0 + m_min) out.push_back({c.position, c.node, c.score});
    }
    return out;
}

}  // namespace mrs
