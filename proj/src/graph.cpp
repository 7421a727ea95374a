#include "mrs/graph.hpp"

#include <algorithm>
#include <fstream>
#include <queue>
#include <sstream>

#include "mrs/errors.hpp"
#include "mrs/rng.hpp"

namespace mrs {

Dag::Dag(int node_count) : p_(node_count) {
    if (node_count < 1) throw std::invalid_argument("Dag: node_count must be >= 1");
    parents_.resize(p_);
    children_.resize(p_);
}

void Dag::check_node(int j) const {
    if (j < 0 || j >= p_) throw std::invalid_argument("Dag: invalid node id " + std::to_string(j));
}

Dag Dag::from_edges(int node_count, const std::vector<Edge>& edges) {
    Dag dag(node_count);
    for (const auto& [src, dst] : edges) {
        dag.check_node(src);
        dag.check_node(dst);
        if (src == dst) throw std::invalid_argument("Dag: self-loop at node " + std::to_string(src));
        if (!dag.edge_set_.insert({src, dst}).second)
            throw std::invalid_argument("Dag: duplicate edge");
        dag.parents_[dst].push_back(src);
        dag.children_[src].push_back(dst);
    }
    for (auto& v : dag.parents_) std::sort(v.begin(), v.end());
    for (auto& v : dag.children_) std::sort(v.begin(), v.end());
    dag.edges_.assign(dag.edge_set_.begin(), dag.edge_set_.end());
    dag.canonical_topological_order();  // throws on cycles
    return dag;
}

bool Dag::has_edge(int src, int dst) const {
    return edge_set_.count({src, dst}) > 0;
}

const std::vector<int>& Dag::parents(int j) const {
    check_node(j);
    return parents_[j];
}

const std::vector<int>& Dag::children(int j) const {
    check_node(j);
    return children_[j];
}

std::vector<int> Dag::canonical_topological_order() const {
    std::vector<int> indegree(p_, 0);
    for (int j = 0; j < p_; ++j) indegree[j] = static_cast<int>(parents_[j].size());
    std::priority_queue<int, std::vector<int>, std::greater<>> ready;
    for (int j = 0; j < p_; ++j)
        if (indegree[j] == 0) ready.push(j);
    std::vector<int> order;
    order.reserve(p_);
    while (!ready.empty()) {
        const int j = ready.top();
        ready.pop();
        order.push_back(j);
        for (int c : children_[j])
            if (--indegree[c] == 0) ready.push(c);
    }
    if (static_cast<int>(order.size()) != p_)
        throw std::invalid_argument("Dag: edge set contains a directed cycle");
    return order;
}

Ordering::Ordering(std::vector<int> seq) : sequence(std::move(seq)) {
    std::vector<bool> seen(sequence.size(), false);
    for (int v : sequence) {
        if (v < 0 || v >= static_cast<int>(sequence.size()) || seen[v])
            throw std::invalid_argument("Ordering: sequence is not a permutation");
        seen[v] = true;
    }
}

std::vector<int> Ordering::positions() const {
    std::vector<int> pos(sequence.size());
    for (int i = 0; i < size(); ++i) pos[sequence[i]] = i;
    return pos;
}

Skeleton::Skeleton(int node_count) : p_(node_count) {
    if (node_count < 1) throw std::invalid_argument("Skeleton: node_count must be >= 1");
    adj_.resize(p_);
}

Skeleton Skeleton::from_pairs(int node_count, const std::vector<Edge>& pairs) {
    Skeleton s(node_count);
    for (auto [a, b] : pairs) {
        if (a > b) std::swap(a, b);
        if (a < 0 || b >= node_count)
            throw std::invalid_argument("Skeleton: invalid node id");
        if (a == b) throw std::invalid_argument("Skeleton: self-loop");
        s.pair_set_.insert({a, b});
    }
    s.pairs_.assign(s.pair_set_.begin(), s.pair_set_.end());
    s.rebuild_adj();
    return s;
}

Skeleton Skeleton::complete(int node_count) {
    std::vector<Edge> pairs;
    for (int a = 0; a < node_count; ++a)
        for (int b = a + 1; b < node_count; ++b) pairs.push_back({a, b});
    return from_pairs(node_count, pairs);
}

void Skeleton::rebuild_adj() {
    for (auto& v : adj_) v.clear();
    for (const auto& [a, b] : pairs_) {
        adj_[a].push_back(b);
        adj_[b].push_back(a);
    }
    for (auto& v : adj_) std::sort(v.begin(), v.end());
}

bool Skeleton::has_edge(int a, int b) const {
    if (a > b) std::swap(a, b);
    return pair_set_.count({a, b}) > 0;
}

const std::vector<int>& Skeleton::neighbors(int j) const {
    if (j < 0 || j >= p_) throw std::invalid_argument("Skeleton: invalid node id");
    return adj_[j];
}

void Skeleton::remove_edge(int a, int b) {
    if (a > b) std::swap(a, b);
    if (pair_set_.erase({a, b}) == 0) return;
    pairs_.assign(pair_set_.begin(), pair_set_.end());
    rebuild_adj();
}

bool Cpdag::has_directed(int src, int dst) const {
    return std::binary_search(directed.begin(), directed.end(), Edge{src, dst});
}

bool Cpdag::has_undirected(int a, int b) const {
    if (a > b) std::swap(a, b);
    return std::binary_search(undirected.begin(), undirected.end(), Edge{a, b});
}

Skeleton Cpdag::skeleton() const {
    std::vector<Edge> pairs = undirected;
    for (auto [s, d] : directed) pairs.push_back({std::min(s, d), std::max(s, d)});
    return Skeleton::from_pairs(node_count, pairs);
}

std::vector<int> parents(const Dag& dag, int j) { return dag.parents(j); }

bool topological_orderings_check(const Dag& dag, const Ordering& ord) {
    if (ord.size() != dag.node_count())
        throw std::invalid_argument("topological_orderings_check: size mismatch");
    const std::vector<int> pos = ord.positions();
    for (const auto& [src, dst] : dag.edges())
        if (pos[src] >= pos[dst]) return false;
    return true;
}

Skeleton skeleton_of(const Dag& dag) {
    std::vector<Edge> pairs;
    pairs.reserve(dag.edges().size());
    for (auto [s, d] : dag.edges()) pairs.push_back({std::min(s, d), std::max(s, d)});
    return Skeleton::from_pairs(dag.node_count(), pairs);
}

double default_edge_probability(int p, int max_indegree) {
    if (p <= 1) return 0.0;
    return std::min(1.0, 2.0 * max_indegree / static_cast<double>(p - 1));
}

Dag random_dag(int p, int max_indegree, double edge_probability, std::uint64_t rng_seed) {
    if (p < 1) throw std::invalid_argument("random_dag: p must be >= 1");
    if (max_indegree < 0) throw std::invalid_argument("random_dag: max_indegree must be >= 0");

    SplitMix64 rng(derive_stream(rng_seed));

    // Fisher-Yates permutation as the latent ordering.
    std::vector<int> order(p);
    for (int i = 0; i < p; ++i) order[i] = i;
    for (int i = p - 1; i > 0; --i) {
        const int k = static_cast<int>(uniform_int(rng, 0, i));
        std::swap(order[i], order[k]);
    }

    std::vector<Edge> edges;
    std::vector<int> proposed;
    for (int m = 1; m < p; ++m) {
        proposed.clear();
        for (int q = 0; q < m; ++q)
            if (uniform01(rng) < edge_probability) proposed.push_back(q);
        if (static_cast<int>(proposed.size()) > max_indegree) {
            // partial Fisher-Yates: keep a uniform subset of size max_indegree
            for (int i = 0; i < max_indegree; ++i) {
                const int k = static_cast<int>(
                    uniform_int(rng, i, static_cast<int>(proposed.size()) - 1));
                std::swap(proposed[i], proposed[k]);
            }
            proposed.resize(max_indegree);
        }
        for (int q : proposed) edges.push_back({order[q], order[m]});
    }
    return Dag::from_edges(p, edges);
}

namespace {

// Mutable partially directed graph used while compelling edges.
struct Pdag {
    int p;
    std::vector<std::vector<char>> dir;   // dir[a][b]: a -> b
    std::vector<std::vector<char>> und;   // und[a][b] == und[b][a]

    explicit Pdag(int node_count)
        : p(node_count),
          dir(node_count, std::vector<char>(node_count, 0)),
          und(node_count, std::vector<char>(node_count, 0)) {}

    bool adjacent(int a, int b) const { return dir[a][b] || dir[b][a] || und[a][b]; }

    bool orient(int a, int b) {
        if (!und[a][b]) return false;
        und[a][b] = und[b][a] = 0;
        dir[a][b] = 1;
        return true;
    }
};

// Meek rules 1-4, scanned in node-id order until no rule fires.
void meek_closure(Pdag& g) {
    bool changed = true;
    while (changed) {
        changed = false;
        for (int a = 0; a < g.p; ++a) {
            for (int b = 0; b < g.p; ++b) {
                if (!g.und[a][b]) continue;
                // R1: c -> a, a - b, c and b nonadjacent  =>  a -> b
                bool fire = false;
                for (int c = 0; c < g.p && !fire; ++c)
                    if (g.dir[c][a] && !g.adjacent(c, b)) fire = true;
                // R2: a -> c -> b and a - b  =>  a -> b
                for (int c = 0; c < g.p && !fire; ++c)
                    if (g.dir[a][c] && g.dir[c][b]) fire = true;
                // R3: a - c, a - d, c -> b, d -> b, c and d nonadjacent  =>  a -> b
                for (int c = 0; c < g.p && !fire; ++c) {
                    if (!(g.und[a][c] && g.dir[c][b])) continue;
                    for (int d = c + 1; d < g.p && !fire; ++d)
                        if (g.und[a][d] && g.dir[d][b] && !g.adjacent(c, d)) fire = true;
                }
                // R4: a - c, c -> d, d -> b, c and b nonadjacent, a and d adjacent  =>  a -> b
                for (int c = 0; c < g.p && !fire; ++c) {
                    if (!(g.und[a][c] && !g.adjacent(c, b))) continue;
                    for (int d = 0; d < g.p && !fire; ++d)
                        if (g.dir[c][d] && g.dir[d][b] && g.adjacent(a, d)) fire = true;
                }
                if (fire && g.orient(a, b)) changed = true;
            }
        }
    }
}

}  // namespace

Cpdag to_cpdag(const Dag& dag) {
    const int p = dag.node_count();
    Pdag g(p);
    for (auto [s, d] : dag.edges()) g.und[s][d] = g.und[d][s] = 1;

    // v-structures: a -> c <- b with a, b nonadjacent are compelled.
    for (int c = 0; c < p; ++c) {
        const auto& pa = dag.parents(c);
        for (size_t i = 0; i < pa.size(); ++i)
            for (size_t k = i + 1; k < pa.size(); ++k) {
                const int a = pa[i], b = pa[k];
                if (dag.has_edge(a, b) || dag.has_edge(b, a)) continue;
                g.orient(a, c);
                g.orient(b, c);
            }
    }
    meek_closure(g);

    Cpdag out;
    out.node_count = p;
    for (int a = 0; a < p; ++a)
        for (int b = 0; b < p; ++b) {
            if (g.dir[a][b]) out.directed.push_back({a, b});
            if (a < b && g.und[a][b]) out.undirected.push_back({a, b});
        }
    std::sort(out.directed.begin(), out.directed.end());
    return out;
}

namespace {

std::vector<Edge> read_edge_lines(const std::string& path, int* pinned_p) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open graph file: " + path);
    std::vector<Edge> edges;
    std::string line;
    int line_no = 0;
    *pinned_p = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        if (line[0] == '#') {
            int p = 0;
            if (std::sscanf(line.c_str(), "# p=%d", &p) == 1) *pinned_p = p;
            continue;
        }
        std::istringstream ls(line);
        long long src = -1, dst = -1;
        if (!(ls >> src >> dst) || src < 0 || dst < 0) {
            throw DataError(path + ":" + std::to_string(line_no) + ": expected 'src<TAB>dst'");
        }
        std::string trailing;
        if (ls >> trailing)
            throw DataError(path + ":" + std::to_string(line_no) + ": trailing content");
        edges.push_back({static_cast<int>(src), static_cast<int>(dst)});
    }
    return edges;
}

int resolve_node_count(const std::vector<Edge>& edges, int pinned_p, const std::string& path) {
    int max_id = -1;
    for (auto [s, d] : edges) max_id = std::max(max_id, std::max(s, d));
    if (pinned_p > 0) {
        if (max_id >= pinned_p)
            throw DataError(path + ": node id exceeds declared p=" + std::to_string(pinned_p));
        return pinned_p;
    }
    return max_id + 1 > 0 ? max_id + 1 : 1;
}

}  // namespace

Dag read_dag_file(const std::string& path) {
    int pinned_p = -1;
    const auto edges = read_edge_lines(path, &pinned_p);
    try {
        return Dag::from_edges(resolve_node_count(edges, pinned_p, path), edges);
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_dag_file(const Dag& dag, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write graph file: " + path);
    out << "# p=" << dag.node_count() << "\n";
    for (auto [s, d] : dag.edges()) out << s << "\t" << d << "\n";
}

Skeleton read_skeleton_file(const std::string& path) {
    int pinned_p = -1;
    const auto edges = read_edge_lines(path, &pinned_p);
    try {
        return Skeleton::from_pairs(resolve_node_count(edges, pinned_p, path), edges);
    } catch (const std::invalid_argument& e) {
        throw DataError(path + ": " + e.what());
    }
}

void write_skeleton_file(const Skeleton& skeleton, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write skeleton file: " + path);
    out << "# p=" << skeleton.node_count() << "\n";
    for (auto [a, b] : skeleton.pairs()) out << a << "\t" << b << "\n";
}

}  // namespace mrs
