#pragma once

#include <cstdint>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace mrs {

using Edge = std::pair<int, int>;

// Directed acyclic graph over dense node ids 0..p-1. Immutable after
// construction; construction verifies acyclicity, no self-loops and no
// duplicate edges.
class Dag {
  public:
    explicit Dag(int node_count);
    static Dag from_edges(int node_count, const std::vector<Edge>& edges);

    int node_count() const { return p_; }
    int edge_count() const { return static_cast<int>(edges_.size()); }
    bool has_edge(int src, int dst) const;
    const std::vector<int>& parents(int j) const;
    const std::vector<int>& children(int j) const;
    // Edges sorted by (src, dst).
    const std::vector<Edge>& edges() const { return edges_; }
    // Lexicographically smallest topological ordering.
    std::vector<int> canonical_topological_order() const;

    bool operator==(const Dag& other) const {
        return p_ == other.p_ && edges_ == other.edges_;
    }

  private:
    int p_ = 0;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> parents_;
    std::vector<std::vector<int>> children_;
    std::set<Edge> edge_set_;

    void check_node(int j) const;
};

// Permutation of 0..p-1; position i holds the i-th node of the ordering.
struct Ordering {
    std::vector<int> sequence;

    explicit Ordering(std::vector<int> seq);
    int size() const { return static_cast<int>(sequence.size()); }
    // positions()[node] = index of node within the sequence.
    std::vector<int> positions() const;
};

// Undirected edge structure; pairs stored with first < second.
class Skeleton {
  public:
    explicit Skeleton(int node_count);
    static Skeleton from_pairs(int node_count, const std::vector<Edge>& pairs);
    static Skeleton complete(int node_count);

    int node_count() const { return p_; }
    int edge_count() const { return static_cast<int>(pairs_.size()); }
    bool has_edge(int a, int b) const;
    const std::vector<int>& neighbors(int j) const;
    const std::vector<Edge>& pairs() const { return pairs_; }
    void remove_edge(int a, int b);

    bool operator==(const Skeleton& other) const {
        return p_ == other.p_ && pairs_ == other.pairs_;
    }

  private:
    int p_ = 0;
    std::vector<Edge> pairs_;             // sorted, first < second
    std::vector<std::vector<int>> adj_;   // sorted neighbor lists
    std::set<Edge> pair_set_;

    void rebuild_adj();
};

// Partially directed representative of a Markov equivalence class.
struct Cpdag {
    int node_count = 0;
    std::vector<Edge> directed;           // sorted
    std::vector<Edge> undirected;         // sorted, first < second

    bool has_directed(int src, int dst) const;
    bool has_undirected(int a, int b) const;
    // Underlying undirected structure of both edge sets.
    Skeleton skeleton() const;

    bool operator==(const Cpdag& other) const {
        return node_count == other.node_count && directed == other.directed &&
               undirected == other.undirected;
    }
};

std::vector<int> parents(const Dag& dag, int j);
bool topological_orderings_check(const Dag& dag, const Ordering& ord);
Skeleton skeleton_of(const Dag& dag);

// Random DAG: draw a uniform latent ordering, propose each predecessor as a
// parent with edge_probability, then cap the parent set at max_indegree by a
// uniform subset. Deterministic in rng_seed.
Dag random_dag(int p, int max_indegree, double edge_probability, std::uint64_t rng_seed);

// Default density used by the generators when none is given: expected
// indegree about d before capping.
double default_edge_probability(int p, int max_indegree);

// CPDAG of the Markov equivalence class of dag: v-structure edges directed,
// Meek rules 1-4 applied to closure, everything else undirected.
Cpdag to_cpdag(const Dag& dag);

// Edge-list file format: lines of "src<TAB>dst", 0-based ids, '#' comments
// and blank lines ignored; a leading "# p=N" comment pins the node count
// (otherwise max id + 1 is used). Skeleton files use src < dst.
Dag read_dag_file(const std::string& path);
void write_dag_file(const Dag& dag, const std::string& path);
Skeleton read_skeleton_file(const std::string& path);
void write_skeleton_file(const Skeleton& skeleton, const std::string& path);

}  // namespace mrs
