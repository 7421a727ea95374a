#include "mrs/evaluation.hpp"

#include <stdexcept>

#include "mrs/scoring.hpp"

namespace mrs {

namespace {

EdgeMetrics make_metrics(int true_count, int est_count, int correct) {
    EdgeMetrics m;
    m.true_edge_count = true_count;
    m.estimated_edge_count = est_count;
    m.correct_count = correct;
    m.precision = est_count == 0 ? 1.0 : static_cast<double>(correct) / est_count;
    m.recall = true_count == 0 ? 1.0 : static_cast<double>(correct) / true_count;
    return m;
}

}  // namespace

EdgeMetrics dag_metrics(const Dag& true_dag, const Dag& est_dag) {
    if (true_dag.node_count() != est_dag.node_count())
        throw std::invalid_argument("dag_metrics: node count mismatch");
    int correct = 0;
    for (auto [s, d] : est_dag.edges())
        if (true_dag.has_edge(s, d)) ++correct;
    return make_metrics(true_dag.edge_count(), est_dag.edge_count(), correct);
}

EdgeMetrics mec_metrics(const Dag& true_dag, const Dag& est_dag) {
    if (true_dag.node_count() != est_dag.node_count())
        throw std::invalid_argument("mec_metrics: node count mismatch");
    const Cpdag truth = to_cpdag(true_dag);
    const Cpdag est = to_cpdag(est_dag);
    int correct = 0;
    for (auto [s, d] : est.directed)
        if (truth.has_directed(s, d)) ++correct;
    for (auto [a, b] : est.undirected)
        if (truth.has_undirected(a, b)) ++correct;
    const int est_count = static_cast<int>(est.directed.size() + est.undirected.size());
    const int true_count = static_cast<int>(truth.directed.size() + truth.undirected.size());
    return make_metrics(true_count, est_count, correct);
}

double ordering_precision(const Dag& true_dag, const Ordering& ord) {
    if (ord.size() != true_dag.node_count())
        throw std::invalid_argument("ordering_precision: size mismatch");
    return dag_metrics(true_dag, orient_edges(skeleton_of(true_dag), ord)).precision;
}

}  // namespace mrs
