#pragma once

#include "mrs/graph.hpp"

namespace mrs {

struct EdgeMetrics {
    double precision = 1.0;  // correct / estimated (1 when both empty)
    double recall = 1.0;     // correct / true (1 when no true edges)
    int true_edge_count = 0;
    int estimated_edge_count = 0;
    int correct_count = 0;
};

// Directed comparison: an estimated edge is correct iff the identical
// ordered pair is in the true DAG.
EdgeMetrics dag_metrics(const Dag& true_dag, const Dag& est_dag);

// Markov-equivalence comparison: both arguments become CPDAGs and an edge is
// correct iff the true CPDAG holds the same pair with the same orientation
// status (and direction, when directed).
EdgeMetrics mec_metrics(const Dag& true_dag, const Dag& est_dag);

// Precision of the true skeleton oriented by ord against the true DAG.
double ordering_precision(const Dag& true_dag, const Ordering& ord);

}  // namespace mrs
