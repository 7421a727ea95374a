// Times the OpenMP kernels against their single-threaded selves and the
// plain reference implementations, and checks that all three produce
// identical output.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "mrs/reference.hpp"
#include "mrs/sampler.hpp"
#include "mrs/scoring.hpp"
#include "mrs/skeleton.hpp"

using namespace mrs;

namespace {

int threads_available() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

double time_best_of(int reps, const std::function<void()>& fn) {
    fn();  // warmup
    double best = 1e300;
    for (int i = 0; i < reps; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        fn();
        best = std::min(best,
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
    }
    return best;
}

void report(const char* name, double reference, double serial, double parallel, bool equal) {
    std::printf("%-18s reference %7.3fs   serial %7.3fs   x%d threads %7.3fs (%.2fx)   outputs %s\n",
                name, reference, serial, threads_available(), parallel, serial / parallel,
                equal ? "identical" : "DIFFER");
}

}  // namespace

int main() {
    const int threads = threads_available();
    std::printf("kernel comparison: naive reference vs fast kernel at 1 and %d thread(s)\n\n",
                threads);
    int failures = 0;

    {   // forward sampling, rows in parallel (reference shares the kernel)
        const Dag dag = random_dag(30, 2, default_edge_probability(30, 2), 11);
        const GhdDagModel model = random_poisson_model(dag, 12);
        const std::int64_t n = 200000;
        SampleResult out_r, out_s, out_p;
        const double tr = time_best_of(3, [&] { out_r = reference::forward_sample(model, n, 7); });
        const double ts = time_best_of(3, [&] { out_s = forward_sample(model, n, 7, 1e9, 1); });
        const double tp = time_best_of(3, [&] { out_p = forward_sample(model, n, 7, 1e9, threads); });
        const bool equal = out_r.data.values == out_s.data.values &&
                           out_s.data.values == out_p.data.values;
        report("forward_sample", tr, ts, tp, equal);
        if (!equal) ++failures;
    }

    {   // skeleton learning, edge tests in parallel
        const Dag dag = random_dag(40, 2, default_edge_probability(40, 2), 21);
        const Dataset data = regenerate_until_valid(dag, ModelKind::poisson, 4000, 22).data;
        CiConfig ci;
        Skeleton out_r(1), out_s(1), out_p(1);
        const double tr = time_best_of(3, [&] { out_r = reference::learn_skeleton(data, ci); });
        const double ts = time_best_of(3, [&] { out_s = learn_skeleton(data, ci, 1); });
        const double tp = time_best_of(3, [&] { out_p = learn_skeleton(data, ci, threads); });
        const bool equal = out_r == out_s && out_s == out_p;
        report("learn_skeleton", tr, ts, tp, equal);
        if (!equal) ++failures;
    }

    {   // ordering estimation, candidate scores in parallel
        const Dag dag = random_dag(120, 2, default_edge_probability(120, 2), 31);
        const Dataset data = regenerate_until_valid(dag, ModelKind::poisson, 3000, 32).data;
        const Skeleton skeleton = skeleton_of(dag);
        ScoreConfig cfg;
        OrderingResult out_r{Ordering{{0}}, {}}, out_s{Ordering{{0}}, {}}, out_p{Ordering{{0}}, {}};
        const double tr =
            time_best_of(2, [&] { out_r = reference::estimate_ordering(data, skeleton, cfg); });
        const double ts = time_best_of(3, [&] { out_s = estimate_ordering(data, skeleton, cfg, 1); });
        const double tp =
            time_best_of(3, [&] { out_p = estimate_ordering(data, skeleton, cfg, threads); });
        bool equal = out_r.ordering.sequence == out_s.ordering.sequence &&
                     out_s.ordering.sequence == out_p.ordering.sequence &&
                     out_r.trace.size() == out_s.trace.size() &&
                     out_s.trace.size() == out_p.trace.size();
        for (size_t i = 0; equal && i < out_r.trace.size(); ++i)
            equal = out_r.trace[i].node == out_s.trace[i].node &&
                    out_r.trace[i].score == out_s.trace[i].score &&
                    out_s.trace[i].score == out_p.trace[i].score;
        report("estimate_ordering", tr, ts, tp, equal);
        if (!equal) ++failures;
    }

    if (failures) {
        std::printf("\n%d kernel(s) diverged\n", failures);
        return 1;
    }
    std::printf("\nall kernels match\n");
    return 0;
}
