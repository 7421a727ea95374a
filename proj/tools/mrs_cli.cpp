#include <cinttypes>
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrs/dataset.hpp"
#include "mrs/errors.hpp"
#include "mrs/evaluation.hpp"
#include "mrs/experiments.hpp"
#include "mrs/graph.hpp"
#include "mrs/sampler.hpp"
#include "mrs/scoring.hpp"
#include "mrs/skeleton.hpp"

namespace {

using namespace mrs;

struct GenerateArgs {
    std::string model = "poisson";
    int p = 20;
    int d = 2;
    std::int64_t n = 1000;
    std::uint64_t seed = 0;
    double edge_prob = -1.0;  // < 0: derived from p and d
    double overflow_cap = 1e9;
    int max_retries = 100;
    int jobs = 1;
    std::string out_data;
    std::string out_graph;
};

int cmd_generate(const GenerateArgs& args) {
    const ModelKind kind = args.model == "hybrid" ? ModelKind::hybrid : ModelKind::poisson;
    const double prob =
        args.edge_prob >= 0.0 ? args.edge_prob : default_edge_probability(args.p, args.d);
    const Dag dag = random_dag(args.p, args.d, prob, derive_stream(args.seed, 0));
    const ModelAndData gen = regenerate_until_valid(dag, kind, args.n, derive_stream(args.seed, 1),
                                                    args.max_retries, args.overflow_cap, args.jobs);
    write_dataset_csv(gen.data, args.out_data);
    write_dag_file(dag, args.out_graph);
    std::printf("generated p=%d n=%" PRId64 " edges=%d -> %s, %s\n", args.p, args.n,
                dag.edge_count(), args.out_data.c_str(), args.out_graph.c_str());
    return 0;
}

struct LearnArgs {
    std::string data_path;
    std::string skeleton = "learned";
    std::string skeleton_file;
    std::string families = "poisson";
    int r = 2;
    std::int64_t n_min = 1;
    double alpha = 0.05;
    int max_cond = 2;
    int max_category = 10;
    double denom_eps = 1e-9;
    double m_min = 0.0;  // > 0 enables the margin diagnostic
    int jobs = 1;
    std::string out_graph;
    std::string trace_path;
};

int cmd_learn(const LearnArgs& args) {
    const Dataset data = read_dataset_csv(args.data_path);

    SkeletonSource source;
    Dag true_dag(1);
    const Dag* true_dag_ptr = nullptr;
    if (args.skeleton == "oracle") {
        if (args.skeleton_file.empty())
            throw UsageError("--skeleton oracle needs --skeleton-file <true graph>");
        true_dag = read_dag_file(args.skeleton_file);
        true_dag_ptr = &true_dag;
        source = SkeletonSource::oracle();
    } else if (args.skeleton == "file") {
        if (args.skeleton_file.empty()) throw UsageError("--skeleton file needs --skeleton-file");
        source = SkeletonSource::file(args.skeleton_file);
    } else if (args.skeleton == "learned") {
        CiConfig ci;
        ci.alpha = args.alpha;
        ci.max_conditioning = args.max_cond;
        ci.max_category = args.max_category;
        source = SkeletonSource::learned(ci);
    } else {
        throw UsageError("--skeleton must be oracle|learned|file");
    }

    if (args.r < 2 || args.r > 8) throw UsageError("--r must be in [2, 8]");
    const FamilyChoice choice = FamilyChoice::parse(args.families);
    ScoreConfig cfg;
    cfg.r = args.r;
    cfg.n_min = args.n_min;
    cfg.denom_epsilon = args.denom_eps;
    cfg.families = resolve_families(choice, data, nullptr);

    const LearnResult result = learn(data, source, cfg, true_dag_ptr, args.jobs);
    write_dag_file(result.dag, args.out_graph);
    if (!args.trace_path.empty()) write_trace_csv(result.trace, cfg, args.trace_path);
    if (args.m_min > 0.0) {
        const auto thin = margin_violations(result.trace, result.ordering, args.m_min);
        for (const auto& v : thin)
            std::fprintf(stderr, "margin: position %d passed over node %d at score %.6g\n",
                         v.position, v.node, v.score);
        std::fprintf(stderr, "margin: %zu candidate(s) within %.3g of 1\n", thin.size(),
                     args.m_min);
    }
    std::printf("learned p=%d edges=%d -> %s\n", data.p(), result.dag.edge_count(),
                args.out_graph.c_str());
    return 0;
}

struct EvalArgs {
    std::string true_path;
    std::string est_path;
    std::string mode = "dag";
};

int cmd_eval(const EvalArgs& args) {
    const Dag truth = read_dag_file(args.true_path);
    const Dag est = read_dag_file(args.est_path);
    if (truth.node_count() != est.node_count())
        throw DataError("eval: node counts differ (" + std::to_string(truth.node_count()) + " vs " +
                        std::to_string(est.node_count()) + ")");
    const EdgeMetrics m = args.mode == "mec" ? mec_metrics(truth, est) : dag_metrics(truth, est);
    std::printf("precision=%.6f\n", m.precision);
    std::printf("recall=%.6f\n", m.recall);
    std::printf("true_edges=%d\n", m.true_edge_count);
    std::printf("estimated_edges=%d\n", m.estimated_edge_count);
    std::printf("correct_edges=%d\n", m.correct_count);
    return 0;
}

struct SweepArgs {
    std::string spec_path;
    int jobs = 1;
    bool resume = false;
};

int cmd_sweep(const SweepArgs& args) {
    SweepSpec spec = parse_sweep_spec_file(args.spec_path);
    if (spec.output_path.empty()) throw UsageError("sweep spec must set out = <path>");
    const auto rows = run_sweep(spec, args.jobs, args.resume, &std::cerr);
    std::printf("sweep: wrote %zu rows -> %s\n", rows.size(), spec.output_path.c_str());
    return 0;
}

struct BenchArgs {
    std::vector<int> p_grid{25, 50, 100};
    std::vector<std::int64_t> n_grid{500, 1000};
    std::uint64_t seed = 0;
    int reps = 3;
    std::string out_path;
};

int cmd_bench(const BenchArgs& args) {
    const auto records = run_bench(args.p_grid, args.n_grid, args.seed, args.reps);
    write_bench_csv(records, args.out_path);
    std::printf("bench: wrote %zu rows -> %s\n", records.size(), args.out_path.c_str());
    return 0;
}

struct IngestArgs {
    std::string data_path;
    std::vector<std::string> drop;
    std::string out_path;
};

int cmd_ingest(const IngestArgs& args) {
    const Dataset data = ingest_real_csv(args.data_path, args.drop, &std::cerr);
    write_dataset_csv(data, args.out_path);
    std::printf("ingested %" PRId64 " rows x %d columns -> %s\n", data.n(), data.p(),
                args.out_path.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"DAG structure learning for multivariate count data via moments ratio scoring"};
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "sample a random model and dataset");
    generate->add_option("--model", gen.model, "poisson|hybrid")
        ->check(CLI::IsMember({"poisson", "hybrid"}));
    generate->add_option("--p", gen.p, "node count")->required();
    generate->add_option("--d", gen.d, "max indegree");
    generate->add_option("--n", gen.n, "sample size")->required();
    generate->add_option("--seed", gen.seed, "rng seed");
    generate->add_option("--edge-prob", gen.edge_prob, "edge probability (default 2d/(p-1))");
    generate->add_option("--overflow-cap", gen.overflow_cap, "rate cap before regeneration");
    generate->add_option("--max-retries", gen.max_retries, "regeneration attempts");
    generate->add_option("--jobs", gen.jobs, "sampling threads");
    generate->add_option("--out", gen.out_data, "dataset CSV path")->required();
    generate->add_option("--out-graph", gen.out_graph, "true graph edge list path")->required();

    LearnArgs lrn;
    auto* learn_cmd = app.add_subcommand("learn", "estimate a DAG from a dataset");
    learn_cmd->add_option("--data", lrn.data_path, "dataset CSV")->required();
    learn_cmd->add_option("--skeleton", lrn.skeleton, "oracle|learned|file")
        ->check(CLI::IsMember({"oracle", "learned", "file"}));
    learn_cmd->add_option("--skeleton-file", lrn.skeleton_file,
                          "true graph (oracle) or skeleton file (file)");
    learn_cmd->add_option("--families", lrn.families,
                          "poisson|hyperpoisson:<b>|auto-hyperpoisson");
    learn_cmd->add_option("--r", lrn.r, "moment order");
    learn_cmd->add_option("--nmin", lrn.n_min, "cell inclusion threshold");
    learn_cmd->add_option("--alpha", lrn.alpha, "CI test level (learned skeleton)");
    learn_cmd->add_option("--max-cond", lrn.max_cond, "max conditioning set size");
    learn_cmd->add_option("--max-category", lrn.max_category, "count collapsing cap");
    learn_cmd->add_option("--denom-eps", lrn.denom_eps, "denominator guard");
    learn_cmd->add_option("--mmin", lrn.m_min, "report passed-over candidates scoring under 1+mmin");
    learn_cmd->add_option("--jobs", lrn.jobs, "scoring threads");
    learn_cmd->add_option("--out", lrn.out_graph, "estimated graph path")->required();
    learn_cmd->add_option("--trace", lrn.trace_path, "score trace CSV path");

    EvalArgs ev;
    auto* eval_cmd = app.add_subcommand("eval", "compare an estimated graph to the truth");
    eval_cmd->add_option("--true", ev.true_path, "true graph edge list")->required();
    eval_cmd->add_option("--est", ev.est_path, "estimated graph edge list")->required();
    eval_cmd->add_option("--mode", ev.mode, "dag|mec")->check(CLI::IsMember({"dag", "mec"}));

    SweepArgs sw;
    auto* sweep_cmd = app.add_subcommand("sweep", "run an experiment grid from a spec file");
    sweep_cmd->add_option("--spec", sw.spec_path, "sweep spec path")->required();
    sweep_cmd->add_option("--jobs", sw.jobs, "concurrent trials");
    sweep_cmd->add_flag("--resume", sw.resume, "skip rows already in the output file");

    BenchArgs bn;
    auto* bench_cmd = app.add_subcommand("bench", "time step 1 and step 2 across a grid");
    bench_cmd->add_option("--p", bn.p_grid, "node counts")->delimiter(',');
    bench_cmd->add_option("--n", bn.n_grid, "sample sizes")->delimiter(',');
    bench_cmd->add_option("--seed", bn.seed, "rng seed");
    bench_cmd->add_option("--reps", bn.reps, "measurements per cell (fastest kept)");
    bench_cmd->add_option("--out", bn.out_path, "timing CSV path")->required();

    IngestArgs ing;
    auto* ingest_cmd = app.add_subcommand("ingest", "load a third-party CSV of counts");
    ingest_cmd->add_option("--data", ing.data_path, "input CSV")->required();
    ingest_cmd->add_option("--drop", ing.drop, "column names to drop")->delimiter(',');
    ingest_cmd->add_option("--out", ing.out_path, "dataset CSV path")->required();

    try {
        app.parse(argc, argv);
        if (generate->parsed()) return cmd_generate(gen);
        if (learn_cmd->parsed()) return cmd_learn(lrn);
        if (eval_cmd->parsed()) return cmd_eval(ev);
        if (sweep_cmd->parsed()) return cmd_sweep(sw);
        if (bench_cmd->parsed()) return cmd_bench(bn);
        if (ingest_cmd->parsed()) return cmd_ingest(ing);
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 2;
    } catch (const ExhaustedRetriesError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
}
