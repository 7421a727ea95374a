// Acceptance suite: one line per criterion, nonzero exit on any failure.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "mrs/dataset.hpp"
#include "mrs/evaluation.hpp"
#include "mrs/experiments.hpp"
#include "mrs/ghd.hpp"
#include "mrs/graph.hpp"
#include "mrs/sampler.hpp"
#include "mrs/scoring.hpp"
#include "mrs/skeleton.hpp"
#include "oracles.hpp"

using namespace mrs;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool pass, const std::string& detail,
            double seconds) {
    std::printf("%s  criterion %2d: %-34s %s  (%.1fs)\n", pass ? "PASS" : "FAIL", number,
                name.c_str(), detail.c_str(), seconds);
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

// ---------------------------------------------------------------------------
// 1. factorial-moment identity across the family grid, via series enumeration

void criterion_cmr_identity() {
    const double t0 = now_seconds();
    struct Case {
        GhdFamily family;
        double theta;
    };
    std::vector<Case> cases;
    for (double th : {0.5, 2.0, 5.0}) cases.push_back({GhdFamily::poisson(), th});
    for (double th : {1.0, 3.0}) cases.push_back({GhdFamily::hyper_poisson(2.0), th});
    for (int N : {3, 5})
        for (double p : {0.3, 0.7}) cases.push_back({GhdFamily::binomial(N), -p});
    for (double k : {1.0, 2.0})
        for (double th : {0.3, 0.6}) cases.push_back({GhdFamily::negative_binomial(k), th});

    bool pass = true;
    double worst = 0.0;
    for (const auto& c : cases) {
        const auto pmf =
            oracle::enumerate_pmf([&](long long x) { return ghd_pmf(c.family, c.theta, x); });
        const double mean = oracle::raw_moment(pmf, 1);
        for (int r = 2; r <= 4; ++r) {
            const double lhs = oracle::factorial_moment(pmf, r);
            const double rhs = cmr_coefficient(c.family, r) * pow_int(mean, r);
            if (c.family == GhdFamily::binomial(3) && r == 4) {
                // bounded support: both sides exactly zero
                if (lhs != 0.0 || rhs != 0.0) pass = false;
                continue;
            }
            const double rel = std::abs(lhs - rhs) / std::max(1e-12, std::abs(rhs));
            worst = std::max(worst, rel);
            if (rel >= 1e-8) pass = false;
        }
    }
    const double elapsed = now_seconds() - t0;
    if (elapsed >= 5.0) pass = false;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "worst rel err %.2e", worst);
    report(1, "factorial-moment identity", pass, detail, elapsed);
}

// ---------------------------------------------------------------------------
// 2. Stirling/denominator algebra and the exact population fixed point

void criterion_denominator_algebra() {
    const double t0 = now_seconds();
    bool pass = true;
    double worst = 0.0;
    SplitMix64 rng(4242);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::int64_t> col(150);
        for (auto& v : col) v = uniform_int(rng, 0, 14);
        const GhdFamily family = (trial % 3 == 0)   ? GhdFamily::poisson()
                                 : (trial % 3 == 1) ? GhdFamily::hyper_poisson(2.0)
                                                    : GhdFamily::negative_binomial(1.5);
        for (int r = 2; r <= 5; ++r) {
            const double n = static_cast<double>(col.size());
            std::vector<double> m(r + 1, 0.0);
            double ffr = 0.0;
            for (std::int64_t v : col) {
                double xk = 1.0;
                for (int k = 0; k <= r; ++k) {
                    m[k] += xk;
                    xk *= static_cast<double>(v);
                }
                ffr += falling_factorial(static_cast<double>(v), r);
            }
            for (auto& x : m) x /= n;
            ffr /= n;
            const double lhs = m[r] - score_denominator(family, r, m);
            const double rhs = ffr - cmr_coefficient(family, r) * pow_int(m[1], r);
            const double rel = std::abs(lhs - rhs) / std::max({std::abs(lhs), std::abs(rhs), 1.0});
            worst = std::max(worst, rel);
            if (rel > 1e-12) pass = false;
        }
    }
    bool exact = true;
    for (double lambda : {1.0, 2.0, 3.0}) {
        for (int r = 2; r <= 5; ++r) {
            std::vector<double> moments(r + 1);
            for (int k = 0; k <= r; ++k) moments[k] = oracle::poisson_raw_moment(lambda, k);
            if (score_from_moments(GhdFamily::poisson(), r, moments, 1e-12) != 1.0) exact = false;
        }
    }
    if (!exact) pass = false;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "worst identity err %.1e, fixed point %s", worst,
                  exact ? "exact" : "not exact");
    report(2, "denominator algebra", pass, detail, now_seconds() - t0);
}

// ---------------------------------------------------------------------------
// 3. bivariate identifiability

void criterion_bivariate() {
    const double t0 = now_seconds();
    const Dag dag = Dag::from_edges(2, {{0, 1}});
    GhdDagModel model{dag, {}};
    NodeMechanism m0, m1;
    m0.family = m1.family = GhdFamily::poisson();
    m0.intercept = 1.5;
    m1.intercept = 1.5;
    m1.weights = {{0, 0.8}};
    model.mechanisms = {m0, m1};
    const Skeleton skel = skeleton_of(dag);

    int correct = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const Dataset data = forward_sample(model, 10000, 9000 + seed).data;
        const OrderingResult res = estimate_ordering(data, skel, ScoreConfig{});
        if (res.ordering.sequence == std::vector<int>{0, 1}) ++correct;
    }
    const double elapsed = now_seconds() - t0;
    const bool pass = correct >= 95 && elapsed < 30.0;
    char detail[64];
    std::snprintf(detail, sizeof(detail), "%d/100 correct", correct);
    report(3, "bivariate identifiability", pass, detail, elapsed);
}

// ---------------------------------------------------------------------------
// 4 & 5. ordering recovery with oracle skeletons

Dataset prefix_rows(const Dataset& data, std::int64_t n) {
    Dataset out;
    out.columns = data.columns;
    out.values.reserve(data.values.size());
    for (const auto& col : data.values)
        out.values.emplace_back(col.begin(), col.begin() + n);
    return out;
}

void criterion_poisson_ordering() {
    const double t0 = now_seconds();
    const std::vector<std::int64_t> n_grid = {100, 250, 500, 1000};
    const int trials = 50;
    std::vector<double> mean_r2(n_grid.size(), 0.0);
    double mean_r3_at_1000 = 0.0;
    double mean_random = 0.0;

    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t seed = trial_seed(600, trial, 20, 1000);
        const Dag dag = random_dag(20, 2, default_edge_probability(20, 2), derive_stream(seed, 0));
        const ModelAndData gen =
            regenerate_until_valid(dag, ModelKind::poisson, 1000, derive_stream(seed, 1));
        const Skeleton skel = skeleton_of(dag);

        for (size_t i = 0; i < n_grid.size(); ++i) {
            const Dataset data = prefix_rows(gen.data, n_grid[i]);
            ScoreConfig cfg;
            cfg.r = 2;
            const Ordering ord = estimate_ordering(data, skel, cfg).ordering;
            mean_r2[i] += ordering_precision(dag, ord) / trials;
        }
        ScoreConfig cfg3;
        cfg3.r = 3;
        mean_r3_at_1000 +=
            ordering_precision(dag, estimate_ordering(gen.data, skel, cfg3).ordering) / trials;

        SplitMix64 rng(derive_stream(seed, 9));
        std::vector<int> seq(20);
        for (int i = 0; i < 20; ++i) seq[i] = i;
        for (int i = 19; i > 0; --i) std::swap(seq[i], seq[uniform_int(rng, 0, i)]);
        mean_random += ordering_precision(dag, Ordering(seq)) / trials;
    }

    bool monotone = true;
    for (size_t i = 1; i < n_grid.size(); ++i)
        if (mean_r2[i] < mean_r2[i - 1] - 0.02) monotone = false;
    const bool high = mean_r2.back() >= 0.80;
    const bool r2_beats_r3 = mean_r2.back() >= mean_r3_at_1000;
    const bool random_ok = mean_random >= 0.42 && mean_random <= 0.58;
    const double elapsed = now_seconds() - t0;
    const bool pass = monotone && high && r2_beats_r3 && random_ok && elapsed < 300.0;
    char detail[160];
    std::snprintf(detail, sizeof(detail),
                  "r2 means %.3f/%.3f/%.3f/%.3f, r3@1000 %.3f, random %.3f", mean_r2[0],
                  mean_r2[1], mean_r2[2], mean_r2[3], mean_r3_at_1000, mean_random);
    report(4, "Poisson ordering recovery", pass, detail, elapsed);
}

void criterion_hybrid_r4() {
    const double t0 = now_seconds();
    const int trials = 50;
    double mean_r4 = 0.0, mean_r2 = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const std::uint64_t seed = trial_seed(700, trial, 20, 1000);
        const Dag dag = random_dag(20, 2, default_edge_probability(20, 2), derive_stream(seed, 0));
        const ModelAndData gen =
            regenerate_until_valid(dag, ModelKind::hybrid, 1000, derive_stream(seed, 1));
        const Skeleton skel = skeleton_of(dag);
        ScoreConfig cfg;
        cfg.families = resolve_families(FamilyChoice::parse("true"), gen.data, &gen.model);
        cfg.r = 4;
        mean_r4 += ordering_precision(dag, estimate_ordering(gen.data, skel, cfg).ordering) / trials;
        cfg.r = 2;
        mean_r2 += ordering_precision(dag, estimate_ordering(gen.data, skel, cfg).ordering) / trials;
    }
    const bool pass = mean_r4 > 0.55 && mean_r4 < mean_r2;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "r4 mean %.3f, r2 mean %.3f", mean_r4, mean_r2);
    report(5, "hybrid r=4 floor", pass, detail, now_seconds() - t0);
}

// ---------------------------------------------------------------------------
// 6. MRS vs ODS in the low-conditional-mean regime

void criterion_low_mean_separation() {
    const double t0 = now_seconds();
    const Dag dag = Dag::from_edges(2, {{0, 1}});
    GhdDagModel model{dag, {}};
    NodeMechanism m0, m1;
    m0.family = m1.family = GhdFamily::poisson();
    m0.intercept = std::log(6.0);
    m1.intercept = -5.095;  // E(X_1 | X_0) around 0.05
    m1.weights = {{0, 0.3}};
    model.mechanisms = {m0, m1};
    const Skeleton skel = skeleton_of(dag);

    int mrs_correct = 0, ods_correct = 0;
    for (int seed = 0; seed < 100; ++seed) {
        const Dataset data = forward_sample(model, 50000, 17000 + seed).data;
        if (estimate_ordering(data, skel, ScoreConfig{}).ordering.sequence[0] == 0) ++mrs_correct;
        if (ods_ordering(data, skel, 1).sequence[0] == 0) ++ods_correct;
    }
    const double elapsed = now_seconds() - t0;
    const bool pass = mrs_correct >= 90 && ods_correct <= 60 && elapsed < 120.0;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "mrs %d/100, ods %d/100", mrs_correct, ods_correct);
    report(6, "low-mean MRS vs ODS", pass, detail, elapsed);
}

// ---------------------------------------------------------------------------
// 7. complexity scaling through the bench command

std::vector<BenchRecord> parse_bench_csv(const std::string& path) {
    std::ifstream in(path);
    std::vector<BenchRecord> out;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        BenchRecord rec;
        long long n = 0;
        if (std::sscanf(line.c_str(), "%d,%lld,%lf,%lf", &rec.p, &n, &rec.step1_seconds,
                        &rec.step2_seconds) == 4) {
            rec.n = n;
            out.push_back(rec);
        }
    }
    return out;
}

void criterion_complexity(const std::string& cli, const fs::path& dir) {
    const double t0 = now_seconds();
    const std::string out = (dir / "bench.csv").string();
    const std::string cmd =
        cli + " bench --p 25,50,100 --n 500,1000 --seed 5 --reps 9 --out " + out + " > /dev/null";
    bool pass = std::system(cmd.c_str()) == 0;
    std::vector<BenchRecord> recs = pass ? parse_bench_csv(out) : std::vector<BenchRecord>{};
    if (recs.size() != 6) pass = false;

    auto find = [&](int p, std::int64_t n) -> const BenchRecord* {
        for (const auto& r : recs)
            if (r.p == p && r.n == n) return &r;
        return nullptr;
    };
    std::string detail;
    if (pass) {
        char buf[64];
        for (int p : {25, 50, 100}) {
            const double ratio = find(p, 1000)->step2_seconds / find(p, 500)->step2_seconds;
            std::snprintf(buf, sizeof(buf), "n-ratio@p%d %.2f ", p, ratio);
            detail += buf;
            if (ratio < 1.6 || ratio > 2.6) pass = false;
        }
        for (std::int64_t n : {500ll, 1000ll}) {
            const double r1 = find(50, n)->step2_seconds / find(25, n)->step2_seconds;
            const double r2 = find(100, n)->step2_seconds / find(50, n)->step2_seconds;
            std::snprintf(buf, sizeof(buf), "p-ratios@n%lld %.2f/%.2f ", (long long)n, r1, r2);
            detail += buf;
            if (r1 < 3.0 || r1 > 5.5 || r2 < 3.0 || r2 > 5.5) pass = false;
        }
        for (const auto& r : recs)
            if (r.step2_seconds > r.step1_seconds) pass = false;
    }
    report(7, "complexity scaling", pass, detail, now_seconds() - t0);
}

// ---------------------------------------------------------------------------
// 8. skeleton calibration

void criterion_skeleton_calibration() {
    const double t0 = now_seconds();
    CiConfig cfg;
    const int seeds = 200;

    // false-edge rate on independent columns
    long long false_edges = 0;
    const Dag independent = Dag::from_edges(15, {});
    for (int s = 0; s < seeds; ++s) {
        GhdDagModel model{independent, {}};
        SplitMix64 rng(derive_stream(1234, s));
        for (int j = 0; j < 15; ++j) {
            NodeMechanism mech;
            mech.family = GhdFamily::poisson();
            mech.intercept = uniform_real(rng, 1.0, 3.0);
            model.mechanisms.push_back(mech);
        }
        const Dataset data = forward_sample(model, 5000, derive_stream(5678, s)).data;
        false_edges += learn_skeleton(data, cfg).edge_count();
    }
    const double rate =
        static_cast<double>(false_edges) / (seeds * (15.0 * 14.0 / 2.0));
    const bool rate_ok = std::abs(rate - cfg.alpha) <= 0.03;

    // strong chain: the 0-2 edge must fall to conditioning on {1}
    int removed = 0;
    const Dag chain = Dag::from_edges(3, {{0, 1}, {1, 2}});
    for (int s = 0; s < seeds; ++s) {
        GhdDagModel model{chain, {}};
        NodeMechanism m0, m1, m2;
        m0.family = m1.family = m2.family = GhdFamily::poisson();
        m1.damped_transfer = m2.damped_transfer = true;
        m0.intercept = 1.5;
        m1.intercept = 1.0;
        m1.weights = {{0, 0.8}};
        m2.intercept = 1.0;
        m2.weights = {{1, 0.8}};
        model.mechanisms = {m0, m1, m2};
        const Dataset data = forward_sample(model, 5000, derive_stream(91, s)).data;
        if (!learn_skeleton(data, cfg).has_edge(0, 2)) ++removed;
    }
    const bool chain_ok = removed >= seeds * 95 / 100;
    char detail[96];
    std::snprintf(detail, sizeof(detail), "false-edge rate %.3f, chain removal %d/%d", rate,
                  removed, seeds);
    report(8, "skeleton calibration", rate_ok && chain_ok, detail, now_seconds() - t0);
}

// ---------------------------------------------------------------------------
// 9. MEC machinery against brute force

void criterion_mec_bruteforce() {
    const double t0 = now_seconds();
    bool pass = true;
    long long checked = 0;
    for (int p = 1; p <= 4; ++p) {
        for (const auto& dag : oracle::all_dags(p)) {
            ++checked;
            if (!(to_cpdag(dag) == oracle::cpdag_by_enumeration(dag))) pass = false;
        }
    }
    char detail[64];
    std::snprintf(detail, sizeof(detail), "%lld DAGs checked", checked);
    report(9, "MEC brute force", pass, detail, now_seconds() - t0);
}

// ---------------------------------------------------------------------------
// 10. CLI determinism

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

// CSV with the trailing `strip` columns removed from every line.
std::string strip_last_columns(const std::string& content, int strip) {
    std::istringstream in(content);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        for (int i = 0; i < strip; ++i) {
            const auto pos = line.rfind(',');
            if (pos != std::string::npos) line.erase(pos);
        }
        out << line << "\n";
    }
    return out.str();
}

void criterion_cli_determinism(const std::string& cli, const fs::path& dir) {
    const double t0 = now_seconds();
    bool pass = true;
    std::string failed;
    auto run = [&](const std::string& args) {
        // Commands carrying their own redirect keep it; others are silenced.
        const bool has_redirect = args.find('>') != std::string::npos;
        const std::string cmd = cli + " " + args + (has_redirect ? "" : " > /dev/null 2> /dev/null");
        if (std::system(cmd.c_str()) != 0) {
            pass = false;
            failed += "[exit!=0: " + args.substr(0, 24) + "] ";
        }
    };
    auto path = [&](const std::string& name) { return (dir / name).string(); };

    // generate
    run("generate --model hybrid --p 6 --d 2 --n 150 --seed 3 --out " + path("d1.csv") +
        " --out-graph " + path("g1.tsv"));
    run("generate --model hybrid --p 6 --d 2 --n 150 --seed 3 --out " + path("d2.csv") +
        " --out-graph " + path("g2.tsv"));
    if (read_file(path("d1.csv")) != read_file(path("d2.csv"))) pass = false;
    if (read_file(path("g1.tsv")) != read_file(path("g2.tsv"))) pass = false;

    // learn (oracle skeleton + trace)
    run("learn --data " + path("d1.csv") + " --skeleton oracle --skeleton-file " + path("g1.tsv") +
        " --families auto-hyperpoisson --out " + path("e1.tsv") + " --trace " + path("t1.csv"));
    run("learn --data " + path("d1.csv") + " --skeleton oracle --skeleton-file " + path("g1.tsv") +
        " --families auto-hyperpoisson --out " + path("e2.tsv") + " --trace " + path("t2.csv"));
    if (read_file(path("e1.tsv")) != read_file(path("e2.tsv"))) pass = false;
    if (read_file(path("t1.csv")) != read_file(path("t2.csv"))) pass = false;

    // eval twice into files
    run("eval --true " + path("g1.tsv") + " --est " + path("e1.tsv") + " --mode mec > " +
        path("m1.txt") + " 2>/dev/null");
    run("eval --true " + path("g1.tsv") + " --est " + path("e1.tsv") + " --mode mec > " +
        path("m2.txt") + " 2>/dev/null");
    if (read_file(path("m1.txt")) != read_file(path("m2.txt")) || read_file(path("m1.txt")).empty())
        pass = false;

    // ingest
    {
        std::ofstream raw(path("raw.csv"));
        raw << "name,team,a,b\n\"x\",T1,1,2\n\"y\",T2,3,4\n";
    }
    run("ingest --data " + path("raw.csv") + " --drop name,team --out " + path("i1.csv"));
    run("ingest --data " + path("raw.csv") + " --drop name,team --out " + path("i2.csv"));
    if (read_file(path("i1.csv")) != read_file(path("i2.csv"))) pass = false;
    if (read_file(path("i1.csv")).substr(0, 4) != "a,b\n") pass = false;

    // sweep (timing columns stripped before comparison)
    {
        std::ofstream spec(path("sweep.spec"));
        spec << "model = poisson\np = 5\nn = 120\nr = 2\ntrials = 2\nskeleton = oracle\n"
             << "methods = mrs,random\nfamilies = true\nbase_seed = 4\nout = " << path("s1.csv")
             << "\n";
        std::ofstream spec2(path("sweep2.spec"));
        spec2 << "model = poisson\np = 5\nn = 120\nr = 2\ntrials = 2\nskeleton = oracle\n"
              << "methods = mrs,random\nfamilies = true\nbase_seed = 4\nout = " << path("s2.csv")
              << "\n";
    }
    run("sweep --spec " + path("sweep.spec"));
    run("sweep --spec " + path("sweep2.spec"));
    if (strip_last_columns(read_file(path("s1.csv")), 2) !=
        strip_last_columns(read_file(path("s2.csv")), 2))
        pass = false;

    // bench (timing columns stripped)
    run("bench --p 5 --n 100 --seed 2 --reps 1 --out " + path("b1.csv"));
    run("bench --p 5 --n 100 --seed 2 --reps 1 --out " + path("b2.csv"));
    if (strip_last_columns(read_file(path("b1.csv")), 2) !=
        strip_last_columns(read_file(path("b2.csv")), 2))
        pass = false;

    report(10, "CLI determinism", pass, failed.empty() ? "all commands byte-stable" : failed,
           now_seconds() - t0);
}

}  // namespace

int main() {
#ifdef MRS_CLI_BIN
    const std::string cli = MRS_CLI_BIN;
#else
    const std::string cli = "./mrs";
#endif
    const fs::path dir = fs::temp_directory_path() / "mrs_acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    criterion_cmr_identity();
    criterion_denominator_algebra();
    criterion_bivariate();
    criterion_poisson_ordering();
    criterion_hybrid_r4();
    criterion_low_mean_separation();
    criterion_complexity(cli, dir);
    criterion_skeleton_calibration();
    criterion_mec_bruteforce();
    criterion_cli_determinism(cli, dir);

    fs::remove_all(dir);
    if (g_failures) std::printf("%d criterion(s) failed\n", g_failures);
    else std::printf("all criteria passed\n");
    return g_failures;
}
