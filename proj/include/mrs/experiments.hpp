#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrs/dataset.hpp"
#include "mrs/sampler.hpp"
#include "mrs/scoring.hpp"

namespace mrs {

// How per-node families are assigned for scoring. "true_model" is only
// meaningful inside a sweep, where the generating model is at hand.
struct FamilyChoice {
    enum class Kind { true_model, poisson, hyper_poisson_fixed, auto_hyper_poisson } kind =
        Kind::poisson;
    double b = 2.0;  // hyper_poisson_fixed

    // Accepts "true", "poisson", "hyperpoisson:<b>", "auto-hyperpoisson".
    static FamilyChoice parse(const std::string& text);
    std::string to_string() const;
};

std::vector<GhdFamily> resolve_families(const FamilyChoice& choice, const Dataset& data,
                                        const GhdDagModel* model);

struct SweepSpec {
    ModelKind model_kind = ModelKind::poisson;
    std::vector<int> p_grid;
    std::vector<std::int64_t> n_grid;
    std::vector<int> r_grid = {2};
    int d = 2;
    std::int64_t n_min = 1;
    int trials = 1;
    SkeletonSource::Mode skeleton_mode = SkeletonSource::Mode::oracle;
    std::string skeleton_file;
    std::vector<std::string> methods = {"mrs"};
    FamilyChoice families;
    double alpha = 0.05;
    int max_conditioning = 2;
    double overflow_cap = 1e9;
    int max_retries = 100;
    std::uint64_t base_seed = 0;
    std::string output_path;

    void validate() const;
};

// Line-oriented "key = value" text; '#' comments; grids comma-separated.
SweepSpec parse_sweep_spec(std::istream& in, const std::string& origin);
SweepSpec parse_sweep_spec_file(const std::string& path);

struct RunRecord {
    int trial = 0;
    int p = 0;
    std::int64_t n = 0;
    int d = 0;
    int r = 0;
    std::string method;
    std::string skeleton_mode;
    double precision = 0.0;
    double recall = 0.0;
    double mec_precision = 0.0;
    double mec_recall = 0.0;
    double ordering_precision = 0.0;
    double step1_seconds = 0.0;
    double step2_seconds = 0.0;
};

// Per-trial seed: one mix64 fold per tuple element.
std::uint64_t trial_seed(std::uint64_t base_seed, int trial, int p, std::int64_t n);

extern const char* const kRunRecordHeader;
std::string format_run_record(const RunRecord& rec);

// Runs the whole grid; rows come out in canonical (p, n, trial, method, r)
// order regardless of jobs. When output_path is set rows are appended to the
// file as they are finalized (resume skips rows already present).
std::vector<RunRecord> run_sweep(const SweepSpec& spec, int jobs = 1, bool resume = false,
                                 std::ostream* progress = nullptr);

struct BenchRecord {
    int p = 0;
    std::int64_t n = 0;
    double step1_seconds = 0.0;
    double step2_seconds = 0.0;
};

// Times learned-skeleton step 1 and ordering step 2 on generated Poisson
// data; the work is repeated until each measurement is long enough to trust
// and the fastest of `reps` measurements is kept (scheduler noise only ever
// adds time). Rows sorted by (p, n).
std::vector<BenchRecord> run_bench(const std::vector<int>& p_grid,
                                   const std::vector<std::int64_t>& n_grid, std::uint64_t seed,
                                   int reps = 3);

void write_bench_csv(const std::vector<BenchRecord>& records, const std::string& path);

}  // namespace mrs
