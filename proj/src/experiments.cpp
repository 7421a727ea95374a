#include "mrs/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mrs/errors.hpp"
#include "mrs/evaluation.hpp"
#include "mrs/rng.hpp"

namespace mrs {

FamilyChoice FamilyChoice::parse(const std::string& text) {
    FamilyChoice out;
    if (text == "true") {
        out.kind = Kind::true_model;
    } else if (text == "poisson") {
        out.kind = Kind::poisson;
    } else if (text == "auto-hyperpoisson") {
        out.kind = Kind::auto_hyper_poisson;
    } else if (text.rfind("hyperpoisson:", 0) == 0) {
        out.kind = Kind::hyper_poisson_fixed;
        try {
            out.b = std::stod(text.substr(13));
        } catch (const std::exception&) {
            throw UsageError("bad hyperpoisson b value in '" + text + "'");
        }
        if (!(out.b > 0.0)) throw UsageError("hyperpoisson b must be > 0");
    } else {
        throw UsageError("unknown families spec '" + text +
                         "' (expected true|poisson|hyperpoisson:<b>|auto-hyperpoisson)");
    }
    return out;
}

std::string FamilyChoice::to_string() const {
    switch (kind) {
        case Kind::true_model: return "true";
        case Kind::poisson: return "poisson";
        case Kind::auto_hyper_poisson: return "auto-hyperpoisson";
        case Kind::hyper_poisson_fixed: {
            char buf[48];
            std::snprintf(buf, sizeof(buf), "hyperpoisson:%.6g", b);
            return buf;
        }
    }
    return "?";
}

std::vector<GhdFamily> resolve_families(const FamilyChoice& choice, const Dataset& data,
                                        const GhdDagModel* model) {
    switch (choice.kind) {
        case FamilyChoice::Kind::poisson:
            return families_all_poisson(data.p());
        case FamilyChoice::Kind::hyper_poisson_fixed:
            return families_all_hyper_poisson(data.p(), choice.b);
        case FamilyChoice::Kind::auto_hyper_poisson:
            return families_auto_hyper_poisson(data);
        case FamilyChoice::Kind::true_model: {
            if (!model)
                throw UsageError("families=true requires the generating model (sweep only)");
            std::vector<GhdFamily> out;
            out.reserve(model->mechanisms.size());
            for (const auto& mech : model->mechanisms) out.push_back(mech.family);
            return out;
        }
    }
    throw std::logic_error("resolve_families: unreachable");
}

void SweepSpec::validate() const {
    if (p_grid.empty() || n_grid.empty() || r_grid.empty())
        throw UsageError("sweep spec: p, n and r grids must be nonempty");
    for (int p : p_grid)
        if (p < 1) throw UsageError("sweep spec: p must be >= 1");
    for (std::int64_t n : n_grid)
        if (n < 1) throw UsageError("sweep spec: n must be >= 1");
    for (int r : r_grid)
        if (r < 2 || r > 8) throw UsageError("sweep spec: r must be in [2, 8]");
    if (trials < 1) throw UsageError("sweep spec: trials must be >= 1");
    if (d < 0) throw UsageError("sweep spec: d must be >= 0");
    if (n_min < 1) throw UsageError("sweep spec: nmin must be >= 1");
    if (methods.empty()) throw UsageError("sweep spec: methods must be nonempty");
    for (const auto& m : methods)
        if (m != "mrs" && m != "ods" && m != "random")
            throw UsageError("sweep spec: unknown method '" + m + "'");
    if (skeleton_mode == SkeletonSource::Mode::file && skeleton_file.empty())
        throw UsageError("sweep spec: skeleton=file needs skeleton_file");
    if (alpha <= 0.0 || alpha >= 1.0) throw UsageError("sweep spec: alpha in (0,1)");
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(text);
    while (std::getline(in, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        const auto e = item.find_last_not_of(" \t");
        if (b == std::string::npos) continue;
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

template <class T, class Parse>
std::vector<T> parse_grid(const std::string& text, Parse parse, const std::string& key) {
    std::vector<T> out;
    for (const auto& item : split_list(text)) {
        try {
            out.push_back(parse(item));
        } catch (const std::exception&) {
            throw UsageError("sweep spec: bad value '" + item + "' for " + key);
        }
    }
    return out;
}

}  // namespace

SweepSpec parse_sweep_spec(std::istream& in, const std::string& origin) {
    SweepSpec spec;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        if (eq == std::string::npos)
            throw UsageError(origin + ":" + std::to_string(line_no) + ": expected key = value");
        auto trim = [](std::string s) {
            const auto b = s.find_first_not_of(" \t\r");
            const auto e = s.find_last_not_of(" \t\r");
            return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        try {
            if (key == "model") {
                if (value == "poisson") spec.model_kind = ModelKind::poisson;
                else if (value == "hybrid") spec.model_kind = ModelKind::hybrid;
                else throw UsageError("model must be poisson|hybrid");
            } else if (key == "p") {
                spec.p_grid = parse_grid<int>(value, [](const std::string& s) { return std::stoi(s); }, "p");
            } else if (key == "n") {
                spec.n_grid = parse_grid<std::int64_t>(value, [](const std::string& s) { return std::stoll(s); }, "n");
            } else if (key == "r") {
                spec.r_grid = parse_grid<int>(value, [](const std::string& s) { return std::stoi(s); }, "r");
            } else if (key == "d") {
                spec.d = std::stoi(value);
            } else if (key == "nmin") {
                spec.n_min = std::stoll(value);
            } else if (key == "trials") {
                spec.trials = std::stoi(value);
            } else if (key == "skeleton") {
                if (value == "oracle") spec.skeleton_mode = SkeletonSource::Mode::oracle;
                else if (value == "learned") spec.skeleton_mode = SkeletonSource::Mode::learned;
                else if (value == "file") spec.skeleton_mode = SkeletonSource::Mode::file;
                else throw UsageError("skeleton must be oracle|learned|file");
            } else if (key == "skeleton_file") {
                spec.skeleton_file = value;
            } else if (key == "methods") {
                spec.methods = split_list(value);
            } else if (key == "families") {
                spec.families = FamilyChoice::parse(value);
            } else if (key == "alpha") {
                spec.alpha = std::stod(value);
            } else if (key == "max_cond") {
                spec.max_conditioning = std::stoi(value);
            } else if (key == "overflow_cap") {
                spec.overflow_cap = std::stod(value);
            } else if (key == "max_retries") {
                spec.max_retries = std::stoi(value);
            } else if (key == "base_seed") {
                spec.base_seed = std::stoull(value);
            } else if (key == "out") {
                spec.output_path = value;
            } else {
                throw UsageError("unknown key '" + key + "'");
            }
        } catch (const UsageError&) {
            throw;
        } catch (const std::exception&) {
            throw UsageError(origin + ":" + std::to_string(line_no) + ": bad value for " + key);
        }
    }
    spec.validate();
    return spec;
}

SweepSpec parse_sweep_spec_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open sweep spec: " + path);
    return parse_sweep_spec(in, path);
}

std::uint64_t trial_seed(std::uint64_t base_seed, int trial, int p, std::int64_t n) {
    return derive_stream(base_seed, static_cast<std::uint64_t>(trial),
                         static_cast<std::uint64_t>(p), static_cast<std::uint64_t>(n));
}

const char* const kRunRecordHeader =
    "trial,p,n,d,r,method,skeleton_mode,precision,recall,mec_precision,mec_recall,"
    "ordering_precision,step1_seconds,step2_seconds";

std::string format_run_record(const RunRecord& rec) {
    char buf[512];
    std::snprintf(buf, sizeof(buf), "%d,%d,%lld,%d,%d,%s,%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f",
                  rec.trial, rec.p, static_cast<long long>(rec.n), rec.d, rec.r,
                  rec.method.c_str(), rec.skeleton_mode.c_str(), rec.precision, rec.recall,
                  rec.mec_precision, rec.mec_recall, rec.ordering_precision, rec.step1_seconds,
                  rec.step2_seconds);
    return buf;
}

namespace {

const char* skeleton_mode_name(SkeletonSource::Mode mode) {
    switch (mode) {
        case SkeletonSource::Mode::oracle: return "oracle";
        case SkeletonSource::Mode::learned: return "learned";
        case SkeletonSource::Mode::file: return "file";
    }
    return "?";
}

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// One (p, n, trial) cell of the grid; produces rows for every (method, r).
struct SweepJob {
    int p;
    std::int64_t n;
    int trial;
};

std::vector<RunRecord> run_sweep_job(const SweepSpec& spec, const SweepJob& job) {
    const std::uint64_t seed = trial_seed(spec.base_seed, job.trial, job.p, job.n);
    const Dag dag = random_dag(job.p, spec.d, default_edge_probability(job.p, spec.d),
                               derive_stream(seed, 0));
    const ModelAndData generated = regenerate_until_valid(dag, spec.model_kind, job.n,
                                                          derive_stream(seed, 1),
                                                          spec.max_retries, spec.overflow_cap);

    SkeletonSource source;
    switch (spec.skeleton_mode) {
        case SkeletonSource::Mode::oracle: source = SkeletonSource::oracle(); break;
        case SkeletonSource::Mode::file: source = SkeletonSource::file(spec.skeleton_file); break;
        case SkeletonSource::Mode::learned: {
            CiConfig ci;
            ci.alpha = spec.alpha;
            ci.max_conditioning = spec.max_conditioning;
            source = SkeletonSource::learned(ci);
            break;
        }
    }
    const auto t0 = std::chrono::steady_clock::now();
    const Skeleton skeleton = resolve_skeleton(source, generated.data, &dag);
    const double step1 = seconds_since(t0);

    std::vector<RunRecord> rows;
    for (const std::string& method : spec.methods) {
        for (int r : spec.r_grid) {
            RunRecord rec;
            rec.trial = job.trial;
            rec.p = job.p;
            rec.n = job.n;
            rec.d = spec.d;
            rec.r = r;
            rec.method = method;
            rec.skeleton_mode = skeleton_mode_name(spec.skeleton_mode);
            rec.step1_seconds = step1;

            Ordering ordering{{0}};
            const auto t1 = std::chrono::steady_clock::now();
            if (method == "mrs") {
                ScoreConfig cfg;
                cfg.r = r;
                cfg.n_min = spec.n_min;
                cfg.families = resolve_families(spec.families, generated.data, &generated.model);
                ordering = estimate_ordering(generated.data, skeleton, cfg).ordering;
            } else if (method == "ods") {
                ordering = ods_ordering(generated.data, skeleton, spec.n_min);
            } else {  // random permutation baseline
                SplitMix64 rng(derive_stream(seed, 2, static_cast<std::uint64_t>(r)));
                std::vector<int> seq(job.p);
                for (int i = 0; i < job.p; ++i) seq[i] = i;
                for (int i = job.p - 1; i > 0; --i) {
                    const int k = static_cast<int>(uniform_int(rng, 0, i));
                    std::swap(seq[i], seq[k]);
                }
                ordering = Ordering(seq);
            }
            rec.step2_seconds = seconds_since(t1);

            const Dag est = orient_edges(skeleton, ordering);
            const EdgeMetrics dm = dag_metrics(dag, est);
            const EdgeMetrics mm = mec_metrics(dag, est);
            rec.precision = dm.precision;
            rec.recall = dm.recall;
            rec.mec_precision = mm.precision;
            rec.mec_recall = mm.recall;
            rec.ordering_precision = ordering_precision(dag, ordering);
            rows.push_back(std::move(rec));
        }
    }
    return rows;
}

std::int64_t count_existing_rows(const std::string& path) {
    std::ifstream in(path);
    if (!in) return -1;
    std::string line;
    if (!std::getline(in, line)) return -1;
    if (line != kRunRecordHeader) return -1;
    std::int64_t rows = 0;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    return rows;
}

}  // namespace

std::vector<RunRecord> run_sweep(const SweepSpec& spec, int jobs, bool resume,
                                 std::ostream* progress) {
    spec.validate();

    // Canonical job order: (p, n, trial); each job emits methods x r rows in
    // a fixed order, so rows land sorted by (p, n, trial, method, r).
    std::vector<SweepJob> grid;
    for (int p : spec.p_grid)
        for (std::int64_t n : spec.n_grid)
            for (int trial = 0; trial < spec.trials; ++trial) grid.push_back({p, n, trial});
    const std::int64_t rows_per_job =
        static_cast<std::int64_t>(spec.methods.size()) * static_cast<std::int64_t>(spec.r_grid.size());

    std::int64_t skip_jobs = 0;
    std::ofstream out;
    if (!spec.output_path.empty()) {
        std::int64_t existing = resume ? count_existing_rows(spec.output_path) : -1;
        if (existing > 0) {
            skip_jobs = existing / rows_per_job;  // recompute any partial trailing job
            skip_jobs = std::min<std::int64_t>(skip_jobs, static_cast<std::int64_t>(grid.size()));
        }
        if (skip_jobs > 0) {
            // Truncate to the last complete job boundary, then append.
            std::ifstream in(spec.output_path);
            std::string line;
            std::getline(in, line);
            std::vector<std::string> keep;
            for (std::int64_t i = 0; i < skip_jobs * rows_per_job && std::getline(in, line); ++i)
                keep.push_back(line);
            in.close();
            out.open(spec.output_path, std::ios::trunc);
            if (!out) throw DataError("cannot write sweep output: " + spec.output_path);
            out << kRunRecordHeader << "\n";
            for (const auto& l : keep) out << l << "\n";
            out.flush();
        } else {
            out.open(spec.output_path, std::ios::trunc);
            if (!out) throw DataError("cannot write sweep output: " + spec.output_path);
            out << kRunRecordHeader << "\n";
            out.flush();
        }
    }

    const int total = static_cast<int>(grid.size());
    std::vector<std::vector<RunRecord>> results(total);
    std::vector<char> done(total, 0);
    std::int64_t next_to_write = skip_jobs;

#pragma omp parallel for schedule(dynamic) num_threads(std::max(1, jobs)) if (jobs > 1)
    for (int idx = static_cast<int>(skip_jobs); idx < total; ++idx) {
        auto rows = run_sweep_job(spec, grid[idx]);
#pragma omp critical(sweep_writer)
        {
            results[idx] = std::move(rows);
            done[idx] = 1;
            // Flush every finished job that is next in canonical order.
            while (next_to_write < total && done[next_to_write]) {
                if (out.is_open()) {
                    for (const auto& rec : results[next_to_write])
                        out << format_run_record(rec) << "\n";
                    out.flush();
                }
                if (progress)
                    *progress << "sweep: " << (next_to_write + 1) << "/" << total << " jobs\n";
                ++next_to_write;
            }
        }
    }

    std::vector<RunRecord> all;
    for (int idx = static_cast<int>(skip_jobs); idx < total; ++idx)
        for (auto& rec : results[idx]) all.push_back(std::move(rec));
    return all;
}

std::vector<BenchRecord> run_bench(const std::vector<int>& p_grid,
                                   const std::vector<std::int64_t>& n_grid, std::uint64_t seed,
                                   int reps) {
    if (p_grid.empty() || n_grid.empty()) throw UsageError("bench: empty grid");
    if (reps < 1) throw UsageError("bench: reps must be >= 1");

    std::vector<int> ps = p_grid;
    std::vector<std::int64_t> ns = n_grid;
    std::sort(ps.begin(), ps.end());
    std::sort(ns.begin(), ns.end());

    // Repeat each phase until a measurement is at least ~50 ms so the
    // medians are not timer noise.
    auto timed = [](auto&& fn) {
        int inner = 1;
        for (;;) {
            const auto t0 = std::chrono::steady_clock::now();
            for (int i = 0; i < inner; ++i) fn();
            const double elapsed = seconds_since(t0);
            if (elapsed >= 0.05 || inner >= 1024) return elapsed / inner;
            inner = std::min(1024,
                             inner * std::max(2, static_cast<int>(0.06 / std::max(elapsed, 1e-9))));
        }
    };

    std::vector<BenchRecord> records;
    for (int p : ps) {
        // One model per p, sampled at the largest n; smaller n cells reuse
        // row prefixes and the skeleton learned at the full size, so within a
        // p only the sample size varies across step-2 measurements.
        const std::uint64_t s = derive_stream(seed, static_cast<std::uint64_t>(p));
        const Dag dag = random_dag(p, 2, default_edge_probability(p, 2), derive_stream(s, 0));
        const ModelAndData gen =
            regenerate_until_valid(dag, ModelKind::poisson, ns.back(), derive_stream(s, 1));
        CiConfig ci;
        ScoreConfig cfg;
        const Skeleton skeleton = learn_skeleton(gen.data, ci);

        for (std::int64_t n : ns) {
            Dataset data;
            data.columns = gen.data.columns;
            for (const auto& col : gen.data.values)
                data.values.emplace_back(col.begin(), col.begin() + n);

            std::vector<double> t1(reps), t2(reps);
            for (int rep = 0; rep < reps; ++rep) {
                t1[rep] = timed([&] { learn_skeleton(data, ci); });
                t2[rep] = timed([&] { estimate_ordering(data, skeleton, cfg); });
            }
            records.push_back({p, n, *std::min_element(t1.begin(), t1.end()),
                               *std::min_element(t2.begin(), t2.end())});
        }
    }
    return records;
}

void write_bench_csv(const std::vector<BenchRecord>& records, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write bench output: " + path);
    out << "p,n,step1_seconds,step2_seconds\n";
    char buf[128];
    for (const auto& rec : records) {
        std::snprintf(buf, sizeof(buf), "%d,%lld,%.6f,%.6f", rec.p,
                      static_cast<long long>(rec.n), rec.step1_seconds, rec.step2_seconds);
        out << buf << "\n";
    }
}

}  // namespace mrs
