#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "mrs/errors.hpp"
#include "mrs/experiments.hpp"

using namespace mrs;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("mrs_exp_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path);
    out << content;
}

// Drop the two wall-clock columns so runs can be compared byte-wise.
std::string strip_timing(const std::string& content) {
    std::istringstream in(content);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        for (int i = 0; i < 2; ++i) {
            const auto pos = line.rfind(',');
            if (pos != std::string::npos) line.erase(pos);
        }
        out << line << "\n";
    }
    return out.str();
}

}  // namespace

TEST_CASE("family choice parsing") {
    CHECK(FamilyChoice::parse("true").kind == FamilyChoice::Kind::true_model);
    CHECK(FamilyChoice::parse("poisson").kind == FamilyChoice::Kind::poisson);
    CHECK(FamilyChoice::parse("auto-hyperpoisson").kind == FamilyChoice::Kind::auto_hyper_poisson);
    const FamilyChoice hp = FamilyChoice::parse("hyperpoisson:2.5");
    CHECK(hp.kind == FamilyChoice::Kind::hyper_poisson_fixed);
    CHECK(hp.b == 2.5);
    CHECK_THROWS_AS(FamilyChoice::parse("gamma"), UsageError);
    CHECK_THROWS_AS(FamilyChoice::parse("hyperpoisson:-1"), UsageError);
}

TEST_CASE("sweep spec parsing and validation") {
    std::istringstream in(
        "# comment\n"
        "model = hybrid\n"
        "p = 5, 10\n"
        "n = 100,200\n"
        "r = 2,3\n"
        "trials = 4\n"
        "skeleton = oracle\n"
        "methods = mrs, random\n"
        "families = true\n"
        "base_seed = 7\n"
        "out = /tmp/x.csv\n");
    const SweepSpec spec = parse_sweep_spec(in, "test");
    CHECK(spec.model_kind == ModelKind::hybrid);
    CHECK(spec.p_grid == std::vector<int>{5, 10});
    CHECK(spec.n_grid == std::vector<std::int64_t>{100, 200});
    CHECK(spec.r_grid == std::vector<int>{2, 3});
    CHECK(spec.trials == 4);
    CHECK(spec.methods == std::vector<std::string>{"mrs", "random"});
    CHECK(spec.base_seed == 7);

    std::istringstream bad("p = 5\nn = 100\nmethods = magic\nout = x\n");
    CHECK_THROWS_AS(parse_sweep_spec(bad, "test"), UsageError);
    std::istringstream nogrid("n = 100\nout = x\n");
    CHECK_THROWS_AS(parse_sweep_spec(nogrid, "test"), UsageError);
}

TEST_CASE("trial seeds differ across the tuple") {
    CHECK(trial_seed(1, 0, 10, 100) != trial_seed(1, 1, 10, 100));
    CHECK(trial_seed(1, 0, 10, 100) != trial_seed(1, 0, 20, 100));
    CHECK(trial_seed(1, 0, 10, 100) != trial_seed(1, 0, 10, 200));
    CHECK(trial_seed(1, 0, 10, 100) == trial_seed(1, 0, 10, 100));
}

TEST_CASE("run_sweep produces canonical deterministic rows") {
    SweepSpec spec;
    spec.model_kind = ModelKind::poisson;
    spec.p_grid = {6};
    spec.n_grid = {200, 400};
    spec.r_grid = {2};
    spec.trials = 3;
    spec.methods = {"mrs", "random"};
    spec.skeleton_mode = SkeletonSource::Mode::oracle;
    spec.families = FamilyChoice::parse("true");
    spec.base_seed = 11;

    const auto rows1 = run_sweep(spec, 1);
    const auto rows2 = run_sweep(spec, 2);
    REQUIRE(rows1.size() == 2 * 3 * 2);
    REQUIRE(rows2.size() == rows1.size());
    for (size_t i = 0; i < rows1.size(); ++i) {
        CHECK(rows1[i].method == rows2[i].method);
        CHECK(rows1[i].n == rows2[i].n);
        CHECK(rows1[i].trial == rows2[i].trial);
        CHECK(rows1[i].precision == rows2[i].precision);
        CHECK(rows1[i].ordering_precision == rows2[i].ordering_precision);
    }
    // canonical order: n major (single p), then trial, then method order as given
    CHECK(rows1[0].n == 200);
    CHECK(rows1[0].trial == 0);
    CHECK(rows1[0].method == "mrs");
    CHECK(rows1[1].method == "random");
    CHECK(rows1.back().n == 400);
    for (const auto& rec : rows1) {
        CHECK(rec.precision >= 0.0);
        CHECK(rec.precision <= 1.0);
        CHECK(rec.recall >= 0.0);
        CHECK(rec.recall <= 1.0);
        CHECK(rec.mec_precision >= 0.0);
        CHECK(rec.mec_precision <= 1.0);
        CHECK(rec.ordering_precision >= 0.0);
        CHECK(rec.ordering_precision <= 1.0);
        CHECK(rec.step1_seconds >= 0.0);
        CHECK(rec.step2_seconds >= 0.0);
    }
}

TEST_CASE("run_sweep writes, flushes and resumes by row count") {
    TempDir dir;
    SweepSpec spec;
    spec.p_grid = {5};
    spec.n_grid = {150};
    spec.r_grid = {2};
    spec.trials = 4;
    spec.methods = {"mrs"};
    spec.skeleton_mode = SkeletonSource::Mode::oracle;
    spec.base_seed = 3;
    spec.output_path = dir.file("sweep.csv");

    run_sweep(spec, 1);
    const std::string full = read_file(spec.output_path);

    // truncate to the header + first two rows, then resume
    std::istringstream in(full);
    std::string line;
    std::ostringstream truncated;
    for (int i = 0; i < 3 && std::getline(in, line); ++i) truncated << line << "\n";
    write_file(spec.output_path, truncated.str());
    run_sweep(spec, 1, /*resume=*/true);
    CHECK(strip_timing(read_file(spec.output_path)) == strip_timing(full));
}

TEST_CASE("run_record formatting is stable") {
    RunRecord rec;
    rec.trial = 1;
    rec.p = 20;
    rec.n = 1000;
    rec.d = 2;
    rec.r = 2;
    rec.method = "mrs";
    rec.skeleton_mode = "oracle";
    rec.precision = 0.5;
    rec.recall = 0.25;
    rec.mec_precision = 1.0;
    rec.mec_recall = 0.75;
    rec.ordering_precision = 0.125;
    rec.step1_seconds = 0.001;
    rec.step2_seconds = 0.002;
    CHECK(format_run_record(rec) ==
          "1,20,1000,2,2,mrs,oracle,0.500000,0.250000,1.000000,0.750000,0.125000,0.001000,0.002000");
    CHECK(std::string(kRunRecordHeader).substr(0, 5) == "trial");
}

TEST_CASE("ingest drops named columns and keeps the count matrix") {
    TempDir dir;
    const std::string path = dir.file("stats.csv");
    {
        std::ofstream out(path);
        // 24 columns; six are non-count identity/position fields
        out << "name,team,position,league,coach,venue";
        for (int c = 0; c < 18; ++c) out << ",s" << c;
        out << "\n";
        for (int row = 0; row < 4; ++row) {
            out << "p" << row << ",t,G,L,c,v";
            for (int c = 0; c < 18; ++c) out << "," << (row + c);
            out << "\n";
        }
    }
    std::ostringstream warnings;
    const Dataset data = ingest_real_csv(
        path, {"name", "team", "position", "league", "coach", "venue"}, &warnings);
    CHECK(data.p() == 18);
    CHECK(data.n() == 4);
    CHECK(warnings.str().empty());
    CHECK(data.columns[0] == "s0");
    CHECK(data.values[2][1] == 3);

    // unknown drop name warns but does not fail
    std::ostringstream warn2;
    ingest_real_csv(path, {"name", "team", "position", "league", "coach", "venue", "ghost"},
                    &warn2);
    CHECK(warn2.str().find("ghost") != std::string::npos);
}

TEST_CASE("run_bench output is sorted by (p, n)") {
    const auto records = run_bench({10, 5}, {200, 100}, 1, 1);
    REQUIRE(records.size() == 4);
    CHECK(records[0].p == 5);
    CHECK(records[0].n == 100);
    CHECK(records[1].n == 200);
    CHECK(records[2].p == 10);
    for (const auto& rec : records) {
        CHECK(rec.step1_seconds > 0.0);
        CHECK(rec.step2_seconds > 0.0);
    }
}
