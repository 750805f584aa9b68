// Exercises the command-line front end end to end. argv[1] is the path to the
// gfd binary; everything runs against a throwaway directory in the build tree.
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "cli_helpers.hpp"

namespace fs = std::filesystem;
using cli_test::Csv;
using cli_test::num;
using cli_test::read_csv;
using cli_test::read_file;
using cli_test::run;

namespace {

int failures = 0;

void check(bool ok, const std::string& what) {
    std::cout << (ok ? "ok   " : "FAIL ") << what << "\n";
    if (!ok) ++failures;
}

std::string smoke_flags(int seed, const std::string& out) {
    return " --seed " + std::to_string(seed) +
           " --iterations 40 --law-param 20 --interior-nodes 4096 --boundary-nodes 512"
           " --gram-nodes 4096 --error-nodes 2048 --grid 21 --out " + out;
}

}  // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::cerr << "usage: test_cli <path-to-gfd>\n";
        return 2;
    }
    const std::string gfd = argv[1];
    const std::string base = "cli-test-out";
    fs::remove_all(base);
    fs::create_directories(base);

    // basic heat run: files, formats, learning curve
    {
        const int rc = run(gfd + " heat" + smoke_flags(1, base + "/heat1"));
        check(rc == 0, "heat smoke run exits 0");
        const Csv curve = read_csv(base + "/heat1/curve.csv");
        check(curve.header ==
                  std::vector<std::string>{"n", "risk", "l2_error_to_exact", "k_sampled",
                                           "grad_norm"},
              "heat curve header");
        check(curve.rows.size() == 40, "heat curve has one row per iteration");
        bool finite = true;
        for (const auto& r : curve.rows) finite = finite && std::isfinite(num(r[1]));
        check(finite, "risk column is finite");
        check(num(curve.rows.back()[1]) < num(curve.rows.front()[1]), "risk decreased");
        const Csv sol = read_csv(base + "/heat1/solution.csv");
        check(sol.header == std::vector<std::string>{"t", "x", "u"}, "solution header");
        check(sol.rows.size() == 21 * 21, "solution grid rows = grid^2");
        const std::string meta = read_file(base + "/heat1/meta.txt");
        check(meta.find("seed=1") != std::string::npos, "meta records the seed");
        check(meta.find("exit-code=0") != std::string::npos, "meta records the exit code");
    }

    // determinism: identical config, byte-identical curve
    {
        run(gfd + " heat" + smoke_flags(1, base + "/heat2"));
        check(read_file(base + "/heat1/curve.csv") == read_file(base + "/heat2/curve.csv"),
              "rerun with the same seed is byte-identical");
        run(gfd + " heat" + smoke_flags(2, base + "/heat3"));
        check(read_file(base + "/heat1/curve.csv") != read_file(base + "/heat3/curve.csv"),
              "different seed changes the curve");
    }

    // gram cache: second run loads the saved matrix and reproduces the output
    {
        const std::string cache = base + "/gram.txt";
        run(gfd + " heat" + smoke_flags(3, base + "/heatc1") + " --gram-cache " + cache);
        check(fs::exists(cache), "gram cache file written");
        const int rc = run(gfd + " heat" + smoke_flags(3, base + "/heatc2") + " --gram-cache " +
                           cache);
        check(rc == 0, "run with warm gram cache exits 0");
        check(read_file(base + "/heatc1/curve.csv") == read_file(base + "/heatc2/curve.csv"),
              "warm gram cache reproduces the curve");
    }

    // config file with flag override
    {
        std::ofstream cfg(base + "/run.cfg");
        cfg << "iterations=10\nlaw-param=20\ninterior-nodes=4096\nboundary-nodes=512\n"
               "gram-nodes=4096\nerror-nodes=2048\ngrid=21\n";
        cfg.close();
        const int rc = run(gfd + " heat --config " + base + "/run.cfg --out " + base + "/heatcfg");
        check(rc == 0, "config-file run exits 0");
        check(read_file(base + "/heatcfg/meta.txt").find("iterations=10") != std::string::npos,
              "config file sets iterations");
        run(gfd + " heat --config " + base + "/run.cfg --iterations 5 --out " + base +
            "/heatovr");
        check(read_file(base + "/heatovr/meta.txt").find("iterations=5") != std::string::npos,
              "flag overrides the config file");
    }

    // error handling
    {
        check(run(gfd + " heat --law bogus --out " + base + "/bad") == 1,
              "unknown law exits 1");
        check(run(gfd + " heat --step -1 --out " + base + "/bad") == 1,
              "nonpositive step exits 1");
        check(run(gfd) == 1, "missing subcommand exits 1");
    }

    // unit-lambda run still writes a complete record and a documented exit code
    {
        const int rc = run(gfd + " heat" + smoke_flags(1, base + "/heatu") + " --lambda unit");
        check(rc == 0 || rc == 2, "unit-lambda heat exits 0 or 2");
        const Csv curve = read_csv(base + "/heatu/curve.csv");
        check(!curve.rows.empty() && curve.rows.size() <= 40,
              "unit-lambda curve has at most one row per iteration");
    }

    // hjb smoke run: extra control grid
    {
        const int rc = run(gfd + " hjb --seed 1 --iterations 20 --law-param 20"
                           " --interior-nodes 4096 --boundary-nodes 512 --gram-nodes 4096"
                           " --error-nodes 2048 --grid 13 --out " + base + "/hjb");
        check(rc == 0, "hjb smoke run exits 0");
        const Csv curve = read_csv(base + "/hjb/curve.csv");
        check(curve.header ==
                  std::vector<std::string>{"n", "risk", "terminal_error", "k_sampled"},
              "hjb curve header");
        check(curve.rows.size() == 20, "hjb curve rows");
        const Csv ctrl = read_csv(base + "/hjb/control.csv");
        check(ctrl.header == std::vector<std::string>{"t", "x", "c_star"}, "control header");
        check(ctrl.rows.size() == 13 * 13, "control grid rows = grid^2");
        bool in_range = true;
        for (const auto& r : ctrl.rows) {
            const double c = num(r[2]);
            in_range = in_range && c >= -0.5 - 1e-12 && c <= 0.5 + 1e-12;
        }
        check(in_range, "controls clamped to [-0.5, 0.5]");
    }

    // verify subcommand: csv format and the unit-lambda negative control
    {
        const std::string fast =
            " --unbiased-replicates 3000 --moment-replicates 3000 --bound-replicates 3000"
            " --rate-replicates 2 --fourth-moment-samples 20000";
        const int rc = run(gfd + " verify" + fast + " --out " + base + "/ver");
        check(rc == 0 || rc == 3, "verify exits 0 or 3");
        const Csv checks = read_csv(base + "/ver/checks.csv");
        check(checks.header ==
                  std::vector<std::string>{"check", "statistic", "threshold", "pass"},
              "checks.csv header");
        check(checks.rows.size() == 13, "13 check rows");

        const int rcu = run(gfd + " verify" + fast + " --lambda unit --out " + base + "/veru");
        check(rcu == 3, "unit-lambda verify fails with exit 3");
        const Csv broken = read_csv(base + "/veru/checks.csv");
        int failed_bounds = 0;
        for (const auto& r : broken.rows)
            if (r[0].rfind("variance_bound", 0) == 0 && r[3] == "fail") ++failed_bounds;
        check(failed_bounds == 3, "unit lambda breaks every variance-bound row");
    }

    std::cout << (failures == 0 ? "ALL OK" : "FAILURES: " + std::to_string(failures)) << "\n";
    return failures == 0 ? 0 : 1;
}
