#include "nfnoma/config.hpp"
#include "nfnoma/csv.hpp"
#include "nfnoma/scenario.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct RunResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

fs::path scratch_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / "nfnoma_cli_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

RunResult run_cli(const std::string& args) {
    const fs::path out = scratch_dir() / "stdout.txt";
    const fs::path err = scratch_dir() / "stderr.txt";
    const std::string cmd = std::string(NFNOMA_CLI_BIN) + " " + args + " > " + out.string() +
                            " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    RunResult res;
    res.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    res.out = slurp(out);
    res.err = slurp(err);
    return res;
}

fs::path write_config(const std::string& name, const std::string& text) {
    const fs::path p = scratch_dir() / name;
    std::ofstream(p) << text;
    return p;
}

} // namespace

TEST_CASE("cli: synthetic two-user solve prints the closed-form powers") {
    const auto cfg = write_config("synthetic.cfg", R"(
[placement]
kind = synthetic
[synthetic]
a1h1 = 1
a0g1sq = 1
b0 = 2
[solve]
r0 = 1.3862943611198906
methods = oma, approach2, lemma2
)");
    const auto res = run_cli("solve --config " + cfg.string());
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("0.414213562") != std::string::npos);
    CHECK(res.out.find("0.914213562") != std::string::npos);
    CHECK(res.out.find("lemma2") != std::string::npos);
}

TEST_CASE("cli: zero target solves to zero power") {
    const auto cfg = write_config("zero.cfg", R"(
[placement]
kind = synthetic
[synthetic]
b0 = 2
[solve]
r0 = 0
methods = approach2
)");
    const auto res = run_cli("solve --config " + cfg.string());
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("energy=0 J") != std::string::npos);
}

TEST_CASE("cli: degenerate resolution grid at the focus") {
    const auto cfg = write_config("res.cfg", R"(
[geometry]
n_elements = 513
carrier_freq_hz = 28e9
[resolution]
focus = (5, 0.7853981633974483)
r_min_m = 5
r_max_m = 5
n_r = 1
angle_min_rad = 0.7853981633974483
angle_max_rad = 0.7853981633974483
n_angle = 1
)");
    const fs::path out = scratch_dir() / "grid.csv";
    const auto res = run_cli("resolution --config " + cfg.string() + " --out " + out.string());
    CHECK(res.exit_code == 0);
    CHECK(res.err.find("peak 1") != std::string::npos);
    const std::string csv = slurp(out);
    CHECK(csv.find("radius_m") == 0);
    CHECK(csv.find("\n5,1") != std::string::npos);
}

TEST_CASE("cli: sweep output matches the library byte for byte") {
    const std::string cfg_text = R"(
[solve]
beams = zf
r0_list = 2, 6
mx_list = 1, 3
methods = oma, approach2
trials = 1
seed = 9
)";
    const auto cfg = write_config("sweep.cfg", cfg_text);
    const fs::path out = scratch_dir() / "records.csv";
    const fs::path summary = scratch_dir() / "summary.csv";
    const auto res = run_cli("sweep --config " + cfg.string() + " --out " + out.string() +
                             " --summary " + summary.string());
    CHECK(res.exit_code == 0);

    const auto spec = nfnoma::scenario_from_config(nfnoma::Config::parse_string(cfg_text));
    const auto sweep = nfnoma::run_sweep(spec);
    std::ostringstream records_expect, summary_expect;
    nfnoma::write_records_csv(records_expect, sweep.records);
    nfnoma::write_summary_csv(summary_expect, nfnoma::summarize(sweep.records));
    CHECK(slurp(out) == records_expect.str());
    CHECK(slurp(summary) == summary_expect.str());
}

TEST_CASE("cli: table1 reports the inferred target rate") {
    const auto res = run_cli("table1");
    CHECK(res.exit_code == 0);
    CHECK(res.out.find("inferred R0 = 10 nats") != std::string::npos);
    CHECK(res.out.find("optimal (-80 dBm)") != std::string::npos);
    CHECK(res.out.find("approx  (-70 dBm)") != std::string::npos);
}

TEST_CASE("cli: exit codes") {
    SUBCASE("missing config file -> 2") {
        CHECK(run_cli("solve --config /nonexistent.cfg").exit_code == 2);
    }
    SUBCASE("malformed config -> 2") {
        const auto cfg = write_config("broken.cfg", "key without value\n");
        CHECK(run_cli("solve --config " + cfg.string()).exit_code == 2);
    }
    SUBCASE("unknown method -> 2") {
        const auto cfg = write_config("badmethod.cfg", "[solve]\nmethods = sorcery\n");
        CHECK(run_cli("sweep --config " + cfg.string() + " --out /dev/null").exit_code == 2);
    }
    SUBCASE("--set of an unknown key -> 2") {
        const auto cfg = write_config("setkey.cfg", "[signal]\np_dbm = 10\n");
        CHECK(run_cli("solve --config " + cfg.string() + " --set signal.bogus=1").exit_code == 2);
    }
    SUBCASE("unwritable output -> 4") {
        const auto cfg = write_config("okay.cfg", "[solve]\nmethods = oma\nr0_list = 2\n");
        CHECK(run_cli("sweep --config " + cfg.string() +
                      " --out /nonexistent-dir/records.csv")
                  .exit_code == 4);
    }
    SUBCASE("rank-deficient ZF instance -> 3") {
        const auto cfg = write_config("rankdef.cfg", R"(
[placement]
kind = deterministic
legacy = (5, 0.785); (5, 0.785)
far = (200, 0.785)
[solve]
beams = zf
methods = approach2
r0 = 4
)");
        const auto res = run_cli("solve --config " + cfg.string());
        CHECK(res.exit_code == 3);
        CHECK(res.err.find("solver error") != std::string::npos);
    }
    SUBCASE("missing required --config -> 2") {
        CHECK(run_cli("sweep").exit_code == 2);
    }
    SUBCASE("unknown subcommand -> 2") {
        CHECK(run_cli("transmogrify").exit_code == 2);
    }
    SUBCASE("--help -> 0") {
        const auto res = run_cli("--help");
        CHECK(res.exit_code == 0);
        CHECK(res.out.find("resolution") != std::string::npos);
    }
}
