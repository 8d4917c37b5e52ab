#include "nfnoma/config.hpp"
#include "nfnoma/csv.hpp"

#include <doctest.h>

#include <numbers>
#include <sstream>

using namespace nfnoma;
using doctest::Approx;

TEST_CASE("config parsing") {
    const std::string text = R"(
# comment line
[geometry]
n_elements = 513          # trailing comment
carrier_freq_hz = 28e9

[placement]
kind = deterministic
legacy = (5, 0.7853981633974483); (10, 0.7853981633974483); (40, 0.7853981633974483)
far = (200, 0.7853981633974483)

[signal]
p_dbm = 10
noise_dbm = -70
rt = 4
rt_unit = bpcu

[solve]
beams = zf
r0_list = 2, 6, 10
r0_unit = nats
mx_list = 1, 3
methods = oma, approach2
trials = 5
seed = 42

[model]
b0_literal = false
)";
    const auto cfg = Config::parse_string(text);

    SUBCASE("raw access") {
        CHECK(cfg.get_int("geometry.n_elements") == 513);
        CHECK(cfg.get_double("geometry.carrier_freq_hz") == Approx(28e9));
        CHECK(cfg.get_string("placement.kind") == "deterministic");
        CHECK(cfg.get_bool("model.b0_literal", true) == false);
        CHECK(cfg.get_uint64("solve.seed", 0) == 42);
        CHECK(cfg.get_double("missing.key", 7.5) == 7.5);
        CHECK_THROWS_AS(cfg.get_double("missing.key"), ConfigError);
        const auto pts = cfg.get_point_list("placement.legacy");
        REQUIRE(pts.size() == 3);
        CHECK(pts[1].radius == 10.0);
        CHECK(pts[1].angle == Approx(std::numbers::pi / 4).epsilon(1e-15));
    }

    SUBCASE("scenario assembly") {
        const auto spec = scenario_from_config(cfg);
        CHECK(spec.n_elements == 513);
        CHECK(spec.placement == PlacementKind::deterministic);
        CHECK(spec.legacy_points.size() == 3);
        CHECK(spec.beam_kind == BeamKind::zero_forcing);
        CHECK(spec.p_legacy_w == Approx(0.01).epsilon(1e-12));
        CHECK(spec.noise_w == Approx(1e-10).epsilon(1e-12));
        CHECK(spec.rate_target_nats == Approx(4 * std::numbers::ln2).epsilon(1e-15));
        CHECK(spec.r0_list_nats == std::vector<double>{2.0, 6.0, 10.0});
        CHECK(spec.mx_list == std::vector<int>{1, 3});
        CHECK(spec.trials == 5);
        CHECK(spec.seed == 42);
        REQUIRE(spec.methods.size() == 2);
        CHECK(spec.methods[0] == Method::oma);
        CHECK(spec.methods[1] == Method::approach2);
    }

    SUBCASE("overrides only touch existing keys") {
        auto mut = cfg;
        mut.override_existing("signal.p_dbm", "20");
        CHECK(mut.get_double("signal.p_dbm") == 20.0);
        CHECK_THROWS_AS(mut.override_existing("signal.nonexistent", "1"), ConfigError);
    }

    SUBCASE("syntax errors carry the line") {
        CHECK_THROWS_AS(Config::parse_string("[unterminated\n"), ConfigError);
        CHECK_THROWS_AS(Config::parse_string("novalue\n"), ConfigError);
        CHECK_THROWS_AS(Config::parse_string("= 3\n"), ConfigError);
        CHECK_THROWS_WITH_AS(Config::parse_string("x = y\n[a]\nk ~ v\n"),
                             doctest::Contains(":3"), ConfigError);
    }

    SUBCASE("value conversion errors") {
        const auto bad = Config::parse_string("k = abc\nl = 1,2,x\np = (1)\n");
        CHECK_THROWS_AS(bad.get_double("k"), ConfigError);
        CHECK_THROWS_AS(bad.get_double_list("l"), ConfigError);
        CHECK_THROWS_AS(bad.get_point_list("p"), ConfigError);
        CHECK_THROWS_AS(bad.get_bool("k", false), ConfigError);
    }
}

TEST_CASE("rate and noise parsing rules") {
    SUBCASE("bpcu converts to nats") {
        const auto cfg = Config::parse_string("[solve]\nr0_list = 1, 2\nr0_unit = bpcu\n");
        const auto vals = parse_rate_list(cfg, "solve.r0_list", "solve.r0_unit");
        CHECK(vals[0] == Approx(std::numbers::ln2).epsilon(1e-15));
        CHECK(vals[1] == Approx(2 * std::numbers::ln2).epsilon(1e-15));
    }
    SUBCASE("unknown unit rejected") {
        const auto cfg = Config::parse_string("[solve]\nr0_list = 1\nr0_unit = bits\n");
        CHECK_THROWS_AS(parse_rate_list(cfg, "solve.r0_list", "solve.r0_unit"), ConfigError);
    }
    SUBCASE("positive noise dBm is negated with a warning") {
        std::ostringstream warnings;
        CHECK(parse_noise_dbm(70.0, warnings) == -70.0);
        CHECK(warnings.str().find("warning") != std::string::npos);
        std::ostringstream quiet;
        CHECK(parse_noise_dbm(-70.0, quiet) == -70.0);
        CHECK(quiet.str().empty());
    }
    SUBCASE("scenario rejects bad method names") {
        const auto cfg = Config::parse_string("[solve]\nmethods = oma, magic\n");
        CHECK_THROWS_AS(scenario_from_config(cfg), ConfigError);
    }
}

TEST_CASE("number formatting") {
    CHECK(format_number(0.25) == "0.25");
    CHECK(format_number(1e-10) == "1e-10");
    CHECK(format_number(0.0) == "0");
    CHECK(format_number(-3.5) == "-3.5");
    // 12 significant digits
    CHECK(format_number(std::numbers::pi) == "3.14159265359");
    CHECK(format_number(1234567890123.0) == "1.23456789012e+12");
}

TEST_CASE("csv writers") {
    SUBCASE("grid csv layout") {
        ResolutionGrid<double> grid;
        grid.radii = Eigen::Vector2d(1.0, 2.0);
        grid.angles = Eigen::Vector3d(0.1, 0.2, 0.3);
        grid.values.resize(2, 3);
        grid.values << 1, 2, 3, 4, 5, 6;
        std::ostringstream os;
        write_grid_csv(os, grid);
        CHECK(os.str() == "radius_m,0.1,0.2,0.3\n1,1,2,3\n2,4,5,6\n");
    }
    SUBCASE("sweep record row") {
        SweepRecord rec;
        rec.r0_nats = 2.5;
        rec.mx = 2;
        rec.trial = 7;
        rec.method = Method::approach2;
        rec.ok = true;
        rec.total_energy = 0.125;
        rec.powers = {0.5, 0.25};
        rec.p0 = 0.0625;
        rec.mode = AllocationMode::hybrid;
        rec.residual = 0.0;
        std::ostringstream os;
        write_records_csv(os, {rec});
        const std::string expect = std::string(kSweepCsvHeader) +
                                   "\n2.5,2,7,approach2,1,0.125,0.75,0.0625,hybrid,0,0.5;0.25\n";
        CHECK(os.str() == expect);
    }
    SUBCASE("missing directory raises IoError") {
        CHECK_THROWS_AS(open_output("/nonexistent-dir/x.csv"), IoError);
    }
}
