// SPDX-License-Identifier: Apache-2.0
//
// nfnoma - near-field hybrid-NOMA downlink simulator and power allocation solvers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "nfnoma/config.hpp"
#include "nfnoma/csv.hpp"
#include "nfnoma/scenario.hpp"

#include <CLI11.hpp>

#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitSolver = 3;
constexpr int kExitIo = 4;

struct CommonArgs {
    std::string config_path;
    std::string out_path;
    std::vector<std::string> overrides;
    std::optional<std::uint64_t> seed;
    bool verbose = false;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool config_required) {
    auto* copt = cmd->add_option("--config", args.config_path, "configuration file");
    if (config_required)
        copt->required();
    cmd->add_option("--out", args.out_path, "output CSV path");
    cmd->add_option("--set", args.overrides, "override a config key: --set section.key=value");
    cmd->add_option("--seed", args.seed, "override the random seed");
    cmd->add_flag("--verbose", args.verbose, "print extra diagnostics");
}

nfnoma::Config load_config(const CommonArgs& args) {
    nfnoma::Config cfg = args.config_path.empty()
                             ? nfnoma::Config::parse_string("")
                             : nfnoma::Config::parse_file(args.config_path);
    for (const auto& kv : args.overrides) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw nfnoma::ConfigError("--set expects key=value, got '" + kv + "'");
        cfg.override_existing(kv.substr(0, eq), kv.substr(eq + 1));
    }
    return cfg;
}

void print_result_line(std::ostream& os, const std::string& method,
                       const nfnoma::AllocationResult<double>& res) {
    os << "  " << std::left << std::setw(10) << method << std::right << "  mode="
       << nfnoma::mode_name(res.mode) << "  energy=" << nfnoma::format_number(res.total_energy)
       << " J  P0=" << nfnoma::format_number(res.powers.final_slot)
       << " W  residual=" << nfnoma::format_number(res.constraint_residual) << " nats";
    if (std::isfinite(res.dual_multiplier))
        os << "  lambda=" << nfnoma::format_number(res.dual_multiplier);
    os << "\n              powers = [";
    for (Eigen::Index m = 0; m < res.powers.per_beam.size(); ++m)
        os << (m ? ", " : "") << nfnoma::format_number(res.powers.per_beam(m));
    os << "] W\n";
}

int cmd_resolution(const CommonArgs& args) {
    const nfnoma::Config cfg = load_config(args);
    const auto n = cfg.get_int("geometry.n_elements", 513);
    const double fc = cfg.get_double("geometry.carrier_freq_hz", 28e9);
    const double spacing = cfg.get_double("geometry.spacing_m", 0.0);
    const auto geom = spacing > 0 ? nfnoma::build_geometry<double>(n, fc, spacing)
                                  : nfnoma::build_half_wavelength_geometry<double>(n, fc);
    const auto foci = cfg.get_point_list("resolution.focus");
    const auto grid_spec = nfnoma::grid_from_config(cfg);
    const auto grid = nfnoma::resolution_grid(geom, foci, grid_spec);

    if (args.out_path.empty()) {
        nfnoma::write_grid_csv(std::cout, grid);
    } else {
        auto os = nfnoma::open_output(args.out_path);
        nfnoma::write_grid_csv(os, grid);
    }
    const auto [pr, pa] = grid.peak();
    std::cerr << "peak " << nfnoma::format_number(grid.values(pr, pa)) << " at radius "
              << nfnoma::format_number(grid.radii(pr)) << " m, angle "
              << nfnoma::format_number(grid.angles(pa)) << " rad\n";
    return kExitOk;
}

int cmd_solve(const CommonArgs& args) {
    const nfnoma::Config cfg = load_config(args);
    const double r0 = nfnoma::parse_rate(cfg, "solve.r0", "solve.r0_unit", 10.0);

    std::vector<std::pair<std::string, nfnoma::AllocationResult<double>>> results;

    if (cfg.get_string("placement.kind", "deterministic") == "synthetic") {
        // Raw two-user effective parameters, no geometry behind them.
        const auto params = nfnoma::synthetic_two_user_params(
            cfg.get_double("synthetic.a1h1", 1.0), cfg.get_double("synthetic.a0g1sq", 1.0),
            cfg.get_double("synthetic.b0"));
        const bool literal = cfg.get_bool("model.literal_thresholds", false);
        std::vector<std::string> methods = {"oma", "approach2", "lemma2"};
        if (cfg.has("solve.methods"))
            methods = cfg.get_string_list("solve.methods");
        for (const auto& name : methods) {
            switch (nfnoma::parse_method(name)) {
            case nfnoma::Method::oma:
                results.emplace_back(name, nfnoma::solve_oma_baseline(params, r0));
                break;
            case nfnoma::Method::lemma2:
                results.emplace_back(name, nfnoma::closed_form_two_user(params, r0, literal));
                break;
            case nfnoma::Method::lemma1:
                results.emplace_back(name,
                                     nfnoma::high_snr_closed_form(params, r0, {0}, literal));
                break;
            case nfnoma::Method::approach1:
            case nfnoma::Method::approach2: {
                const auto approach = name == "approach1" ? nfnoma::Approach::approach_1
                                                          : nfnoma::Approach::approach_2;
                nfnoma::AllocationProblem<double> prob{params, approach, r0, {0}, 1.0};
                results.emplace_back(name, approach == nfnoma::Approach::approach_1
                                               ? nfnoma::solve_approach1(prob)
                                               : nfnoma::solve_approach2(prob));
                break;
            }
            }
        }
        std::cout << "synthetic two-user instance: b0=" << cfg.get_double("synthetic.b0")
                  << ", R0=" << nfnoma::format_number(r0) << " nats\n";
    } else {
        nfnoma::ScenarioSpec spec = nfnoma::scenario_from_config(cfg);
        if (args.seed)
            spec.seed = *args.seed;
        const auto inst = nfnoma::build_instance(spec);
        const int mx = static_cast<int>(cfg.get_int("solve.mx", spec.num_legacy()));
        std::cout << "scenario: M=" << spec.num_legacy() << ", N=" << spec.n_elements
                  << ", beams=" << (spec.beam_kind == nfnoma::BeamKind::zero_forcing ? "zf" : "focus")
                  << ", P=" << nfnoma::watt_to_dbm(spec.p_legacy_w) << " dBm"
                  << ", noise=" << nfnoma::watt_to_dbm(spec.noise_w) << " dBm"
                  << ", Rt=" << nfnoma::format_number(spec.rate_target_nats) << " nats"
                  << ", R0=" << nfnoma::format_number(r0) << " nats, Mx=" << mx << "\n";
        for (const auto method : spec.methods)
            results.emplace_back(nfnoma::method_name(method),
                                 nfnoma::solve_method(inst, spec, method, r0, mx));
    }

    for (const auto& [name, res] : results)
        print_result_line(std::cout, name, res);

    if (!args.out_path.empty()) {
        auto os = nfnoma::open_output(args.out_path);
        os << nfnoma::kResultCsvHeader << '\n';
        for (const auto& [name, res] : results)
            nfnoma::write_result_csv_row(os, name, res);
    }
    return kExitOk;
}

int cmd_sweep(const CommonArgs& args, const std::string& summary_path) {
    const nfnoma::Config cfg = load_config(args);
    nfnoma::ScenarioSpec spec = nfnoma::scenario_from_config(cfg);
    if (args.seed)
        spec.seed = *args.seed;
    if (args.verbose)
        std::cerr << "sweep: " << spec.trials << " trial(s), " << spec.r0_list_nats.size()
                  << " R0 point(s), " << spec.mx_list.size() << " Mx value(s), "
                  << spec.methods.size() << " method(s)\n";

    const auto result = nfnoma::run_sweep(spec);
    if (args.out_path.empty()) {
        nfnoma::write_records_csv(std::cout, result.records);
    } else {
        auto os = nfnoma::open_output(args.out_path);
        nfnoma::write_records_csv(os, result.records);
    }
    const auto rows = nfnoma::summarize(result.records);
    if (!summary_path.empty()) {
        auto os = nfnoma::open_output(summary_path);
        nfnoma::write_summary_csv(os, rows);
    } else if (!args.out_path.empty()) {
        nfnoma::write_summary_csv(std::cout, rows);
    }
    if (result.failures > 0)
        std::cerr << "warning: " << result.failures << " record(s) failed\n";
    return kExitOk;
}

int cmd_table1(const CommonArgs& args) {
    const nfnoma::Config cfg = load_config(args);
    nfnoma::Table1Options opts;
    opts.beam_kind = nfnoma::parse_beam_kind(cfg.get_string("table1.beams", "zf"));
    if (cfg.has("table1.sigma_dbm"))
        opts.sigma_dbm = cfg.get_double_list("table1.sigma_dbm");
    opts.match_sigma_dbm = cfg.get_double("table1.match_sigma_dbm", -80.0);
    if (cfg.has("table1.target_row"))
        opts.target_row = cfg.get_double_list("table1.target_row");
    opts.r0_min_nats = cfg.get_double("table1.r0_min_nats", 6.0);
    opts.r0_max_nats = cfg.get_double("table1.r0_max_nats", 14.0);
    opts.r0_step_nats = cfg.get_double("table1.r0_step_nats", 0.01);
    opts.b0_literal = cfg.get_bool("model.b0_literal", false);
    opts.literal_thresholds = cfg.get_bool("model.literal_thresholds", false);

    const auto report = nfnoma::reproduce_table1(opts);
    std::cout << "inferred R0 = " << nfnoma::format_number(report.inferred_r0_nats)
              << " nats (target-row match error " << nfnoma::format_number(report.match_error)
              << " W)\n\n";
    std::cout << std::left << std::setw(22) << "power allocation (W)";
    for (std::size_t i = 1; i < opts.target_row.size(); ++i)
        std::cout << std::setw(11) << ("P_" + std::to_string(i));
    std::cout << std::setw(11) << "P_0" << std::setw(12) << "max|dev|" << "\n";
    for (const auto& row : report.rows) {
        std::ostringstream olabel, alabel;
        olabel << "optimal (" << row.sigma_dbm << " dBm)";
        alabel << "approx  (" << row.sigma_dbm << " dBm)";
        std::cout << std::left << std::setw(22) << olabel.str();
        for (const double p : row.optimal)
            std::cout << std::setw(11) << std::setprecision(4) << std::fixed << p;
        std::cout << std::defaultfloat << "\n" << std::setw(22) << alabel.str();
        for (const double p : row.approx)
            std::cout << std::setw(11) << std::setprecision(4) << std::fixed << p;
        std::cout << std::defaultfloat << std::setw(12)
                  << nfnoma::format_number(row.max_abs_deviation) << "\n";
    }

    if (!args.out_path.empty()) {
        auto os = nfnoma::open_output(args.out_path);
        os << "sigma_dbm,kind";
        for (std::size_t i = 1; i < opts.target_row.size(); ++i)
            os << ",p_" << i << "_w";
        os << ",p0_w,max_abs_dev_w\n";
        for (const auto& row : report.rows) {
            os << nfnoma::format_number(row.sigma_dbm) << ",optimal";
            for (const double p : row.optimal)
                os << ',' << nfnoma::format_number(p);
            os << ",\n" << nfnoma::format_number(row.sigma_dbm) << ",approx";
            for (const double p : row.approx)
                os << ',' << nfnoma::format_number(p);
            os << ',' << nfnoma::format_number(row.max_abs_deviation) << '\n';
        }
    }
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"near-field hybrid-NOMA simulator"};
    app.require_subcommand(1);

    CommonArgs res_args, solve_args, sweep_args, table_args;
    std::string summary_path;

    auto* resolution = app.add_subcommand("resolution", "beamfocusing resolution map as CSV");
    add_common(resolution, res_args, true);
    auto* solve = app.add_subcommand("solve", "one power-allocation instance");
    add_common(solve, solve_args, true);
    auto* sweep = app.add_subcommand("sweep", "energy sweeps over R0 / Mx with Monte Carlo trials");
    add_common(sweep, sweep_args, true);
    sweep->add_option("--summary", summary_path, "write the per-point summary CSV here");
    auto* table1 = app.add_subcommand("table1", "optimal vs high-SNR closed-form allocation table");
    add_common(table1, table_args, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }

    try {
        if (resolution->parsed())
            return cmd_resolution(res_args);
        if (solve->parsed())
            return cmd_solve(solve_args);
        if (sweep->parsed())
            return cmd_sweep(sweep_args, summary_path);
        if (table1->parsed())
            return cmd_table1(table_args);
    } catch (const nfnoma::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const nfnoma::IoError& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return kExitIo;
    } catch (const nfnoma::SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitOk;
}
