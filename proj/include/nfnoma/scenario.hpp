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

#ifndef NFNOMA_SCENARIO_HPP
#define NFNOMA_SCENARIO_HPP

#include "nfnoma/allocator.hpp"
#include "nfnoma/errors.hpp"
#include "nfnoma/rng.hpp"

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <string>
#include <tuple>
#include <vector>

namespace nfnoma {

// --- unit conversions --------------------------------------------------------

inline double dbm_to_watt(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
inline double watt_to_dbm(double watt) { return 10.0 * std::log10(watt) + 30.0; }
inline double bpcu_to_nats(double bpcu) { return bpcu * std::numbers::ln2; }
inline double nats_to_bpcu(double nats) { return nats / std::numbers::ln2; }

// --- experiment description ---------------------------------------------------

enum class PlacementKind { deterministic, random_halfring };
enum class RadialDensity { uniform_radius, uniform_area };
enum class Method { oma, approach1, approach2, lemma1, lemma2 };

inline const char* method_name(Method m) {
    switch (m) {
    case Method::oma: return "oma";
    case Method::approach1: return "approach1";
    case Method::approach2: return "approach2";
    case Method::lemma1: return "lemma1";
    case Method::lemma2: return "lemma2";
    }
    return "?";
}

struct ScenarioSpec {
    // geometry
    Eigen::Index n_elements = 513;
    double carrier_freq = 28e9; // Hz
    double spacing = 0;         // m; 0 means half a wavelength

    // placement
    PlacementKind placement = PlacementKind::deterministic;
    std::vector<PolarPoint<double>> legacy_points; // deterministic layouts
    PolarPoint<double> far_point{200.0, std::numbers::pi / 4};
    int legacy_count = 3; // random layouts
    double legacy_inner = 5.0, legacy_outer = 10.0;   // m
    double far_inner = 150.0, far_outer = 200.0;      // m
    RadialDensity radial_density = RadialDensity::uniform_radius;

    // link budget
    double p_legacy_w = dbm_to_watt(10.0);
    double noise_w = dbm_to_watt(-70.0);
    double rate_target_nats = bpcu_to_nats(4.0);

    // solve plan
    BeamKind beam_kind = BeamKind::beamfocusing;
    std::vector<int> mx_list = {3};
    std::vector<double> r0_list_nats = {10.0};
    std::vector<Method> methods = {Method::oma, Method::approach1, Method::approach2};
    int trials = 1;
    std::uint64_t seed = 1;
    double slot_duration = 1.0;
    double zf_condition_limit = 1e12;
    bool b0_literal = false;
    bool literal_thresholds = false;

    int num_legacy() const {
        return placement == PlacementKind::deterministic
                   ? static_cast<int>(legacy_points.size())
                   : legacy_count;
    }

    void validate() const {
        if (num_legacy() < 1)
            throw ConfigError("scenario: need at least one legacy user");
        if (placement == PlacementKind::random_halfring &&
            (!(legacy_inner < legacy_outer) || !(far_inner < far_outer) ||
             !(legacy_inner > 0) || !(far_inner > 0)))
            throw ConfigError("scenario: half-ring radii must satisfy 0 < inner < outer");
        if (trials < 1)
            throw ConfigError("scenario: trials must be >= 1");
        if (mx_list.empty() || r0_list_nats.empty() || methods.empty())
            throw ConfigError("scenario: mx_list, r0_list and methods must be non-empty");
        for (const int mx : mx_list)
            if (mx < 1 || mx > num_legacy())
                throw ConfigError("scenario: mx values must be in [1, M]");
        for (const Method m : methods)
            if (m == Method::lemma2 && num_legacy() != 1)
                throw ConfigError("scenario: lemma2 requires exactly one legacy user");
    }
};

// The deterministic line-of-users layout: three legacy users at 5, 10 and 40 m
// on the 45-degree ray, the far user at 200 m on the same ray, a 513-element
// half-wavelength ULA at 28 GHz, P = 10 dBm, noise -70 dBm, target 4 BPCU.
inline ScenarioSpec build_deterministic_scenario() {
    constexpr double ang = std::numbers::pi / 4;
    ScenarioSpec spec;
    spec.placement = PlacementKind::deterministic;
    spec.legacy_points = {{5.0, ang}, {10.0, ang}, {40.0, ang}};
    spec.far_point = {200.0, ang};
    return spec;
}

struct PlacementDraw {
    std::vector<PolarPoint<double>> legacy;
    PolarPoint<double> far;
};

// Placements for one Monte Carlo trial. Radius is uniform in [inner, outer]
// (or uniform in ring area when radial_density says so), angle uniform in
// (0, pi); each user draws (radius, angle) in order, legacy users first, from
// the trial's own generator stream, so draws are reproducible per (seed, trial)
// and independent across trials.
inline PlacementDraw sample_random_scenario(const ScenarioSpec& spec, int trial) {
    spec.validate();
    PlacementDraw draw;
    if (spec.placement == PlacementKind::deterministic) {
        draw.legacy = spec.legacy_points;
        draw.far = spec.far_point;
        return draw;
    }
    auto gen = make_stream(spec.seed, static_cast<std::uint64_t>(trial));
    const auto draw_radius = [&](double inner, double outer) {
        if (spec.radial_density == RadialDensity::uniform_area) {
            const double u = uniform_unit(gen);
            return std::sqrt(inner * inner + u * (outer * outer - inner * inner));
        }
        return uniform_range(gen, inner, outer);
    };
    const auto draw_point = [&](double inner, double outer) {
        PolarPoint<double> p;
        p.radius = draw_radius(inner, outer);
        p.angle = uniform_range(gen, 0.0, std::numbers::pi);
        return p;
    };
    draw.legacy.reserve(static_cast<std::size_t>(spec.legacy_count));
    for (int i = 0; i < spec.legacy_count; ++i)
        draw.legacy.push_back(draw_point(spec.legacy_inner, spec.legacy_outer));
    draw.far = draw_point(spec.far_inner, spec.far_outer);
    return draw;
}

// Channels, beams and effective gains of one concrete trial.
struct Instance {
    PlacementDraw placements;
    ArrayGeometry<double> geometry;
    ChannelSet<double> channels;
    BeamSet<double> beams;
    EffectiveParams<double> params;
};

inline Instance build_instance(const ScenarioSpec& spec, int trial = 0) {
    Instance inst;
    inst.geometry = spec.spacing > 0
                        ? build_geometry<double>(spec.n_elements, spec.carrier_freq, spec.spacing)
                        : build_half_wavelength_geometry<double>(spec.n_elements, spec.carrier_freq);
    inst.placements = sample_random_scenario(spec, trial);
    inst.channels = build_channel_set(inst.geometry, inst.placements.legacy, inst.placements.far);
    inst.beams = spec.beam_kind == BeamKind::zero_forcing
                     ? zf_beams(inst.channels, spec.zf_condition_limit)
                     : focus_beams(inst.geometry, inst.placements.legacy, inst.placements.far);
    inst.params = effective_params(inst.channels, inst.beams, spec.p_legacy_w, spec.noise_w,
                                   spec.rate_target_nats, spec.b0_literal);
    return inst;
}

// One solved point of a sweep.
struct SweepRecord {
    double r0_nats = 0;
    int mx = 0;
    int trial = 0;
    Method method = Method::oma;
    bool ok = false;
    double total_energy = 0;
    std::vector<double> powers; // per-beam, W
    double p0 = 0;              // W
    AllocationMode mode = AllocationMode::oma_fallback;
    double residual = 0; // nats
};

struct SweepResult {
    std::vector<SweepRecord> records;
    int failures = 0; // failed trials and failed individual solves
};

// Solves one method at one (r0, mx) point of an instance.
inline AllocationResult<double> solve_method(const Instance& inst, const ScenarioSpec& spec,
                                             Method method, double r0, int mx) {
    const auto& ep = inst.params;
    switch (method) {
    case Method::oma:
        return solve_oma_baseline(ep, r0, spec.slot_duration);
    case Method::lemma2:
        return closed_form_two_user(ep, r0, spec.literal_thresholds, spec.slot_duration);
    case Method::lemma1: {
        const auto sel = qualify_and_select(ep, mx, Approach::approach_2);
        return high_snr_closed_form(ep, r0, sel, spec.literal_thresholds, spec.slot_duration);
    }
    case Method::approach1:
    case Method::approach2: {
        const Approach approach =
            method == Method::approach1 ? Approach::approach_1 : Approach::approach_2;
        const auto sel = qualify_and_select(ep, mx, approach);
        if (sel.empty()) // no qualified beam: hybrid degenerates to OMA
            return solve_oma_baseline(ep, r0, spec.slot_duration);
        AllocationProblem<double> prob{ep, approach, r0, sel, spec.slot_duration};
        return approach == Approach::approach_1 ? solve_approach1(prob) : solve_approach2(prob);
    }
    }
    throw std::logic_error("solve_method: unhandled method");
}

// Full sweep: every (trial, r0, mx, method) combination in deterministic
// order. A trial whose channel build fails (e.g. a rank-deficient random
// placement under ZF) contributes failed records instead of aborting the
// sweep.
inline SweepResult run_sweep(const ScenarioSpec& spec) {
    spec.validate();
    SweepResult out;
    for (int trial = 0; trial < spec.trials; ++trial) {
        Instance inst;
        bool instance_ok = true;
        try {
            inst = build_instance(spec, trial);
        } catch (const SolverError&) {
            instance_ok = false;
        }
        for (const double r0 : spec.r0_list_nats) {
            for (const int mx : spec.mx_list) {
                for (const Method method : spec.methods) {
                    SweepRecord rec;
                    rec.r0_nats = r0;
                    rec.mx = mx;
                    rec.trial = trial;
                    rec.method = method;
                    if (instance_ok) {
                        try {
                            const auto res = solve_method(inst, spec, method, r0, mx);
                            rec.ok = true;
                            rec.total_energy = res.total_energy;
                            rec.powers.assign(res.powers.per_beam.begin(),
                                              res.powers.per_beam.end());
                            rec.p0 = res.powers.final_slot;
                            rec.mode = res.mode;
                            rec.residual = res.constraint_residual;
                        } catch (const SolverError&) {
                            rec.ok = false;
                        }
                    }
                    if (!rec.ok)
                        ++out.failures;
                    out.records.push_back(std::move(rec));
                }
            }
        }
    }
    return out;
}

// Monte Carlo mean and standard error of the total energy per sweep point.
struct SummaryRow {
    double r0_nats = 0;
    int mx = 0;
    Method method = Method::oma;
    int trials_ok = 0;
    int failures = 0;
    double mean_energy = 0;
    double stderr_energy = 0;
};

inline std::vector<SummaryRow> summarize(const std::vector<SweepRecord>& records) {
    std::map<std::tuple<double, int, int>, SummaryRow> acc;
    std::map<std::tuple<double, int, int>, std::vector<double>> samples;
    for (const auto& rec : records) {
        const auto key = std::make_tuple(rec.r0_nats, rec.mx, static_cast<int>(rec.method));
        auto& row = acc[key];
        row.r0_nats = rec.r0_nats;
        row.mx = rec.mx;
        row.method = rec.method;
        if (rec.ok)
            samples[key].push_back(rec.total_energy);
        else
            ++row.failures;
    }
    std::vector<SummaryRow> rows;
    rows.reserve(acc.size());
    for (auto& [key, row] : acc) {
        const auto& vals = samples[key];
        row.trials_ok = static_cast<int>(vals.size());
        if (!vals.empty()) {
            double sum = 0;
            for (const double v : vals)
                sum += v;
            row.mean_energy = sum / static_cast<double>(vals.size());
            if (vals.size() > 1) {
                double ss = 0;
                for (const double v : vals)
                    ss += (v - row.mean_energy) * (v - row.mean_energy);
                const double var = ss / static_cast<double>(vals.size() - 1);
                row.stderr_energy = std::sqrt(var / static_cast<double>(vals.size()));
            }
        }
        rows.push_back(row);
    }
    return rows;
}

// --- power-allocation table reproduction ---------------------------------------

// The deterministic three-user scenario solved at a few noise levels, optimal
// numerical allocation next to the high-SNR closed form. The far-user target
// rate is not part of the published table; it is inferred by sweeping R_0 and
// matching the optimal allocation against `target_row` at `match_sigma_dbm`.
struct Table1Options {
    BeamKind beam_kind = BeamKind::zero_forcing;
    std::vector<double> sigma_dbm = {-70.0, -80.0};
    double match_sigma_dbm = -80.0;
    std::vector<double> target_row = {0.0430, 0.0430, 0.0430, 0.1580}; // P_1..P_M, P_0
    double r0_min_nats = 6.0;
    double r0_max_nats = 14.0;
    double r0_step_nats = 0.01;
    bool b0_literal = false;
    bool literal_thresholds = false;
};

struct Table1Row {
    double sigma_dbm = 0;
    std::vector<double> optimal; // P_1..P_M then P_0
    std::vector<double> approx;  // same layout, high-SNR closed form
    double max_abs_deviation = 0;
};

struct Table1Report {
    double inferred_r0_nats = 0;
    double match_error = 0; // max |optimal - target| at the inferred R_0
    std::vector<Table1Row> rows;
};

inline Table1Report reproduce_table1(const Table1Options& opts = {}) {
    ScenarioSpec spec = build_deterministic_scenario();
    spec.beam_kind = opts.beam_kind;
    spec.b0_literal = opts.b0_literal;
    spec.literal_thresholds = opts.literal_thresholds;
    const int m = spec.num_legacy();
    if (static_cast<int>(opts.target_row.size()) != m + 1)
        throw ConfigError("table1: target row must list M per-beam powers plus P_0");

    const auto solve_point = [&](const Instance& inst, double r0) {
        const auto sel = qualify_and_select(inst.params, m, Approach::approach_2);
        AllocationProblem<double> prob{inst.params, Approach::approach_2, r0, sel, 1.0};
        return solve_approach2(prob);
    };
    const auto flatten = [m](const AllocationResult<double>& res) {
        std::vector<double> row(res.powers.per_beam.begin(), res.powers.per_beam.end());
        row.push_back(res.powers.final_slot);
        return row;
    };

    spec.noise_w = dbm_to_watt(opts.match_sigma_dbm);
    const Instance match_inst = build_instance(spec);

    Table1Report report;
    report.match_error = std::numeric_limits<double>::infinity();
    for (double r0 = opts.r0_min_nats; r0 <= opts.r0_max_nats + 1e-12; r0 += opts.r0_step_nats) {
        const auto row = flatten(solve_point(match_inst, r0));
        double err = 0;
        for (int i = 0; i <= m; ++i)
            err = std::max(err, std::abs(row[static_cast<std::size_t>(i)] -
                                         opts.target_row[static_cast<std::size_t>(i)]));
        if (err < report.match_error) {
            report.match_error = err;
            report.inferred_r0_nats = r0;
        }
    }

    for (const double sigma : opts.sigma_dbm) {
        spec.noise_w = dbm_to_watt(sigma);
        const Instance inst = build_instance(spec);
        Table1Row row;
        row.sigma_dbm = sigma;
        row.optimal = flatten(solve_point(inst, report.inferred_r0_nats));
        const auto sel = qualify_and_select(inst.params, m, Approach::approach_2);
        row.approx = flatten(high_snr_closed_form(inst.params, report.inferred_r0_nats, sel,
                                                  opts.literal_thresholds));
        for (std::size_t i = 0; i < row.optimal.size(); ++i)
            row.max_abs_deviation =
                std::max(row.max_abs_deviation, std::abs(row.optimal[i] - row.approx[i]));
        report.rows.push_back(std::move(row));
    }
    return report;
}

} // namespace nfnoma

#endif
