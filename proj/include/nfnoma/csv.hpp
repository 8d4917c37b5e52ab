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

#ifndef NFNOMA_CSV_HPP
#define NFNOMA_CSV_HPP

#include "nfnoma/errors.hpp"
#include "nfnoma/geometry.hpp"
#include "nfnoma/scenario.hpp"

#include <charconv>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace nfnoma {

// 12 significant digits, '.' decimal separator, locale-independent.
inline std::string format_number(double v) {
    char buf[40];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 12);
    return std::string(buf, res.ptr);
}

inline std::string join_powers(const std::vector<double>& powers) {
    std::string out;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        if (i)
            out += ';';
        out += format_number(powers[i]);
    }
    return out;
}

// Header row carries the angular samples, first column the radial samples.
inline void write_grid_csv(std::ostream& os, const ResolutionGrid<double>& grid) {
    os << "radius_m";
    for (Eigen::Index a = 0; a < grid.angles.size(); ++a)
        os << ',' << format_number(grid.angles(a));
    os << '\n';
    for (Eigen::Index r = 0; r < grid.radii.size(); ++r) {
        os << format_number(grid.radii(r));
        for (Eigen::Index a = 0; a < grid.angles.size(); ++a)
            os << ',' << format_number(grid.values(r, a));
        os << '\n';
    }
}

inline const char* mode_name(AllocationMode mode) {
    return mode == AllocationMode::hybrid ? "hybrid" : "oma_fallback";
}

inline constexpr const char* kSweepCsvHeader =
    "r0_nats,mx,trial,method,ok,total_energy_j,sum_legacy_power_w,p0_w,mode,"
    "residual_nats,powers_w";

inline void write_records_csv(std::ostream& os, const std::vector<SweepRecord>& records) {
    os << kSweepCsvHeader << '\n';
    for (const auto& rec : records) {
        double sum = 0;
        for (const double p : rec.powers)
            sum += p;
        os << format_number(rec.r0_nats) << ',' << rec.mx << ',' << rec.trial << ','
           << method_name(rec.method) << ',' << (rec.ok ? 1 : 0) << ','
           << format_number(rec.total_energy) << ',' << format_number(sum) << ','
           << format_number(rec.p0) << ',' << mode_name(rec.mode) << ','
           << format_number(rec.residual) << ',' << join_powers(rec.powers) << '\n';
    }
}

inline constexpr const char* kSummaryCsvHeader =
    "r0_nats,mx,method,trials_ok,failures,mean_energy_j,stderr_energy_j";

inline void write_summary_csv(std::ostream& os, const std::vector<SummaryRow>& rows) {
    os << kSummaryCsvHeader << '\n';
    for (const auto& row : rows) {
        os << format_number(row.r0_nats) << ',' << row.mx << ',' << method_name(row.method) << ','
           << row.trials_ok << ',' << row.failures << ',' << format_number(row.mean_energy) << ','
           << format_number(row.stderr_energy) << '\n';
    }
}

inline constexpr const char* kResultCsvHeader =
    "method,total_energy_j,p0_w,mode,residual_nats,lambda,powers_w";

inline void write_result_csv_row(std::ostream& os, const std::string& method,
                                 const AllocationResult<double>& res) {
    const std::vector<double> powers(res.powers.per_beam.begin(), res.powers.per_beam.end());
    os << method << ',' << format_number(res.total_energy) << ','
       << format_number(res.powers.final_slot) << ',' << mode_name(res.mode) << ','
       << format_number(res.constraint_residual) << ',' << format_number(res.dual_multiplier)
       << ',' << join_powers(powers) << '\n';
}

// Beam matrix dump for debugging: one row per antenna element, one
// (re, im) column pair per beam.
inline void write_beams_csv(std::ostream& os, const Eigen::MatrixXcd& beams) {
    for (Eigen::Index j = 0; j < beams.cols(); ++j)
        os << (j ? "," : "") << "w" << j + 1 << "_re,w" << j + 1 << "_im";
    os << '\n';
    for (Eigen::Index i = 0; i < beams.rows(); ++i) {
        for (Eigen::Index j = 0; j < beams.cols(); ++j)
            os << (j ? "," : "") << format_number(beams(i, j).real()) << ','
               << format_number(beams(i, j).imag());
        os << '\n';
    }
}

inline std::ofstream open_output(const std::string& path) {
    std::ofstream os(path);
    if (!os)
        throw IoError("cannot open output file: " + path);
    return os;
}

} // namespace nfnoma

#endif
