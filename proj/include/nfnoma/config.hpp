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

#ifndef NFNOMA_CONFIG_HPP
#define NFNOMA_CONFIG_HPP

#include "nfnoma/errors.hpp"
#include "nfnoma/scenario.hpp"

#include <charconv>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace nfnoma {

// Nested key-value configuration text:
//
//   # comment
//   [section]            -> keys below become "section.key"
//   [section.subsection] -> "section.subsection.key"
//   key = value
//
// Values are kept as strings and converted on access. Lists separate entries
// with commas; point lists are "(radius, angle); (radius, angle); ...".
class Config {
  public:
    static Config parse_string(const std::string& text, const std::string& origin = "<string>") {
        Config cfg;
        std::istringstream in(text);
        std::string line;
        std::string section;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            std::string_view sv = trim(line);
            if (sv.empty())
                continue;
            if (sv.front() == '[') {
                if (sv.back() != ']')
                    throw ConfigError(origin + ":" + std::to_string(lineno) +
                                      ": unterminated section header");
                section = std::string(trim(sv.substr(1, sv.size() - 2)));
                continue;
            }
            const auto eq = sv.find('=');
            if (eq == std::string_view::npos)
                throw ConfigError(origin + ":" + std::to_string(lineno) +
                                  ": expected 'key = value'");
            const std::string key(trim(sv.substr(0, eq)));
            const std::string value(trim(sv.substr(eq + 1)));
            if (key.empty())
                throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
            cfg.values_[section.empty() ? key : section + "." + key] = value;
        }
        return cfg;
    }

    static Config parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file: " + path);
        std::ostringstream buf;
        buf << in.rdbuf();
        return parse_string(buf.str(), path);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    // Overrides may only touch keys the file already defines.
    void override_existing(const std::string& key, const std::string& value) {
        if (!has(key))
            throw ConfigError("--set references unknown key: " + key);
        values_[key] = value;
    }

    std::string get_string(const std::string& key) const {
        const auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("missing config key: " + key);
        return it->second;
    }
    std::string get_string(const std::string& key, const std::string& fallback) const {
        return has(key) ? get_string(key) : fallback;
    }

    double get_double(const std::string& key) const { return to_double(get_string(key), key); }
    double get_double(const std::string& key, double fallback) const {
        return has(key) ? get_double(key) : fallback;
    }

    long get_int(const std::string& key) const {
        const std::string s = get_string(key);
        long v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ConfigError("config key " + key + ": expected integer, got '" + s + "'");
        return v;
    }
    long get_int(const std::string& key, long fallback) const {
        return has(key) ? get_int(key) : fallback;
    }

    std::uint64_t get_uint64(const std::string& key, std::uint64_t fallback) const {
        if (!has(key))
            return fallback;
        const std::string s = get_string(key);
        std::uint64_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ConfigError("config key " + key + ": expected unsigned integer, got '" + s + "'");
        return v;
    }

    bool get_bool(const std::string& key, bool fallback) const {
        if (!has(key))
            return fallback;
        const std::string s = get_string(key);
        if (s == "true" || s == "1" || s == "yes")
            return true;
        if (s == "false" || s == "0" || s == "no")
            return false;
        throw ConfigError("config key " + key + ": expected boolean, got '" + s + "'");
    }

    std::vector<double> get_double_list(const std::string& key) const {
        const std::string raw = get_string(key);
        std::vector<double> out;
        for (const auto& item : split(raw, ','))
            out.push_back(to_double(std::string(trim(item)), key));
        if (out.empty())
            throw ConfigError("config key " + key + ": expected a non-empty list");
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key) const {
        const std::string raw = get_string(key);
        std::vector<std::string> out;
        for (const auto& item : split(raw, ','))
            out.emplace_back(trim(item));
        return out;
    }

    // "(r, angle); (r, angle); ..."
    std::vector<PolarPoint<double>> get_point_list(const std::string& key) const {
        const std::string raw = get_string(key);
        std::vector<PolarPoint<double>> out;
        for (const auto& item : split(raw, ';')) {
            std::string_view sv = trim(item);
            if (sv.empty())
                continue;
            if (sv.front() != '(' || sv.back() != ')')
                throw ConfigError("config key " + key + ": expected '(radius, angle)' entries");
            sv = trim(sv.substr(1, sv.size() - 2));
            const auto comma = sv.find(',');
            if (comma == std::string_view::npos)
                throw ConfigError("config key " + key + ": point needs two coordinates");
            PolarPoint<double> p;
            p.radius = to_double(std::string(trim(sv.substr(0, comma))), key);
            p.angle = to_double(std::string(trim(sv.substr(comma + 1))), key);
            out.push_back(p);
        }
        if (out.empty())
            throw ConfigError("config key " + key + ": expected at least one point");
        return out;
    }

    const std::map<std::string, std::string>& values() const { return values_; }

  private:
    static std::string_view trim(std::string_view sv) {
        while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.front())))
            sv.remove_prefix(1);
        while (!sv.empty() && std::isspace(static_cast<unsigned char>(sv.back())))
            sv.remove_suffix(1);
        return sv;
    }
    static std::vector<std::string_view> split(std::string_view sv, char sep) {
        std::vector<std::string_view> out;
        std::size_t start = 0;
        while (start <= sv.size()) {
            const auto pos = sv.find(sep, start);
            if (pos == std::string_view::npos) {
                out.push_back(sv.substr(start));
                break;
            }
            out.push_back(sv.substr(start, pos - start));
            start = pos + 1;
        }
        return out;
    }
    static double to_double(const std::string& s, const std::string& key) {
        double v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc() || res.ptr != s.data() + s.size())
            throw ConfigError("config key " + key + ": expected number, got '" + s + "'");
        return v;
    }

    std::map<std::string, std::string> values_;
};

// --- scenario assembly ----------------------------------------------------------

inline double parse_rate(const Config& cfg, const std::string& value_key,
                         const std::string& unit_key, double fallback_nats) {
    if (!cfg.has(value_key))
        return fallback_nats;
    const double v = cfg.get_double(value_key);
    const std::string unit = cfg.get_string(unit_key, "nats");
    if (unit == "nats")
        return v;
    if (unit == "bpcu")
        return bpcu_to_nats(v);
    throw ConfigError("config key " + unit_key + ": expected 'nats' or 'bpcu', got '" + unit + "'");
}

inline std::vector<double> parse_rate_list(const Config& cfg, const std::string& value_key,
                                           const std::string& unit_key) {
    std::vector<double> vals = cfg.get_double_list(value_key);
    const std::string unit = cfg.get_string(unit_key, "nats");
    if (unit == "bpcu")
        for (double& v : vals)
            v = bpcu_to_nats(v);
    else if (unit != "nats")
        throw ConfigError("config key " + unit_key + ": expected 'nats' or 'bpcu'");
    return vals;
}

// A positive "noise dBm" would put the noise floor above the transmit power;
// such captions mean the negated value. Warn and flip.
inline double parse_noise_dbm(double dbm, std::ostream& warnings = std::cerr) {
    if (dbm > 0) {
        warnings << "warning: noise power " << dbm << " dBm is positive; interpreting as "
                 << -dbm << " dBm\n";
        return -dbm;
    }
    return dbm;
}

inline Method parse_method(const std::string& name) {
    if (name == "oma")
        return Method::oma;
    if (name == "approach1")
        return Method::approach1;
    if (name == "approach2")
        return Method::approach2;
    if (name == "lemma1")
        return Method::lemma1;
    if (name == "lemma2")
        return Method::lemma2;
    throw ConfigError("unknown method '" + name +
                      "' (expected oma|approach1|approach2|lemma1|lemma2)");
}

inline BeamKind parse_beam_kind(const std::string& name) {
    if (name == "zf" || name == "zero_forcing")
        return BeamKind::zero_forcing;
    if (name == "focus" || name == "beamfocusing")
        return BeamKind::beamfocusing;
    throw ConfigError("unknown beam kind '" + name + "' (expected zf|focus)");
}

// Builds a ScenarioSpec from the [geometry], [placement], [signal], [solve]
// and [model] sections; every key is optional and falls back to the
// deterministic three-user scenario defaults.
inline ScenarioSpec scenario_from_config(const Config& cfg, std::ostream& warnings = std::cerr) {
    ScenarioSpec spec = build_deterministic_scenario();

    spec.n_elements = cfg.get_int("geometry.n_elements", spec.n_elements);
    spec.carrier_freq = cfg.get_double("geometry.carrier_freq_hz", spec.carrier_freq);
    spec.spacing = cfg.get_double("geometry.spacing_m", 0.0); // 0 = half wavelength

    const std::string kind = cfg.get_string("placement.kind", "deterministic");
    if (kind == "deterministic") {
        spec.placement = PlacementKind::deterministic;
        if (cfg.has("placement.legacy"))
            spec.legacy_points = cfg.get_point_list("placement.legacy");
        if (cfg.has("placement.far")) {
            const auto far = cfg.get_point_list("placement.far");
            if (far.size() != 1)
                throw ConfigError("placement.far must contain exactly one point");
            spec.far_point = far.front();
        }
    } else if (kind == "random_halfring") {
        spec.placement = PlacementKind::random_halfring;
        spec.legacy_count = static_cast<int>(cfg.get_int("placement.legacy_count", 3));
        spec.legacy_inner = cfg.get_double("placement.legacy_inner_m", 5.0);
        spec.legacy_outer = cfg.get_double("placement.legacy_outer_m", 10.0);
        spec.far_inner = cfg.get_double("placement.far_inner_m", 150.0);
        spec.far_outer = cfg.get_double("placement.far_outer_m", 200.0);
        const std::string density = cfg.get_string("placement.radial_density", "uniform_radius");
        if (density == "uniform_radius")
            spec.radial_density = RadialDensity::uniform_radius;
        else if (density == "uniform_area")
            spec.radial_density = RadialDensity::uniform_area;
        else
            throw ConfigError("placement.radial_density: expected uniform_radius|uniform_area");
    } else {
        throw ConfigError("placement.kind: expected deterministic|random_halfring");
    }

    spec.p_legacy_w = dbm_to_watt(cfg.get_double("signal.p_dbm", 10.0));
    spec.noise_w =
        dbm_to_watt(parse_noise_dbm(cfg.get_double("signal.noise_dbm", -70.0), warnings));
    spec.rate_target_nats =
        parse_rate(cfg, "signal.rt", "signal.rt_unit", bpcu_to_nats(4.0));

    spec.beam_kind = parse_beam_kind(cfg.get_string("solve.beams", "focus"));
    if (cfg.has("solve.mx_list")) {
        spec.mx_list.clear();
        for (const double v : cfg.get_double_list("solve.mx_list"))
            spec.mx_list.push_back(static_cast<int>(v));
    } else {
        spec.mx_list = {spec.num_legacy()};
    }
    if (cfg.has("solve.r0_list"))
        spec.r0_list_nats = parse_rate_list(cfg, "solve.r0_list", "solve.r0_unit");
    if (cfg.has("solve.methods")) {
        spec.methods.clear();
        for (const auto& name : cfg.get_string_list("solve.methods"))
            spec.methods.push_back(parse_method(name));
    }
    spec.trials = static_cast<int>(cfg.get_int("solve.trials", 1));
    spec.seed = cfg.get_uint64("solve.seed", 1);
    spec.slot_duration = cfg.get_double("solve.slot_duration_s", 1.0);
    spec.zf_condition_limit = cfg.get_double("solve.zf_condition_limit", 1e12);
    spec.b0_literal = cfg.get_bool("model.b0_literal", false);
    spec.literal_thresholds = cfg.get_bool("model.literal_thresholds", false);

    spec.validate();
    return spec;
}

inline GridSpec<double> grid_from_config(const Config& cfg) {
    GridSpec<double> grid;
    grid.radius_min = cfg.get_double("resolution.r_min_m", 1.0);
    grid.radius_max = cfg.get_double("resolution.r_max_m", 250.0);
    grid.radial_count = cfg.get_int("resolution.n_r", 120);
    grid.angle_min = cfg.get_double("resolution.angle_min_rad", 0.15 * std::numbers::pi);
    grid.angle_max = cfg.get_double("resolution.angle_max_rad", 0.85 * std::numbers::pi);
    grid.angle_count = cfg.get_int("resolution.n_angle", 120);
    return grid;
}

} // namespace nfnoma

#endif
