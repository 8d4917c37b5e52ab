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

#ifndef NFNOMA_GEOMETRY_HPP
#define NFNOMA_GEOMETRY_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace nfnoma {

inline constexpr double kSpeedOfLight = 299'792'458.0; // m/s

// Location in the array plane, polar form. The array center is the origin and
// the angle is measured from the positive x-axis (the array axis).
template <typename Scalar = double>
struct PolarPoint {
    Scalar radius; // m, > 0
    Scalar angle;  // rad
};

template <typename Scalar>
Eigen::Vector2<Scalar> to_cartesian(const PolarPoint<Scalar>& p) {
    using std::cos, std::sin;
    return {p.radius * cos(p.angle), p.radius * sin(p.angle)};
}

// Uniform linear array on the x-axis, centered on the origin.
template <typename Scalar = double>
struct ArrayGeometry {
    Eigen::Index n_elements = 0;
    Scalar carrier_freq = 0; // Hz
    Scalar spacing = 0;      // m between consecutive elements
    Scalar wavelength = 0;   // m, = c / carrier_freq

    // Row k: 2-D Cartesian position of element k+1, metres. Collinear on y=0,
    // consecutive separation exactly `spacing`.
    Eigen::Matrix<Scalar, Eigen::Dynamic, 2> element_positions;
};

// Element k (1-based) sits at x = (k - (N+1)/2) * spacing, y = 0.
template <typename Scalar = double>
ArrayGeometry<Scalar> build_geometry(Eigen::Index n_elements, Scalar carrier_freq, Scalar spacing) {
    if (n_elements < 1)
        throw std::invalid_argument("build_geometry: n_elements must be >= 1");
    if (!(carrier_freq > Scalar(0)))
        throw std::invalid_argument("build_geometry: carrier_freq must be > 0");
    if (!(spacing > Scalar(0)))
        throw std::invalid_argument("build_geometry: spacing must be > 0");

    ArrayGeometry<Scalar> geom;
    geom.n_elements = n_elements;
    geom.carrier_freq = carrier_freq;
    geom.spacing = spacing;
    geom.wavelength = Scalar(kSpeedOfLight) / carrier_freq;
    geom.element_positions.resize(n_elements, 2);
    const Scalar mid = Scalar(n_elements + 1) / Scalar(2);
    for (Eigen::Index k = 0; k < n_elements; ++k) {
        geom.element_positions(k, 0) = (Scalar(k + 1) - mid) * spacing;
        geom.element_positions(k, 1) = Scalar(0);
    }
    return geom;
}

// Convenience for the common half-wavelength ULA.
template <typename Scalar = double>
ArrayGeometry<Scalar> build_half_wavelength_geometry(Eigen::Index n_elements, Scalar carrier_freq) {
    const Scalar lambda = Scalar(kSpeedOfLight) / carrier_freq;
    return build_geometry<Scalar>(n_elements, carrier_freq, lambda / Scalar(2));
}

namespace detail {

template <typename Scalar>
void check_point(const PolarPoint<Scalar>& p, const char* where) {
    if (!(p.radius > Scalar(0)))
        throw std::invalid_argument(std::string(where) + ": point radius must be > 0");
}

} // namespace detail

// Spherical-wavefront steering vector: entry n is
// exp(-j 2 pi |psi - psi_n| / lambda) / sqrt(N), with |.| the exact Euclidean
// distance from the point to element n (no far-field expansion).
// Every entry has magnitude 1/sqrt(N), so the vector has unit norm.
template <typename Scalar = double>
Eigen::VectorX<std::complex<Scalar>> steering_vector(const ArrayGeometry<Scalar>& geom,
                                                     const PolarPoint<Scalar>& p) {
    detail::check_point(p, "steering_vector");
    const Eigen::Index n = geom.n_elements;
    const Eigen::Vector2<Scalar> pos = to_cartesian(p);
    const Scalar scale = Scalar(1) / std::sqrt(Scalar(n));
    const Scalar two_pi_over_lambda = Scalar(2) * std::numbers::pi_v<Scalar> / geom.wavelength;

    Eigen::VectorX<std::complex<Scalar>> b(n);
    for (Eigen::Index k = 0; k < n; ++k) {
        const Scalar dx = pos(0) - geom.element_positions(k, 0);
        const Scalar dy = pos(1) - geom.element_positions(k, 1);
        const Scalar dist = std::hypot(dx, dy);
        b(k) = std::polar(scale, -two_pi_over_lambda * dist);
    }
    return b;
}

// Free-space amplitude loss to the array center: alpha = lambda / (4 pi r).
template <typename Scalar = double>
Scalar path_loss(const ArrayGeometry<Scalar>& geom, const PolarPoint<Scalar>& p) {
    detail::check_point(p, "path_loss");
    return geom.wavelength / (Scalar(4) * std::numbers::pi_v<Scalar> * p.radius);
}

// Spherical channel vector h = sqrt(N) * alpha * b(psi).
template <typename Scalar = double>
struct ChannelVector {
    Eigen::VectorX<std::complex<Scalar>> coeffs;
    Scalar gain_scale; // sqrt(N) * alpha == ||coeffs||
};

template <typename Scalar = double>
ChannelVector<Scalar> channel(const ArrayGeometry<Scalar>& geom, const PolarPoint<Scalar>& p) {
    const Scalar alpha = path_loss(geom, p);
    const Scalar scale = std::sqrt(Scalar(geom.n_elements)) * alpha;
    ChannelVector<Scalar> h;
    h.coeffs = scale * steering_vector(geom, p);
    h.gain_scale = scale;
    return h;
}

// Beamfocusing resolution between two locations:
// Delta = |b(p1)^H b(p2)|^2, in [0, 1], equal to 1 iff the steering vectors
// coincide up to a global phase. Small Delta means the two locations are
// separable by near-field beamforming.
template <typename Scalar = double>
Scalar resolution(const ArrayGeometry<Scalar>& geom, const PolarPoint<Scalar>& p1,
                  const PolarPoint<Scalar>& p2) {
    const auto b1 = steering_vector(geom, p1);
    const auto b2 = steering_vector(geom, p2);
    return std::norm(b1.dot(b2)); // dot() conjugates the left operand
}

// Polar sampling window for resolution maps. A count of 1 collapses that axis
// to its minimum value.
template <typename Scalar = double>
struct GridSpec {
    Scalar radius_min = 1;
    Scalar radius_max = 1;
    Eigen::Index radial_count = 1;
    Scalar angle_min = 0;
    Scalar angle_max = 0;
    Eigen::Index angle_count = 1;
};

template <typename Scalar = double>
struct ResolutionGrid {
    Eigen::VectorX<Scalar> radii;  // row labels
    Eigen::VectorX<Scalar> angles; // column labels
    Eigen::MatrixX<Scalar> values; // radial_count x angle_count, row-major semantics

    // Location of the largest cell value.
    std::pair<Eigen::Index, Eigen::Index> peak() const {
        Eigen::Index r = 0, c = 0;
        values.maxCoeff(&r, &c);
        return {r, c};
    }
};

// Samples the beamfocusing pattern of one focus (cell = Delta(focus, cell), in
// [0,1]) or the accumulated magnitude of several foci
// (cell = |sum_m b(psi_m)^H b(cell)|^2).
template <typename Scalar = double>
ResolutionGrid<Scalar> resolution_grid(const ArrayGeometry<Scalar>& geom,
                                       std::span<const PolarPoint<Scalar>> foci,
                                       const GridSpec<Scalar>& grid) {
    if (foci.empty())
        throw std::invalid_argument("resolution_grid: need at least one focus point");
    if (grid.radial_count < 1 || grid.angle_count < 1)
        throw std::invalid_argument("resolution_grid: grid counts must be >= 1");
    if (!(grid.radius_min > Scalar(0)))
        throw std::invalid_argument("resolution_grid: radii must be > 0");

    ResolutionGrid<Scalar> out;
    out.radii = Eigen::VectorX<Scalar>::LinSpaced(grid.radial_count, grid.radius_min, grid.radius_max);
    out.angles = Eigen::VectorX<Scalar>::LinSpaced(grid.angle_count, grid.angle_min, grid.angle_max);
    out.values.resize(grid.radial_count, grid.angle_count);

    // Accumulated focus response; for a single focus this is just b(focus).
    Eigen::VectorX<std::complex<Scalar>> acc =
        Eigen::VectorX<std::complex<Scalar>>::Zero(geom.n_elements);
    for (const auto& f : foci)
        acc += steering_vector(geom, f);

    for (Eigen::Index ir = 0; ir < grid.radial_count; ++ir) {
        for (Eigen::Index ia = 0; ia < grid.angle_count; ++ia) {
            const PolarPoint<Scalar> cell{out.radii(ir), out.angles(ia)};
            out.values(ir, ia) = std::norm(acc.dot(steering_vector(geom, cell)));
        }
    }
    return out;
}

template <typename Scalar = double>
ResolutionGrid<Scalar> resolution_grid(const ArrayGeometry<Scalar>& geom,
                                       const PolarPoint<Scalar>& focus,
                                       const GridSpec<Scalar>& grid) {
    return resolution_grid(geom, std::span<const PolarPoint<Scalar>>(&focus, 1), grid);
}

template <typename Scalar = double>
ResolutionGrid<Scalar> resolution_grid(const ArrayGeometry<Scalar>& geom,
                                       const std::vector<PolarPoint<Scalar>>& foci,
                                       const GridSpec<Scalar>& grid) {
    return resolution_grid(geom, std::span<const PolarPoint<Scalar>>(foci.data(), foci.size()),
                           grid);
}

} // namespace nfnoma

#endif
