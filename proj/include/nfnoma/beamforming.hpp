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

#ifndef NFNOMA_BEAMFORMING_HPP
#define NFNOMA_BEAMFORMING_HPP

#include "nfnoma/errors.hpp"
#include "nfnoma/geometry.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <limits>
#include <sstream>
#include <vector>

namespace nfnoma {

// Channels of the M legacy users (columns of `legacy`) plus the far user.
template <typename Scalar = double>
struct ChannelSet {
    Eigen::MatrixX<std::complex<Scalar>> legacy; // N x M, column m = h_m
    Eigen::VectorX<std::complex<Scalar>> far;    // h_0

    Eigen::Index num_legacy() const { return legacy.cols(); }
};

template <typename Scalar = double>
ChannelSet<Scalar> build_channel_set(const ArrayGeometry<Scalar>& geom,
                                     const std::vector<PolarPoint<Scalar>>& legacy_points,
                                     const PolarPoint<Scalar>& far_point) {
    ChannelSet<Scalar> ch;
    ch.legacy.resize(geom.n_elements, static_cast<Eigen::Index>(legacy_points.size()));
    for (Eigen::Index m = 0; m < ch.legacy.cols(); ++m)
        ch.legacy.col(m) = channel(geom, legacy_points[static_cast<std::size_t>(m)]).coeffs;
    ch.far = channel(geom, far_point).coeffs;
    return ch;
}

enum class BeamKind { zero_forcing, beamfocusing };

// Unit-norm beams preconfigured for the legacy users, plus the far user's beam.
template <typename Scalar = double>
struct BeamSet {
    Eigen::MatrixX<std::complex<Scalar>> legacy; // N x M, column m = w_m
    Eigen::VectorX<std::complex<Scalar>> far;    // w_0
    BeamKind kind = BeamKind::beamfocusing;
};

// Zero-forcing precoder W = H (H^H H)^{-1} D with
// D = diag(diag((H^H H)^{-1}))^{-1/2}, which makes every column unit-norm and
// nulls all cross gains: h_i^H w_j = 0 for i != j in exact arithmetic.
// The far beam is h_0 normalized (identical to the steering vector at the far
// user's location, since the final slot is interference-free).
template <typename Scalar = double>
BeamSet<Scalar> zf_beams(const ChannelSet<Scalar>& ch, Scalar condition_limit = Scalar(1e12)) {
    using CMatrix = Eigen::MatrixX<std::complex<Scalar>>;
    const Eigen::Index m_users = ch.legacy.cols();
    if (m_users < 1)
        throw std::invalid_argument("zf_beams: need at least one legacy channel");
    if (m_users > ch.legacy.rows())
        throw std::invalid_argument("zf_beams: more users than antenna elements");

    const CMatrix gram = ch.legacy.adjoint() * ch.legacy;

    Eigen::SelfAdjointEigenSolver<CMatrix> eig(gram, Eigen::EigenvaluesOnly);
    const Scalar ev_min = eig.eigenvalues().minCoeff();
    const Scalar ev_max = eig.eigenvalues().maxCoeff();
    const Scalar cond = (ev_min > Scalar(0)) ? ev_max / ev_min
                                             : std::numeric_limits<Scalar>::infinity();
    if (!(cond < condition_limit)) {
        std::ostringstream msg;
        msg << "zf_beams: Gram matrix is rank-deficient or ill-conditioned "
            << "(condition number " << cond << ", limit " << condition_limit << ")";
        throw SolverError(msg.str());
    }

    const auto ldlt = gram.ldlt();
    CMatrix gram_inv = ldlt.solve(CMatrix::Identity(m_users, m_users));
    // two rounds of iterative refinement keep the residual cross gains near
    // machine precision even for moderately conditioned Gram matrices
    for (int round = 0; round < 2; ++round)
        gram_inv += ldlt.solve(CMatrix::Identity(m_users, m_users) - gram * gram_inv);

    BeamSet<Scalar> beams;
    beams.kind = BeamKind::zero_forcing;
    beams.legacy.resize(ch.legacy.rows(), m_users);
    for (Eigen::Index j = 0; j < m_users; ++j) {
        const Scalar dj = std::sqrt(std::real(gram_inv(j, j)));
        beams.legacy.col(j) = ch.legacy * (gram_inv.col(j) / dj);
        beams.legacy.col(j).normalize(); // exact unit norm regardless of conditioning
    }
    beams.far = ch.far.normalized();
    return beams;
}

// Beamfocusing: each beam is the steering vector at its user's location.
// Only appropriate when the users' steering vectors are nearly orthogonal.
template <typename Scalar = double>
BeamSet<Scalar> focus_beams(const ArrayGeometry<Scalar>& geom,
                            const std::vector<PolarPoint<Scalar>>& legacy_points,
                            const PolarPoint<Scalar>& far_point) {
    BeamSet<Scalar> beams;
    beams.kind = BeamKind::beamfocusing;
    beams.legacy.resize(geom.n_elements, static_cast<Eigen::Index>(legacy_points.size()));
    for (Eigen::Index m = 0; m < beams.legacy.cols(); ++m)
        beams.legacy.col(m) = steering_vector(geom, legacy_points[static_cast<std::size_t>(m)]);
    beams.far = steering_vector(geom, far_point);
    return beams;
}

// Scalar gains consumed by every power-allocation problem. All quantities are
// magnitudes, so they are invariant to unit-modulus rescaling of any beam; the
// phase alignment coefficients f_m = h_0^H w_m / |h_0^H w_m| therefore never
// need explicit storage.
template <typename Scalar = double>
struct EffectiveParams {
    Eigen::VectorX<Scalar> h_eff; // h_m = |h_m^H w_m|^2                     (M)
    Eigen::VectorX<Scalar> g;     // g_m = |h_0^H w_m|                       (M)
    Scalar g0 = 0;                // |h_0^H w_0|
    Eigen::VectorX<Scalar> a;     // a_m = 1/(P sum_i |h_m^H w_i|^2 + s2)    (M)
    Scalar a0 = 0;                // same with h_0 in place of h_m
    Scalar b0 = 0;                // final-slot gain-to-noise (see effective_params)
    Eigen::VectorX<Scalar> caps;  // P/(e^{R_t}-1) - s2/h_m; +inf when R_t = 0
    Scalar p_legacy = 0;          // P, W
    Scalar noise = 0;             // sigma^2, W
    Scalar rate_target = 0;       // R_t, nats

    Eigen::Index num_legacy() const { return h_eff.size(); }

    void validate() const {
        if (h_eff.size() == 0 || (h_eff.array() <= Scalar(0)).any())
            throw std::invalid_argument("EffectiveParams: h_eff must be positive");
        if ((a.array() <= Scalar(0)).any() || !(a0 > Scalar(0)))
            throw std::invalid_argument("EffectiveParams: a_m must be positive");
        if (!(b0 > Scalar(0)))
            throw std::invalid_argument("EffectiveParams: b0 must be positive");
        if ((g.array() < Scalar(0)).any() || g0 < Scalar(0))
            throw std::invalid_argument("EffectiveParams: gains must be non-negative");
    }
};

// Collapses channels and beams to the scalar gains above.
//
// b0 defaults to |h_0^H w_0|^2 / sigma^2, the coefficient that actually
// appears in the far user's final-slot rate log(1 + b0 P_0). Passing
// b0_literal = true reproduces the unsquared variant g_0 / sigma^2 instead.
//
// A rate target of zero leaves the per-beam power caps unbounded (+inf).
template <typename Scalar = double>
EffectiveParams<Scalar> effective_params(const ChannelSet<Scalar>& ch, const BeamSet<Scalar>& beams,
                                         Scalar p_legacy, Scalar noise, Scalar rate_target_nats,
                                         bool b0_literal = false) {
    if (!(p_legacy > Scalar(0)))
        throw std::invalid_argument("effective_params: P must be > 0");
    if (!(noise > Scalar(0)))
        throw std::invalid_argument("effective_params: noise power must be > 0");
    if (rate_target_nats < Scalar(0))
        throw std::invalid_argument("effective_params: rate target must be >= 0");

    const Eigen::Index m_users = ch.legacy.cols();
    // cross(m, i) = h_m^H w_i
    const Eigen::MatrixX<std::complex<Scalar>> cross = ch.legacy.adjoint() * beams.legacy;
    const Eigen::VectorX<std::complex<Scalar>> cross_far = beams.legacy.adjoint() * ch.far;

    EffectiveParams<Scalar> ep;
    ep.p_legacy = p_legacy;
    ep.noise = noise;
    ep.rate_target = rate_target_nats;
    ep.h_eff.resize(m_users);
    ep.a.resize(m_users);
    ep.caps.resize(m_users);
    ep.g = cross_far.cwiseAbs();
    ep.g0 = std::abs(ch.far.dot(beams.far));
    ep.b0 = b0_literal ? ep.g0 / noise : ep.g0 * ep.g0 / noise;
    ep.a0 = Scalar(1) / (p_legacy * ep.g.squaredNorm() + noise);

    const Scalar cap_budget =
        rate_target_nats > Scalar(0) ? p_legacy / std::expm1(rate_target_nats)
                                     : std::numeric_limits<Scalar>::infinity();
    for (Eigen::Index m = 0; m < m_users; ++m) {
        ep.h_eff(m) = std::norm(cross(m, m));
        ep.a(m) = Scalar(1) / (p_legacy * cross.row(m).squaredNorm() + noise);
        ep.caps(m) = std::isinf(cap_budget) ? cap_budget : cap_budget - noise / ep.h_eff(m);
    }
    ep.validate();
    return ep;
}

// Eq.-style qualification test for beam m: the legacy rate target is
// attainable with some non-negative far-user power iff
// log(1 + P h_m / sigma^2) >= R_t, which is equivalent to caps(m) >= 0.
template <typename Scalar = double>
bool beam_qualified(const EffectiveParams<Scalar>& ep, Eigen::Index m) {
    return ep.caps(m) > Scalar(0);
}

} // namespace nfnoma

#endif
