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

#ifndef NFNOMA_RATES_HPP
#define NFNOMA_RATES_HPP

#include "nfnoma/beamforming.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <vector>

// All rates are in nats. "Simplified" evaluators assume orthogonal beams and
// consume EffectiveParams scalars only; "exact" evaluators compute the full
// inner products, including the composite far-user signal with phase-aligned
// coefficients, so the residual error of the orthogonality approximation is
// measurable.

namespace nfnoma {

enum class Approach { approach_1, approach_2 };

// Far-user transmit powers: P_m rides on legacy beam m during the first M
// slots (zero for unselected beams), final_slot is P_0 in slot M+1.
template <typename Scalar = double>
struct PowerProfile {
    Eigen::VectorX<Scalar> per_beam; // W, length M
    Scalar final_slot = 0;           // W
    Scalar legacy_power = 0;         // P, W

    void validate() const {
        if ((per_beam.array() < Scalar(0)).any() || final_slot < Scalar(0) ||
            legacy_power < Scalar(0))
            throw std::invalid_argument("PowerProfile: powers must be non-negative");
    }
};

template <typename Scalar = double>
PowerProfile<Scalar> zero_profile(Eigen::Index m_users, Scalar legacy_power) {
    return {Eigen::VectorX<Scalar>::Zero(m_users), Scalar(0), legacy_power};
}

namespace detail {

// Phase-alignment coefficients f_k chosen so the far user combines the M beams
// coherently: with f_k = (h_0^H w_k)^* / |h_0^H w_k| the composite gain through
// h_0 is exactly sum_k |h_0^H w_k| sqrt(P_k). `far_conj` holds w_k^H h_0.
template <typename Scalar>
Eigen::VectorX<std::complex<Scalar>>
alignment_phases(const Eigen::VectorX<std::complex<Scalar>>& far_conj) {
    Eigen::VectorX<std::complex<Scalar>> f(far_conj.size());
    for (Eigen::Index k = 0; k < far_conj.size(); ++k) {
        const Scalar mag = std::abs(far_conj(k));
        f(k) = mag > Scalar(0) ? far_conj(k) / mag : std::complex<Scalar>(1, 0);
    }
    return f;
}

// Composite far-user signal seen through a channel row x = (h^H w_1 ... h^H w_M):
// sum_k x_k f_k sqrt(P_k).
template <typename Scalar>
std::complex<Scalar> composite_gain(const Eigen::MatrixX<std::complex<Scalar>>& cross,
                                    Eigen::Index row,
                                    const Eigen::VectorX<std::complex<Scalar>>& phases,
                                    const Eigen::VectorX<Scalar>& per_beam) {
    std::complex<Scalar> acc(0, 0);
    for (Eigen::Index k = 0; k < per_beam.size(); ++k) {
        if (per_beam(k) > Scalar(0))
            acc += cross(row, k) * phases(k) * std::sqrt(per_beam(k));
    }
    return acc;
}

} // namespace detail

// --- simplified (orthogonality-based) primitives -----------------------------

// Coherent first-phase combining amplitude sum_k g_k sqrt(P_k).
template <typename Scalar>
Scalar combined_amplitude(const EffectiveParams<Scalar>& ep, const Eigen::VectorX<Scalar>& per_beam) {
    return (ep.g.array() * per_beam.array().max(Scalar(0)).sqrt()).sum();
}

// Far user's first-phase rate under Approach I: log(1 + a_0 (sum g_k sqrt(P_k))^2).
template <typename Scalar>
Scalar rate_far_phase1(const EffectiveParams<Scalar>& ep, const Eigen::VectorX<Scalar>& per_beam) {
    const Scalar s = combined_amplitude(ep, per_beam);
    return std::log1p(ep.a0 * s * s);
}

// Rate for legacy user m to decode the far signal: log(1 + a_m h_m P_m).
template <typename Scalar>
Scalar rate_decode_far(const EffectiveParams<Scalar>& ep, Eigen::Index m, Scalar p_m) {
    return std::log1p(ep.a(m) * ep.h_eff(m) * p_m);
}

// Final-slot far rate: log(1 + b_0 P_0).
template <typename Scalar>
Scalar rate_far_final_slot(const EffectiveParams<Scalar>& ep, Scalar p0) {
    return std::log1p(ep.b0 * p0);
}

template <typename Scalar>
Scalar rate_far_oma(const PowerProfile<Scalar>& pp, const EffectiveParams<Scalar>& ep) {
    return rate_far_final_slot(ep, pp.final_slot);
}

// --- exact evaluators ---------------------------------------------------------

// OMA rate of each legacy user from full inner products:
// log(1 + P |h_m^H w_m|^2 / (P sum_{i != m} |h_m^H w_i|^2 + sigma^2)).
template <typename Scalar = double>
Eigen::VectorX<Scalar> rate_oma_legacy_exact(const ChannelSet<Scalar>& ch,
                                             const BeamSet<Scalar>& beams, Scalar p_legacy,
                                             Scalar noise) {
    const Eigen::MatrixX<std::complex<Scalar>> cross = ch.legacy.adjoint() * beams.legacy;
    const Eigen::Index m_users = cross.rows();
    Eigen::VectorX<Scalar> rates(m_users);
    for (Eigen::Index m = 0; m < m_users; ++m) {
        const Scalar sig = p_legacy * std::norm(cross(m, m));
        const Scalar intf = p_legacy * cross.row(m).squaredNorm() - sig;
        rates(m) = std::log1p(sig / (intf + noise));
    }
    return rates;
}

template <typename Scalar = double>
struct Approach1Rates {
    Eigen::VectorX<Scalar> legacy; // R^I_{1,m}
    Scalar far = 0;                // R^I_{1,0}
};

// Approach I: legacy users decode their own signals directly, treating the far
// user's superimposed signal as interference.
template <typename Scalar = double>
Approach1Rates<Scalar> rate_approach1(const ChannelSet<Scalar>& ch, const BeamSet<Scalar>& beams,
                                      const EffectiveParams<Scalar>& ep,
                                      const PowerProfile<Scalar>& pp, bool simplified) {
    const Eigen::Index m_users = ep.num_legacy();
    Approach1Rates<Scalar> out;
    out.legacy.resize(m_users);

    if (simplified) {
        for (Eigen::Index m = 0; m < m_users; ++m) {
            const Scalar h = ep.h_eff(m);
            out.legacy(m) =
                std::log1p(pp.legacy_power * h / (h * pp.per_beam(m) + ep.noise));
        }
        out.far = rate_far_phase1(ep, pp.per_beam);
        return out;
    }

    const Eigen::MatrixX<std::complex<Scalar>> cross = ch.legacy.adjoint() * beams.legacy;
    const Eigen::VectorX<std::complex<Scalar>> far_conj = beams.legacy.adjoint() * ch.far;
    const Eigen::VectorX<std::complex<Scalar>> phases = detail::alignment_phases(far_conj);
    for (Eigen::Index m = 0; m < m_users; ++m) {
        const Scalar sig = pp.legacy_power * std::norm(cross(m, m));
        const Scalar legacy_intf =
            pp.legacy_power * cross.row(m).squaredNorm() - sig;
        const Scalar far_intf =
            std::norm(detail::composite_gain(cross, m, phases, pp.per_beam));
        out.legacy(m) = std::log1p(sig / (legacy_intf + far_intf + ep.noise));
    }
    // Through h_0 the aligned composite is real: sum_k |h_0^H w_k| sqrt(P_k).
    Scalar amp = 0;
    for (Eigen::Index k = 0; k < m_users; ++k)
        if (pp.per_beam(k) > Scalar(0))
            amp += std::abs(far_conj(k)) * std::sqrt(pp.per_beam(k));
    const Scalar den = pp.legacy_power * far_conj.squaredNorm() + ep.noise;
    out.far = std::log1p(amp * amp / den);
    return out;
}

template <typename Scalar = double>
struct Approach2Rates {
    Eigen::VectorX<Scalar> decode_far_at_legacy; // R^II_{1,m}, all M users
    Scalar far_first_phase = 0;                  // min over R^I_{1,0} and selected R^II_{1,m}
};

// Approach II: legacy users decode and cancel the far signal first. The far
// user's first-phase rate is capped by the weakest decoder among the SELECTED
// beams (a beam left out of the allocation carries no far power and must not
// drag the min to zero).
template <typename Scalar = double>
Approach2Rates<Scalar> rate_approach2(const ChannelSet<Scalar>& ch, const BeamSet<Scalar>& beams,
                                      const EffectiveParams<Scalar>& ep,
                                      const PowerProfile<Scalar>& pp, bool simplified,
                                      const std::vector<Eigen::Index>& selected) {
    const Eigen::Index m_users = ep.num_legacy();
    Approach2Rates<Scalar> out;
    out.decode_far_at_legacy.resize(m_users);

    Scalar far_phase1;
    if (simplified) {
        for (Eigen::Index m = 0; m < m_users; ++m)
            out.decode_far_at_legacy(m) = rate_decode_far(ep, m, pp.per_beam(m));
        far_phase1 = rate_far_phase1(ep, pp.per_beam);
    } else {
        const Eigen::MatrixX<std::complex<Scalar>> cross = ch.legacy.adjoint() * beams.legacy;
        const Eigen::VectorX<std::complex<Scalar>> far_conj = beams.legacy.adjoint() * ch.far;
        const Eigen::VectorX<std::complex<Scalar>> phases = detail::alignment_phases(far_conj);
        for (Eigen::Index m = 0; m < m_users; ++m) {
            const Scalar num =
                std::norm(detail::composite_gain(cross, m, phases, pp.per_beam));
            const Scalar den = pp.legacy_power * cross.row(m).squaredNorm() + ep.noise;
            out.decode_far_at_legacy(m) = std::log1p(num / den);
        }
        Scalar amp = 0;
        for (Eigen::Index k = 0; k < m_users; ++k)
            if (pp.per_beam(k) > Scalar(0))
                amp += std::abs(far_conj(k)) * std::sqrt(pp.per_beam(k));
        far_phase1 =
            std::log1p(amp * amp / (pp.legacy_power * far_conj.squaredNorm() + ep.noise));
    }

    out.far_first_phase = far_phase1;
    for (const Eigen::Index m : selected)
        out.far_first_phase = std::min(out.far_first_phase, out.decode_far_at_legacy(m));
    return out;
}

// Total far-user rate over the frame (simplified forms):
// M * (first-phase rate) + final-slot rate, with M the number of legacy time
// slots regardless of how many beams are selected.
template <typename Scalar>
Scalar total_far_rate(const PowerProfile<Scalar>& pp, const EffectiveParams<Scalar>& ep,
                      Approach approach, const std::vector<Eigen::Index>& selected) {
    Scalar phase1 = rate_far_phase1(ep, pp.per_beam);
    if (approach == Approach::approach_2) {
        for (const Eigen::Index m : selected)
            phase1 = std::min(phase1, rate_decode_far(ep, m, pp.per_beam(m)));
    }
    return Scalar(ep.num_legacy()) * phase1 + rate_far_final_slot(ep, pp.final_slot);
}

// All achievable-rate quantities for one power profile, in one bundle.
template <typename Scalar = double>
struct RateReport {
    Eigen::VectorX<Scalar> legacy_oma;
    Eigen::VectorX<Scalar> legacy_approach1;
    Eigen::VectorX<Scalar> decode_far_at_legacy;
    Scalar far_first_phase = 0;
    Scalar far_final_slot = 0;
    Scalar far_total = 0;
};

template <typename Scalar = double>
RateReport<Scalar> make_rate_report(const ChannelSet<Scalar>& ch, const BeamSet<Scalar>& beams,
                                    const EffectiveParams<Scalar>& ep,
                                    const PowerProfile<Scalar>& pp, Approach approach,
                                    const std::vector<Eigen::Index>& selected, bool simplified) {
    RateReport<Scalar> rep;
    rep.legacy_oma = rate_oma_legacy_exact(ch, beams, pp.legacy_power, ep.noise);
    rep.legacy_approach1 = rate_approach1(ch, beams, ep, pp, simplified).legacy;
    const auto a2 = rate_approach2(ch, beams, ep, pp, simplified, selected);
    rep.decode_far_at_legacy = a2.decode_far_at_legacy;
    rep.far_first_phase = approach == Approach::approach_2
                              ? a2.far_first_phase
                              : rate_approach1(ch, beams, ep, pp, simplified).far;
    rep.far_final_slot = rate_far_final_slot(ep, pp.final_slot);
    rep.far_total = Scalar(ep.num_legacy()) * rep.far_first_phase + rep.far_final_slot;
    return rep;
}

} // namespace nfnoma

#endif
