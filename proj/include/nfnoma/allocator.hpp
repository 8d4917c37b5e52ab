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

#ifndef NFNOMA_ALLOCATOR_HPP
#define NFNOMA_ALLOCATOR_HPP

#include "nfnoma/rates.hpp"
#include "nfnoma/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>
#include <vector>

// Energy-minimal power allocation for the far user.
//
// The frame has M legacy slots plus one dedicated slot, so an allocation
// (P_1..P_M, P_0) costs M*T*sum(P_m) + T*P_0 joules and must deliver
// M * (first-phase rate) + log(1 + b0 P_0) >= R_0 nats. Both numerical solvers
// exploit the KKT structure of their concave programs and reduce to a 1-D
// search certified against the brute-force oracle below.

namespace nfnoma {

enum class AllocationMode { hybrid, oma_fallback };

template <typename Scalar = double>
struct AllocationProblem {
    EffectiveParams<Scalar> params;
    Approach approach = Approach::approach_2;
    Scalar far_target = 0;               // R_0, nats
    std::vector<Eigen::Index> selected;  // beams carrying far power
    Scalar slot_duration = 1;            // T, s

    Eigen::Index num_legacy() const { return params.num_legacy(); }

    void validate() const {
        params.validate();
        if (far_target < Scalar(0))
            throw std::invalid_argument("AllocationProblem: far_target must be >= 0");
        if (!(slot_duration > Scalar(0)))
            throw std::invalid_argument("AllocationProblem: slot_duration must be > 0");
        std::vector<Eigen::Index> sorted = selected;
        std::sort(sorted.begin(), sorted.end());
        if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end())
            throw std::invalid_argument("AllocationProblem: duplicate selected beam");
        for (const Eigen::Index m : selected) {
            if (m < 0 || m >= num_legacy())
                throw std::invalid_argument("AllocationProblem: selected beam out of range");
            if (approach == Approach::approach_1 && !(params.caps(m) > Scalar(0)))
                throw std::invalid_argument(
                    "AllocationProblem: unqualified beam selected under approach 1");
        }
    }
};

template <typename Scalar = double>
struct AllocationResult {
    PowerProfile<Scalar> powers;
    Scalar total_energy = 0;          // M*T*sum(P_m) + T*P_0, J
    AllocationMode mode = AllocationMode::oma_fallback;
    Scalar constraint_residual = 0;   // achieved total far rate minus R_0, nats
    long solver_iterations = 0;       // objective evaluations
    Scalar dual_multiplier = std::numeric_limits<Scalar>::quiet_NaN();
    // Large-M approximation of the per-beam power (high-SNR closed form only).
    Scalar large_m_power = std::numeric_limits<Scalar>::quiet_NaN();
};

namespace detail {

template <typename Scalar>
Scalar total_energy_of(const PowerProfile<Scalar>& pp, Eigen::Index m_users, Scalar slot) {
    return Scalar(m_users) * slot * pp.per_beam.sum() + slot * pp.final_slot;
}

// Minimal final-slot power for `need` nats: log(1 + b0 P0) = need.
template <typename Scalar>
Scalar invert_final_slot(Scalar b0, Scalar need) {
    return need > Scalar(0) ? std::expm1(need) / b0 : Scalar(0);
}

template <typename Scalar>
AllocationResult<Scalar> finish(const AllocationProblem<Scalar>& prob, PowerProfile<Scalar> pp,
                                AllocationMode mode, long iters) {
    AllocationResult<Scalar> res;
    // Top up P0 by any floating-point deficit so the reported allocation is
    // feasible, then report the residual actually achieved.
    const Scalar achieved = total_far_rate(pp, prob.params, prob.approach, prob.selected);
    if (achieved < prob.far_target) {
        const Scalar have_final = rate_far_final_slot(prob.params, pp.final_slot);
        pp.final_slot = invert_final_slot(prob.params.b0,
                                          have_final + (prob.far_target - achieved));
    }
    res.powers = pp;
    res.constraint_residual =
        total_far_rate(pp, prob.params, prob.approach, prob.selected) - prob.far_target;
    res.total_energy = total_energy_of(pp, prob.num_legacy(), prob.slot_duration);
    res.mode = mode;
    res.solver_iterations = iters;
    if (pp.final_slot > Scalar(0))
        res.dual_multiplier = (Scalar(1) + prob.params.b0 * pp.final_slot) / prob.params.b0;
    return res;
}

// Golden-section minimization on [lo, hi]; assumes unimodality on the bracket.
// Returns the midpoint of the final interval.
template <typename Scalar, typename F>
Scalar golden_section(F&& f, Scalar lo, Scalar hi, long& iters, Scalar rel_tol = Scalar(1e-10),
                      int max_iters = 200) {
    constexpr Scalar inv_phi = Scalar(0.6180339887498949);
    Scalar x1 = hi - inv_phi * (hi - lo);
    Scalar x2 = lo + inv_phi * (hi - lo);
    Scalar f1 = f(x1);
    Scalar f2 = f(x2);
    iters += 2;
    for (int it = 0; it < max_iters && (hi - lo) > rel_tol * std::max(Scalar(1), std::abs(hi));
         ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        }
        ++iters;
    }
    return (lo + hi) / Scalar(2);
}

// Coarse scan followed by golden-section refinement of the best bracket. The
// objectives minimized here are convex in the scan variable (they are partial
// minimizations of concave-constrained programs), so the neighbors of the
// discrete argmin bracket the continuous minimizer.
template <typename Scalar, typename F>
Scalar scan_then_refine(F&& f, Scalar lo, Scalar hi, int scan_points, long& iters) {
    if (!(hi > lo))
        return lo;
    Scalar best_x = lo;
    Scalar best_f = std::numeric_limits<Scalar>::infinity();
    int best_i = 0;
    for (int i = 0; i < scan_points; ++i) {
        const Scalar x = lo + (hi - lo) * Scalar(i) / Scalar(scan_points - 1);
        const Scalar fx = f(x);
        ++iters;
        if (fx < best_f) {
            best_f = fx;
            best_x = x;
            best_i = i;
        }
    }
    const Scalar step = (hi - lo) / Scalar(scan_points - 1);
    const Scalar blo = std::max(lo, best_x - step);
    const Scalar bhi = std::min(hi, best_x + step);
    const Scalar refined = golden_section(f, blo, bhi, iters);
    return f(refined) < best_f ? refined : best_x;
}

} // namespace detail

// Beams ordered by effective gain h_m (descending, stable so ties keep the
// lower index first), keeping only beams able to carry far power:
// under Approach I a beam qualifies iff its power cap is positive, which is
// the log(1 + P h_m / sigma^2) >= R_t test; Approach II has no caps.
// Returns at most max_selected indices; empty means "no beam qualified" and
// the caller should fall back to OMA.
template <typename Scalar = double>
std::vector<Eigen::Index> qualify_and_select(const EffectiveParams<Scalar>& params,
                                             Eigen::Index max_selected, Approach approach) {
    if (max_selected < 1)
        throw std::invalid_argument("qualify_and_select: max_selected must be >= 1");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(params.num_legacy()));
    std::iota(order.begin(), order.end(), Eigen::Index(0));
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index j) {
        return params.h_eff(i) > params.h_eff(j);
    });
    std::vector<Eigen::Index> selected;
    for (const Eigen::Index m : order) {
        if (approach == Approach::approach_1 && !beam_qualified(params, m))
            continue;
        selected.push_back(m);
        if (std::cmp_equal(selected.size(), max_selected))
            break;
    }
    return selected;
}

// Pure OMA: the far user transmits only in its dedicated slot.
// P_0 = (e^{R_0} - 1) / b0, energy T * P_0.
template <typename Scalar = double>
AllocationResult<Scalar> solve_oma_baseline(const EffectiveParams<Scalar>& params, Scalar far_target,
                                            Scalar slot_duration = Scalar(1)) {
    AllocationResult<Scalar> res;
    res.powers = zero_profile(params.num_legacy(), params.p_legacy);
    res.powers.final_slot = detail::invert_final_slot(params.b0, far_target);
    res.total_energy = slot_duration * res.powers.final_slot;
    res.mode = AllocationMode::oma_fallback;
    res.constraint_residual =
        rate_far_final_slot(params, res.powers.final_slot) - far_target;
    if (res.powers.final_slot > Scalar(0))
        res.dual_multiplier = (Scalar(1) + params.b0 * res.powers.final_slot) / params.b0;
    return res;
}

namespace detail {

template <typename Scalar>
AllocationResult<Scalar> oma_as_result(const AllocationProblem<Scalar>& prob, long iters) {
    auto res = solve_oma_baseline(prob.params, prob.far_target, prob.slot_duration);
    res.solver_iterations = iters;
    return res;
}

// Snap-to-OMA threshold: a hybrid point is only kept when it beats OMA by more
// than floating-point noise, so borderline solves report a canonical fallback.
template <typename Scalar>
bool improves_on(Scalar hybrid_energy, Scalar oma_energy) {
    return hybrid_energy < oma_energy * (Scalar(1) - Scalar(1e-12));
}

} // namespace detail

// Approach I. At any optimum of
//   min M sum P_m + P0   s.t.  M log(1 + a0 (sum g_k sqrt(P_k))^2)
//                                + log(1 + b0 P0) >= R_0,  0 <= P_m <= cap_m,
// stationarity of the Lagrangian in P_m forces sqrt(P_m) proportional to g_m
// for every uncapped beam, so the KKT family is swept by a single scalar t via
// P_m(t) = min((t g_m)^2, cap_m). P0 follows by closed-form inversion of the
// binding constraint, leaving a 1-D convex minimization over t.
template <typename Scalar = double>
AllocationResult<Scalar> solve_approach1(const AllocationProblem<Scalar>& prob) {
    prob.validate();
    const auto& ep = prob.params;
    const Eigen::Index m_users = prob.num_legacy();
    long iters = 0;

    if (prob.far_target <= Scalar(0)) {
        AllocationResult<Scalar> res;
        res.powers = zero_profile(m_users, ep.p_legacy);
        return res;
    }
    if (prob.selected.empty())
        return detail::oma_as_result(prob, iters);

    Scalar g_sq_sum = 0; // over selected beams
    for (const Eigen::Index m : prob.selected)
        g_sq_sum += ep.g(m) * ep.g(m);
    if (!(g_sq_sum > Scalar(0)))
        return detail::oma_as_result(prob, iters);

    const auto profile_at = [&](Scalar t) {
        PowerProfile<Scalar> pp = zero_profile(m_users, ep.p_legacy);
        for (const Eigen::Index m : prob.selected) {
            const Scalar unc = t * ep.g(m) * t * ep.g(m);
            pp.per_beam(m) = std::min(unc, ep.caps(m));
        }
        const Scalar first = Scalar(m_users) * rate_far_phase1(ep, pp.per_beam);
        pp.final_slot = detail::invert_final_slot(ep.b0, prob.far_target - first);
        return pp;
    };
    const auto energy_at = [&](Scalar t) {
        return detail::total_energy_of(profile_at(t), m_users, prob.slot_duration);
    };

    // Upper end of the sweep: either phase 1 alone reaches R_0 (S = S_req) or
    // all beams are capped and S cannot grow further.
    const Scalar s_req = std::sqrt(std::expm1(prob.far_target / Scalar(m_users)) / ep.a0);
    Scalar s_max = 0;
    Scalar t_cap = 0;
    bool any_uncapped = false;
    for (const Eigen::Index m : prob.selected) {
        if (ep.g(m) <= Scalar(0))
            continue;
        if (std::isinf(ep.caps(m))) {
            any_uncapped = true;
        } else {
            s_max += ep.g(m) * std::sqrt(ep.caps(m));
            t_cap = std::max(t_cap, std::sqrt(ep.caps(m)) / ep.g(m));
        }
    }
    Scalar t_hi;
    if (!any_uncapped && s_max < s_req) {
        t_hi = t_cap;
    } else {
        // S(t) is monotone; bracket geometrically, then bisect to S = S_req.
        Scalar lo = 0, hi = s_req / g_sq_sum;
        while (combined_amplitude(ep, profile_at(hi).per_beam) < s_req) {
            lo = hi;
            hi *= Scalar(2);
            ++iters;
        }
        for (int it = 0; it < 200 && (hi - lo) > Scalar(1e-12) * hi; ++it) {
            const Scalar mid = (lo + hi) / Scalar(2);
            (combined_amplitude(ep, profile_at(mid).per_beam) < s_req ? lo : hi) = mid;
            ++iters;
        }
        t_hi = hi;
    }

    const Scalar t_best = detail::scan_then_refine(energy_at, Scalar(0), t_hi, 257, iters);
    const PowerProfile<Scalar> pp = profile_at(t_best);
    const Scalar hybrid_energy = detail::total_energy_of(pp, m_users, prob.slot_duration);
    const Scalar oma_energy =
        prob.slot_duration * detail::invert_final_slot(ep.b0, prob.far_target);
    if (!detail::improves_on(hybrid_energy, oma_energy))
        return detail::oma_as_result(prob, iters);
    return detail::finish(prob, pp, AllocationMode::hybrid, iters);
}

// Approach II. For
//   min M sum P_m + P0   s.t.  M log(1 + a_m h_m P_m) + log(1 + b0 P0) >= R_0
//                              for every selected m, and
//                              M log(1 + a0 (sum g_k sqrt(P_k))^2)
//                                + log(1 + b0 P0) >= R_0,
// the inner minimization given P0 is exact: each per-beam constraint inverts
// to a floor on P_m, and the coupled constraint is met by raising amplitudes
// to sqrt(P_m) = max(sqrt(floor_m), nu g_m) with the multiplier nu found by
// bisection (the water-filling KKT point of the top-up QP). The outer search
// over P0 in [0, P0_oma] is convex by partial minimization.
template <typename Scalar = double>
AllocationResult<Scalar> solve_approach2(const AllocationProblem<Scalar>& prob) {
    prob.validate();
    const auto& ep = prob.params;
    const Eigen::Index m_users = prob.num_legacy();
    long iters = 0;

    if (prob.far_target <= Scalar(0)) {
        AllocationResult<Scalar> res;
        res.powers = zero_profile(m_users, ep.p_legacy);
        return res;
    }
    if (prob.selected.empty())
        return detail::oma_as_result(prob, iters);

    Scalar g_sq_sum = 0;
    for (const Eigen::Index m : prob.selected)
        g_sq_sum += ep.g(m) * ep.g(m);
    if (!(g_sq_sum > Scalar(0)))
        return detail::oma_as_result(prob, iters); // coupled constraint unreachable in phase 1

    const Scalar p0_oma = detail::invert_final_slot(ep.b0, prob.far_target);

    const auto profile_at = [&](Scalar p0) {
        PowerProfile<Scalar> pp = zero_profile(m_users, ep.p_legacy);
        pp.final_slot = p0;
        const Scalar need =
            std::max(Scalar(0), prob.far_target - rate_far_final_slot(ep, p0));
        if (need <= Scalar(0))
            return pp;
        const Scalar per_slot = std::expm1(need / Scalar(m_users));
        Scalar s_floor = 0;
        for (const Eigen::Index m : prob.selected) {
            pp.per_beam(m) = per_slot / (ep.a(m) * ep.h_eff(m));
            s_floor += ep.g(m) * std::sqrt(pp.per_beam(m));
        }
        const Scalar s_req = std::sqrt(per_slot / ep.a0);
        if (s_floor < s_req) {
            const auto amplitude = [&](Scalar nu) {
                Scalar s = 0;
                for (const Eigen::Index m : prob.selected)
                    s += ep.g(m) * std::max(std::sqrt(pp.per_beam(m)), nu * ep.g(m));
                return s;
            };
            Scalar lo = 0, hi = s_req / g_sq_sum;
            for (int it = 0; it < 200 && (hi - lo) > Scalar(1e-15) * hi; ++it) {
                const Scalar mid = (lo + hi) / Scalar(2);
                (amplitude(mid) < s_req ? lo : hi) = mid;
            }
            for (const Eigen::Index m : prob.selected) {
                const Scalar q = std::max(std::sqrt(pp.per_beam(m)), hi * ep.g(m));
                pp.per_beam(m) = q * q;
            }
        }
        return pp;
    };
    const auto energy_at = [&](Scalar p0) {
        return detail::total_energy_of(profile_at(p0), m_users, prob.slot_duration);
    };

    const Scalar p0_best = detail::scan_then_refine(energy_at, Scalar(0), p0_oma, 257, iters);
    const PowerProfile<Scalar> pp = profile_at(p0_best);
    const Scalar hybrid_energy = detail::total_energy_of(pp, m_users, prob.slot_duration);
    if (!detail::improves_on(hybrid_energy, prob.slot_duration * p0_oma))
        return detail::oma_as_result(prob, iters);
    return detail::finish(prob, pp, AllocationMode::hybrid, iters);
}

// Parameters of the two-user special case M = M_x = 1, reduced to the single
// effective gain beta = min{a_1 h_1, a_0 g_1^2}.
template <typename Scalar = double>
EffectiveParams<Scalar> synthetic_two_user_params(Scalar a1_h1, Scalar a0_g1_sq, Scalar b0) {
    EffectiveParams<Scalar> ep;
    ep.h_eff = Eigen::VectorX<Scalar>::Constant(1, Scalar(1));
    ep.a = Eigen::VectorX<Scalar>::Constant(1, a1_h1);
    ep.a0 = a0_g1_sq;
    ep.g = Eigen::VectorX<Scalar>::Constant(1, Scalar(1));
    ep.g0 = Scalar(1);
    ep.b0 = b0;
    ep.caps = Eigen::VectorX<Scalar>::Constant(1, std::numeric_limits<Scalar>::infinity());
    ep.p_legacy = Scalar(1);
    ep.noise = Scalar(1);
    ep.rate_target = Scalar(0);
    ep.validate();
    return ep;
}

// Exact closed form for M = M_x = 1. With beta = min{a_1 h_1, a_0 g_1^2},
// hybrid transmission is optimal iff e^{R_0} >= b0 / beta, in which case
//   P_1 = sqrt(e^{R_0} / (beta b0)) - 1/beta,
//   P_0 = sqrt(e^{R_0} / (beta b0)) - 1/b0,
// and P_0 > 0 whenever beta < b0 (pure NOMA is never optimal). Otherwise the
// OMA baseline is returned. `literal_threshold` switches the hybrid condition
// to the unexponentiated variant R_0 >= b0 / beta.
template <typename Scalar = double>
AllocationResult<Scalar> closed_form_two_user(const EffectiveParams<Scalar>& params,
                                              Scalar far_target, bool literal_threshold = false,
                                              Scalar slot_duration = Scalar(1)) {
    if (params.num_legacy() != 1)
        throw std::invalid_argument("closed_form_two_user: requires exactly one legacy user");
    params.validate();

    AllocationResult<Scalar> res;
    res.powers = zero_profile(Eigen::Index(1), params.p_legacy);
    if (far_target <= Scalar(0))
        return res;

    const Scalar beta = std::min(params.a(0) * params.h_eff(0), params.a0 * params.g(0) * params.g(0));
    const Scalar b0 = params.b0;
    const bool hybrid = literal_threshold ? far_target >= b0 / beta
                                          : std::exp(far_target) >= b0 / beta;
    if (!hybrid) {
        res = solve_oma_baseline(params, far_target, slot_duration);
        return res;
    }

    const Scalar root = std::exp(far_target / Scalar(2)) / std::sqrt(beta * b0);
    res.powers.per_beam(0) = std::max(Scalar(0), root - Scalar(1) / beta);
    res.powers.final_slot = root - Scalar(1) / b0;
    res.total_energy = slot_duration * (res.powers.per_beam(0) + res.powers.final_slot);
    res.mode = AllocationMode::hybrid;
    res.constraint_residual = std::log1p(beta * res.powers.per_beam(0)) +
                              std::log1p(b0 * res.powers.final_slot) - far_target;
    res.dual_multiplier = root;
    return res;
}

// High-SNR closed form for strictly orthogonal beams. With
// c = min{1/P, a0 |sum_{k selected} g_k|^2} and the multiplier
//   lambda = (M_x^M e^{R_0} / (c^M b0))^{1/(M+1)},
// the selected beams share P_m = lambda/M_x - 1/c and P_0 = lambda - 1/b0
// whenever e^{R_0} >= M_x b0 / c; otherwise OMA. The result also carries the
// large-M approximation of P_m for diagnostics. This is an approximation: its
// residual against the exact constraints can be negative.
template <typename Scalar = double>
AllocationResult<Scalar> high_snr_closed_form(const EffectiveParams<Scalar>& params,
                                              Scalar far_target,
                                              const std::vector<Eigen::Index>& selected,
                                              bool literal_threshold = false,
                                              Scalar slot_duration = Scalar(1)) {
    params.validate();
    const Eigen::Index m_users = params.num_legacy();
    const Eigen::Index m_sel = static_cast<Eigen::Index>(selected.size());
    if (m_sel < 1)
        throw std::invalid_argument("high_snr_closed_form: need at least one selected beam");

    AllocationResult<Scalar> res;
    res.powers = zero_profile(m_users, params.p_legacy);
    if (far_target <= Scalar(0))
        return res;

    Scalar g_sum = 0;
    for (const Eigen::Index m : selected)
        g_sum += params.g(m);
    const Scalar c = std::min(Scalar(1) / params.p_legacy, params.a0 * g_sum * g_sum);

    const Scalar log_threshold = std::log(Scalar(m_sel) * params.b0 / c);
    const bool hybrid = c > Scalar(0) &&
                        (literal_threshold ? far_target >= Scalar(m_sel) * params.b0 / c
                                           : far_target >= log_threshold);
    if (!hybrid) {
        auto oma = solve_oma_baseline(params, far_target, slot_duration);
        oma.large_m_power = Scalar(0);
        return oma;
    }

    // log lambda keeps M_x^M e^{R_0} / c^M representable for large M, R_0.
    const Scalar log_lambda = (Scalar(m_users) * std::log(Scalar(m_sel)) + far_target -
                               Scalar(m_users) * std::log(c) - std::log(params.b0)) /
                              Scalar(m_users + 1);
    const Scalar lambda = std::exp(log_lambda);
    const Scalar p_t = std::max(Scalar(0), lambda / Scalar(m_sel) - Scalar(1) / c);
    for (const Eigen::Index m : selected)
        res.powers.per_beam(m) = p_t;
    res.powers.final_slot = std::max(Scalar(0), lambda - Scalar(1) / params.b0);
    res.total_energy = detail::total_energy_of(res.powers, m_users, slot_duration);
    res.mode = AllocationMode::hybrid;
    res.dual_multiplier = lambda;
    res.constraint_residual =
        total_far_rate(res.powers, params, Approach::approach_2, selected) - far_target;
    res.large_m_power =
        (std::exp((far_target - std::log(Scalar(m_sel) * params.b0)) / Scalar(m_users + 1)) -
         Scalar(1)) /
        c;
    return res;
}

// Exhaustive verification oracle, independent of the solvers above. The
// selected powers (at most 3) are searched directly; at every evaluated point
// the minimal feasible P0 is recovered by closed-form inversion of the binding
// constraint. A full grid over the search box locates the basin, then a
// full-stencil pattern search (all 3^d - 1 step directions, step halved
// whenever no direction improves, i.e. local bisection) polishes the grid
// minimizer down to grid_step. The per-beam search box is bounded by the power
// at which a beam would satisfy its binding constraint alone at P0 = 0 (and by
// the cap under Approach I), which always contains the optimum.
template <typename Scalar = double>
AllocationResult<Scalar> brute_force_oracle(const AllocationProblem<Scalar>& prob,
                                            Scalar grid_step) {
    prob.validate();
    if (prob.selected.size() > 3)
        throw std::invalid_argument("brute_force_oracle: at most 3 selected beams");
    if (!(grid_step > Scalar(0)))
        throw std::invalid_argument("brute_force_oracle: grid_step must be > 0");
    const auto& ep = prob.params;
    const Eigen::Index m_users = prob.num_legacy();
    long iters = 0;

    if (prob.far_target <= Scalar(0)) {
        AllocationResult<Scalar> res;
        res.powers = zero_profile(m_users, ep.p_legacy);
        return res;
    }

    const int dims = static_cast<int>(prob.selected.size());
    const Scalar per_slot_full = std::expm1(prob.far_target / Scalar(m_users));
    std::vector<Scalar> hi(static_cast<std::size_t>(dims));
    for (int d = 0; d < dims; ++d) {
        const Eigen::Index m = prob.selected[static_cast<std::size_t>(d)];
        Scalar bound = 0;
        if (ep.g(m) > Scalar(0))
            bound = per_slot_full / (ep.a0 * ep.g(m) * ep.g(m));
        if (prob.approach == Approach::approach_2)
            bound = std::max(bound, per_slot_full / (ep.a(m) * ep.h_eff(m)));
        else
            bound = std::min(bound, ep.caps(m));
        hi[static_cast<std::size_t>(d)] = bound;
    }

    const auto evaluate = [&](const std::vector<Scalar>& p) {
        PowerProfile<Scalar> pp = zero_profile(m_users, ep.p_legacy);
        for (int d = 0; d < dims; ++d)
            pp.per_beam(prob.selected[static_cast<std::size_t>(d)]) =
                p[static_cast<std::size_t>(d)];
        Scalar phase1 = rate_far_phase1(ep, pp.per_beam);
        if (prob.approach == Approach::approach_2) {
            for (const Eigen::Index m : prob.selected)
                phase1 = std::min(phase1, rate_decode_far(ep, m, pp.per_beam(m)));
        }
        pp.final_slot = detail::invert_final_slot(
            ep.b0, prob.far_target - Scalar(m_users) * phase1);
        return pp;
    };
    const auto energy_of = [&](const std::vector<Scalar>& p) {
        ++iters;
        return detail::total_energy_of(evaluate(p), m_users, prob.slot_duration);
    };

    // global grid pass
    const int points = dims == 1 ? 513 : (dims == 2 ? 49 : 21);
    std::vector<Scalar> step(static_cast<std::size_t>(dims));
    for (int d = 0; d < dims; ++d)
        step[static_cast<std::size_t>(d)] = hi[static_cast<std::size_t>(d)] / Scalar(points - 1);
    std::vector<Scalar> best_p(static_cast<std::size_t>(dims), Scalar(0));
    Scalar best_energy = std::numeric_limits<Scalar>::infinity();
    {
        std::vector<Scalar> p(static_cast<std::size_t>(dims));
        std::vector<int> idx(static_cast<std::size_t>(dims), 0);
        bool done = false;
        while (!done) {
            for (int d = 0; d < dims; ++d) {
                const auto ud = static_cast<std::size_t>(d);
                p[ud] = step[ud] * Scalar(idx[ud]);
            }
            const Scalar e = energy_of(p);
            if (e < best_energy) {
                best_energy = e;
                best_p = p;
            }
            int d = 0;
            for (; d < dims; ++d) {
                auto& i = idx[static_cast<std::size_t>(d)];
                if (++i < points)
                    break;
                i = 0;
            }
            done = d == dims;
        }
    }

    // Full-stencil descent from the grid minimizer. The step is shared by all
    // dimensions: the min over per-beam constraints puts the descent direction
    // near the equal-increment diagonal whenever several constraints are
    // active, and a skewed stencil would stall outside that descent cone.
    std::vector<std::vector<int>> directions;
    {
        std::vector<int> dir(static_cast<std::size_t>(dims), -1);
        while (true) {
            if (std::any_of(dir.begin(), dir.end(), [](int v) { return v != 0; }))
                directions.push_back(dir);
            int d = 0;
            for (; d < dims; ++d) {
                auto& v = dir[static_cast<std::size_t>(d)];
                if (++v <= 1)
                    break;
                v = -1;
            }
            if (d == dims)
                break;
        }
    }
    Scalar walk_step = *std::max_element(step.begin(), step.end());
    std::vector<Scalar> trial(static_cast<std::size_t>(dims));
    const auto try_move = [&](const auto& dir, Scalar scale) {
        for (int d = 0; d < dims; ++d) {
            const auto ud = static_cast<std::size_t>(d);
            trial[ud] =
                std::clamp(best_p[ud] + Scalar(dir[ud]) * scale, Scalar(0), hi[ud]);
        }
        if (trial == best_p)
            return false;
        const Scalar e = energy_of(trial);
        if (e < best_energy) {
            best_energy = e;
            best_p = trial;
            return true;
        }
        return false;
    };
    // Candidate escape directions at a stalled point. At a tie of several
    // per-beam constraints the descent cone collapses onto the ray that raises
    // all tied rates equally, delta_m ~ (1 + a_m h_m P_m) / (a_m h_m); at a
    // coupled-constraint tie it lies near the water-level ray delta_m ~ g_m^2.
    // Both are functions of the problem data only.
    const auto cone_axes = [&]() {
        std::vector<std::vector<Scalar>> axes;
        std::vector<Scalar> equalize(static_cast<std::size_t>(dims), Scalar(0));
        std::vector<Scalar> water(static_cast<std::size_t>(dims), Scalar(0));
        for (int d = 0; d < dims; ++d) {
            const Eigen::Index m = prob.selected[static_cast<std::size_t>(d)];
            const Scalar ahm = ep.a(m) * ep.h_eff(m);
            equalize[static_cast<std::size_t>(d)] =
                (Scalar(1) + ahm * best_p[static_cast<std::size_t>(d)]) / ahm;
            water[static_cast<std::size_t>(d)] = ep.g(m) * ep.g(m);
        }
        const auto normalized = [dims](std::vector<Scalar> v) {
            Scalar mag = 0;
            for (int d = 0; d < dims; ++d)
                mag = std::max(mag, std::abs(v[static_cast<std::size_t>(d)]));
            if (mag > Scalar(0))
                for (auto& x : v)
                    x /= mag;
            return v;
        };
        const auto push_pair = [&](std::vector<Scalar> v) {
            v = normalized(std::move(v));
            auto neg = v;
            for (auto& x : neg)
                x = -x;
            axes.push_back(std::move(v));
            axes.push_back(std::move(neg));
        };
        push_pair(equalize);
        push_pair(water);
        for (const Scalar mix : {Scalar(0.25), Scalar(1), Scalar(4)}) {
            std::vector<Scalar> blend(static_cast<std::size_t>(dims));
            const auto eqn = normalized(equalize);
            const auto wtn = normalized(water);
            for (int d = 0; d < dims; ++d) {
                const auto ud = static_cast<std::size_t>(d);
                blend[ud] = eqn[ud] + mix * wtn[ud];
            }
            push_pair(std::move(blend));
        }
        return axes;
    };

    std::mt19937_64 dir_gen(0x0eac1eu);
    for (long sweep = 0; sweep < 4000; ++sweep) {
        bool improved = false;
        for (const auto& dir : directions)
            improved = try_move(dir, walk_step) || improved;
        if (!improved && dims > 1) {
            for (const auto& axis : cone_axes()) {
                for (const Scalar scale :
                     {walk_step / Scalar(16), walk_step / Scalar(4), walk_step,
                      walk_step * Scalar(4), walk_step * Scalar(16)})
                    improved = try_move(axis, scale) || improved;
                if (improved)
                    break;
            }
        }
        if (!improved && dims > 1) {
            // last resort: random rays may still find a leftover sliver
            std::vector<Scalar> ray(static_cast<std::size_t>(dims));
            for (int attempt = 0; attempt < 128 && !improved; ++attempt) {
                Scalar mag = 0;
                for (auto& v : ray) {
                    v = Scalar(2) * Scalar(uniform_unit(dir_gen)) - Scalar(1);
                    mag = std::max(mag, std::abs(v));
                }
                if (mag <= Scalar(0))
                    continue;
                for (auto& v : ray)
                    v /= mag;
                improved = try_move(ray, walk_step);
            }
        }
        if (!improved) {
            walk_step /= Scalar(2);
            if (walk_step < grid_step)
                break;
        }
    }

    const PowerProfile<Scalar> pp = evaluate(best_p);
    const Scalar oma_energy =
        prob.slot_duration * detail::invert_final_slot(ep.b0, prob.far_target);
    if (!detail::improves_on(best_energy, oma_energy))
        return detail::oma_as_result(prob, iters);
    return detail::finish(prob, pp, AllocationMode::hybrid, iters);
}

// Best of the hybrid solver for the problem's approach and the OMA baseline.
// OMA is feasible for every hybrid program, so the hybrid optimum can never be
// worse; the comparison is still made explicitly rather than assumed.
template <typename Scalar = double>
AllocationResult<Scalar> best_energy(const AllocationProblem<Scalar>& prob) {
    const AllocationResult<Scalar> hybrid = prob.approach == Approach::approach_1
                                                ? solve_approach1(prob)
                                                : solve_approach2(prob);
    AllocationResult<Scalar> oma = solve_oma_baseline(prob.params, prob.far_target,
                                                      prob.slot_duration);
    oma.solver_iterations = hybrid.solver_iterations;
    return hybrid.total_energy <= oma.total_energy ? hybrid : oma;
}

} // namespace nfnoma

#endif
