#include "nfnoma/allocator.hpp"
#include "nfnoma/rng.hpp"
#include "nfnoma/scenario.hpp"

#include <doctest.h>

#include <cmath>
#include <numbers>

using namespace nfnoma;
using doctest::Approx;

namespace {

EffectiveParams<double> synth(const std::vector<double>& ah, const std::vector<double>& g,
                              double a0, double b0, double p_legacy = 1.0) {
    const auto m = static_cast<Eigen::Index>(ah.size());
    EffectiveParams<double> ep;
    ep.h_eff = Eigen::Map<const Eigen::VectorXd>(ah.data(), m);
    ep.a = Eigen::VectorXd::Ones(m);
    ep.g = Eigen::Map<const Eigen::VectorXd>(g.data(), m);
    ep.g0 = 1.0;
    ep.a0 = a0;
    ep.b0 = b0;
    ep.caps = Eigen::VectorXd::Constant(m, std::numeric_limits<double>::infinity());
    ep.p_legacy = p_legacy;
    ep.noise = 1.0;
    ep.rate_target = 0.0;
    ep.validate();
    return ep;
}

std::vector<Eigen::Index> all_of(Eigen::Index m) {
    std::vector<Eigen::Index> sel(static_cast<std::size_t>(m));
    std::iota(sel.begin(), sel.end(), Eigen::Index(0));
    return sel;
}

} // namespace

TEST_CASE("qualify_and_select") {
    auto ep = synth({3.0, 1.0, 2.0}, {1.0, 1.0, 1.0}, 1.0, 10.0);
    SUBCASE("sorts by effective gain, keeps the best Mx") {
        const auto sel = qualify_and_select(ep, 2, Approach::approach_2);
        REQUIRE(sel.size() == 2);
        CHECK(sel[0] == 0); // h = 3
        CHECK(sel[1] == 2); // h = 2
    }
    SUBCASE("ties break toward the lower index") {
        auto tied = synth({2.0, 2.0, 2.0}, {1.0, 1.0, 1.0}, 1.0, 10.0);
        const auto sel = qualify_and_select(tied, 2, Approach::approach_2);
        REQUIRE(sel.size() == 2);
        CHECK(sel[0] == 0);
        CHECK(sel[1] == 1);
    }
    SUBCASE("approach 1 drops unqualified beams") {
        ep.caps << 0.5, -0.1, 0.2; // beam 1 unqualified
        const auto sel = qualify_and_select(ep, 3, Approach::approach_1);
        REQUIRE(sel.size() == 2);
        CHECK(sel[0] == 0);
        CHECK(sel[1] == 2);
        // approach 2 ignores caps
        CHECK(qualify_and_select(ep, 3, Approach::approach_2).size() == 3);
    }
    SUBCASE("no beam qualified gives an empty list") {
        ep.caps << -1.0, -1.0, -1.0;
        CHECK(qualify_and_select(ep, 2, Approach::approach_1).empty());
    }
    SUBCASE("max_selected must be positive") {
        CHECK_THROWS_AS(qualify_and_select(ep, 0, Approach::approach_2), std::invalid_argument);
    }
}

TEST_CASE("OMA baseline") {
    auto ep = synth({1.0}, {1.0}, 1.0, 2.0);
    SUBCASE("zero target, zero energy") {
        const auto res = solve_oma_baseline(ep, 0.0);
        CHECK(res.total_energy == 0.0);
        CHECK(res.powers.final_slot == 0.0);
        CHECK(res.mode == AllocationMode::oma_fallback);
    }
    SUBCASE("b0 = 2, R0 = ln 4") {
        const auto res = solve_oma_baseline(ep, std::log(4.0));
        CHECK(res.powers.final_slot == Approx(1.5).epsilon(1e-14));
        CHECK(res.total_energy == Approx(1.5).epsilon(1e-14));
        CHECK(std::abs(res.constraint_residual) < 1e-12);
    }
    SUBCASE("b0 = 93.1, R0 = 10 nats") {
        ep.b0 = 93.1;
        const auto res = solve_oma_baseline(ep, 10.0);
        CHECK(res.powers.final_slot == Approx(std::expm1(10.0) / 93.1).epsilon(1e-14));
        CHECK(res.powers.final_slot == Approx(236.6).epsilon(1e-3));
    }
    SUBCASE("slot duration scales the energy") {
        const auto res = solve_oma_baseline(ep, 1.0, 2.5);
        CHECK(res.total_energy == Approx(2.5 * res.powers.final_slot).epsilon(1e-14));
    }
}

TEST_CASE("two-user closed form") {
    SUBCASE("beta = 1, b0 = 2, R0 = ln 4") {
        const auto ep = synth({1.0}, {1.0}, 1.0, 2.0);
        const auto res = closed_form_two_user(ep, std::log(4.0));
        CHECK(res.mode == AllocationMode::hybrid);
        CHECK(res.powers.per_beam(0) == Approx(std::sqrt(2.0) - 1.0).epsilon(1e-12));
        CHECK(res.powers.final_slot == Approx(std::sqrt(2.0) - 0.5).epsilon(1e-12));
        CHECK(res.total_energy == Approx(2.0 * std::sqrt(2.0) - 1.5).epsilon(1e-12));
        CHECK(res.powers.per_beam(0) == Approx(0.41421).epsilon(1e-4));
        CHECK(res.powers.final_slot == Approx(0.91421).epsilon(1e-4));
        CHECK(std::abs(res.constraint_residual) < 1e-12);
        CHECK(res.dual_multiplier == Approx(std::sqrt(2.0)).epsilon(1e-12));
    }
    SUBCASE("beta is the weaker of the two branches") {
        const auto via_ah = closed_form_two_user(synth({0.4}, {10.0}, 1.0, 3.0), 2.0);
        const auto direct = closed_form_two_user(synth({1.0}, {1.0}, 0.4, 3.0), 2.0);
        CHECK(via_ah.total_energy == Approx(direct.total_energy).epsilon(1e-12));
    }
    SUBCASE("continuous handoff at the threshold") {
        const auto ep = synth({0.5}, {1.0}, 0.9, 4.0); // beta = 0.5
        const double r0_star = std::log(4.0 / 0.5);
        const auto at = closed_form_two_user(ep, r0_star);
        const auto oma = solve_oma_baseline(ep, r0_star);
        CHECK(at.powers.per_beam(0) < 1e-14);
        CHECK(at.powers.final_slot == Approx(oma.powers.final_slot).epsilon(1e-12));
        CHECK(at.total_energy == Approx(oma.total_energy).epsilon(1e-12));
    }
    SUBCASE("mode flips exactly at the threshold") {
        auto gen = make_stream(404, 0);
        for (int rep = 0; rep < 50; ++rep) {
            const double beta = std::exp(uniform_range(gen, -3.0, 3.0));
            const double b0 = beta * std::exp(uniform_range(gen, 0.2, 5.0));
            const auto ep = synth({beta}, {1.0}, 2.0 * beta, b0);
            const double r0_star = std::log(b0 / beta);
            CHECK(closed_form_two_user(ep, r0_star + 1e-9).mode == AllocationMode::hybrid);
            CHECK(closed_form_two_user(ep, r0_star - 1e-9).mode ==
                  AllocationMode::oma_fallback);
        }
    }
    SUBCASE("hybrid P0 stays positive") {
        auto gen = make_stream(405, 0);
        for (int rep = 0; rep < 50; ++rep) {
            const double beta = std::exp(uniform_range(gen, -3.0, 3.0));
            const double b0 = beta * std::exp(uniform_range(gen, 0.2, 5.0));
            const double r0 = uniform_range(gen, 0.1, 12.0);
            const auto res = closed_form_two_user(synth({beta}, {1.0}, 2.0 * beta, b0), r0);
            if (res.mode == AllocationMode::hybrid)
                CHECK(res.powers.final_slot > 0.0);
        }
    }
    SUBCASE("literal threshold variant compares R0 itself") {
        const auto ep = synth({1.0}, {1.0}, 1.0, 3.0); // b0/beta = 3
        const double r0 = 2.0;                          // e^2 > 3 but 2 < 3
        CHECK(closed_form_two_user(ep, r0, false).mode == AllocationMode::hybrid);
        CHECK(closed_form_two_user(ep, r0, true).mode == AllocationMode::oma_fallback);
    }
    SUBCASE("requires exactly one legacy user") {
        const auto ep = synth({1.0, 1.0}, {1.0, 1.0}, 1.0, 2.0);
        CHECK_THROWS_AS(closed_form_two_user(ep, 1.0), std::invalid_argument);
    }
}

TEST_CASE("approach 1 solver") {
    SUBCASE("zero target returns the all-zero allocation") {
        const auto ep = synth({1.0, 2.0}, {1.0, 0.5}, 1.0, 5.0);
        AllocationProblem<double> prob{ep, Approach::approach_1, 0.0, all_of(2), 1.0};
        const auto res = solve_approach1(prob);
        CHECK(res.total_energy == 0.0);
        CHECK(res.powers.per_beam.maxCoeff() == 0.0);
        CHECK(res.powers.final_slot == 0.0);
    }
    SUBCASE("uncapped single beam with the coupled branch binding matches the closed form") {
        // a0 g1^2 = 0.6 < a1 h1 = 2, so beta = a0 g1^2 and the approach-1
        // constraint coincides with the two-user program.
        const auto ep = synth({2.0}, {1.0}, 0.6, 8.0);
        AllocationProblem<double> prob{ep, Approach::approach_1, 3.0, {0}, 1.0};
        const auto res = solve_approach1(prob);
        const auto ref = closed_form_two_user(synth({0.6}, {1.0}, 10.0, 8.0), 3.0);
        REQUIRE(ref.mode == AllocationMode::hybrid);
        CHECK(res.mode == AllocationMode::hybrid);
        CHECK(res.total_energy == Approx(ref.total_energy).epsilon(1e-6));
        CHECK(res.powers.per_beam(0) == Approx(ref.powers.per_beam(0)).epsilon(1e-4));
    }
    SUBCASE("random capped instances match the oracle") {
        auto gen = make_stream(500, 0);
        for (int rep = 0; rep < 12; ++rep) {
            const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 2);
            std::vector<double> ah, g;
            for (Eigen::Index i = 0; i < m; ++i) {
                ah.push_back(std::exp(uniform_range(gen, -1.0, 2.0)));
                g.push_back(std::exp(uniform_range(gen, -1.0, 1.0)));
            }
            const double a0 = std::exp(uniform_range(gen, -2.0, 1.0));
            const double b0 = std::exp(uniform_range(gen, 1.0, 4.0));
            auto ep = synth(ah, g, a0, b0);
            for (Eigen::Index i = 0; i < m; ++i)
                ep.caps(i) = uniform_range(gen, 0.05, 0.8);
            const double r0 = uniform_range(gen, 0.5, 6.0);
            AllocationProblem<double> prob{ep, Approach::approach_1, r0, all_of(m), 1.0};
            const auto res = solve_approach1(prob);
            const auto ref = brute_force_oracle(prob, 1e-6);
            CHECK(std::abs(res.total_energy - ref.total_energy) <=
                  1e-3 * ref.total_energy + 1e-12);
            CHECK(res.constraint_residual >= -1e-9);
            for (Eigen::Index i = 0; i < m; ++i)
                CHECK(res.powers.per_beam(i) <= ep.caps(i) + 1e-12);
            const auto oma = solve_oma_baseline(ep, r0);
            CHECK(res.total_energy <= oma.total_energy + 1e-9);
        }
    }
    SUBCASE("beams invisible to the far user degrade to OMA") {
        const auto ep = synth({1.0, 1.0}, {0.0, 0.0}, 1.0, 5.0);
        AllocationProblem<double> prob{ep, Approach::approach_1, 2.0, all_of(2), 1.0};
        const auto res = solve_approach1(prob);
        CHECK(res.mode == AllocationMode::oma_fallback);
        CHECK(res.total_energy ==
              Approx(solve_oma_baseline(ep, 2.0).total_energy).epsilon(1e-12));
    }
    SUBCASE("unqualified selected beam is rejected") {
        auto ep = synth({1.0}, {1.0}, 1.0, 5.0);
        ep.caps(0) = -0.5;
        AllocationProblem<double> prob{ep, Approach::approach_1, 2.0, {0}, 1.0};
        CHECK_THROWS_AS(solve_approach1(prob), std::invalid_argument);
    }
}

TEST_CASE("approach 2 solver") {
    SUBCASE("M = Mx = 1 agrees with the closed form") {
        auto gen = make_stream(600, 0);
        for (int rep = 0; rep < 100; ++rep) {
            const double beta = std::exp(uniform_range(gen, -2.5, 2.5));
            const double ratio = std::exp(uniform_range(gen, 0.1, 4.0));
            const double b0 = beta * ratio;
            const bool ah_is_min = gen() % 2 == 0;
            const double other = beta * std::exp(uniform_range(gen, 0.0, 2.0));
            const double r0 = uniform_range(gen, 0.05, 2.0 * std::log(ratio) + 4.0);
            const auto ep = ah_is_min ? synth({beta}, {1.0}, other, b0)
                                      : synth({other}, {1.0}, beta, b0);
            AllocationProblem<double> prob{ep, Approach::approach_2, r0, {0}, 1.0};
            const auto res = solve_approach2(prob);
            const auto ref = closed_form_two_user(ep, r0);
            CHECK(std::abs(res.total_energy - ref.total_energy) <=
                  1e-6 * std::max(ref.total_energy, 1e-9));
            CHECK(res.constraint_residual >= -1e-9);
        }
    }
    SUBCASE("tight agreement on a well-scaled instance") {
        const auto ep = synth({0.8}, {1.0}, 1.7, 6.0);
        AllocationProblem<double> prob{ep, Approach::approach_2, 3.0, {0}, 1.0};
        const auto res = solve_approach2(prob);
        const auto ref = closed_form_two_user(ep, 3.0);
        CHECK(std::abs(res.total_energy - ref.total_energy) <= 1e-9 * ref.total_energy);
    }
    SUBCASE("symmetric instances get equal powers") {
        const auto ep = synth({2.0, 2.0, 2.0}, {1.0, 1.0, 1.0}, 0.8, 50.0);
        AllocationProblem<double> prob{ep, Approach::approach_2, 6.0, all_of(3), 1.0};
        const auto res = solve_approach2(prob);
        REQUIRE(res.mode == AllocationMode::hybrid);
        const double p0 = res.powers.per_beam(0);
        CHECK(p0 > 0.0);
        for (Eigen::Index m = 1; m < 3; ++m)
            CHECK(res.powers.per_beam(m) == Approx(p0).epsilon(1e-8));
    }
    SUBCASE("random instances match the oracle") {
        auto gen = make_stream(601, 0);
        for (int rep = 0; rep < 12; ++rep) {
            const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 3);
            std::vector<double> ah, g;
            for (Eigen::Index i = 0; i < m; ++i) {
                ah.push_back(std::exp(uniform_range(gen, -2.0, 3.0)));
                g.push_back(std::exp(uniform_range(gen, -1.5, 1.0)));
            }
            const double a0 = std::exp(uniform_range(gen, -2.0, 1.5));
            const double b0 = std::exp(uniform_range(gen, 0.5, 5.0));
            const auto ep = synth(ah, g, a0, b0);
            const double r0 = uniform_range(gen, 0.3, 8.0);
            AllocationProblem<double> prob{ep, Approach::approach_2, r0, all_of(m), 1.0};
            const auto res = solve_approach2(prob);
            const auto ref = brute_force_oracle(prob, 1e-6);
            CHECK(std::abs(res.total_energy - ref.total_energy) <=
                  1e-3 * ref.total_energy + 1e-12);
            CHECK(res.constraint_residual >= -1e-9);
        }
    }
}

TEST_CASE("high-SNR closed form") {
    SUBCASE("M = Mx = 1 specializes to the two-user form with beta -> c") {
        const auto ep = synth({0.7}, {1.0}, 0.5, 5.0); // c = min(1/P, a0 g^2) = 0.5
        const auto ref = closed_form_two_user(synth({0.5}, {1.0}, 0.9, 5.0), 3.0);
        const auto res = high_snr_closed_form(ep, 3.0, {0});
        REQUIRE(ref.mode == AllocationMode::hybrid);
        CHECK(res.mode == AllocationMode::hybrid);
        CHECK(res.powers.per_beam(0) == Approx(ref.powers.per_beam(0)).epsilon(1e-12));
        CHECK(res.powers.final_slot == Approx(ref.powers.final_slot).epsilon(1e-12));
        CHECK(res.dual_multiplier == Approx(ref.dual_multiplier).epsilon(1e-12));
    }
    SUBCASE("the multiplier satisfies the merged binding constraint") {
        auto gen = make_stream(700, 0);
        for (int rep = 0; rep < 50; ++rep) {
            const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 4);
            std::vector<double> ah(static_cast<std::size_t>(m), 1.0), g;
            for (Eigen::Index i = 0; i < m; ++i)
                g.push_back(std::exp(uniform_range(gen, -1.0, 1.0)));
            const double p_legacy = std::exp(uniform_range(gen, -2.0, 2.0));
            const double a0 = std::exp(uniform_range(gen, -2.0, 1.0));
            const double b0 = std::exp(uniform_range(gen, 0.5, 4.0));
            const auto ep = synth(ah, g, a0, b0, p_legacy);
            const Eigen::Index mx = 1 + static_cast<Eigen::Index>(gen() % m);
            const auto sel = all_of(mx);
            double g_sum = 0;
            for (const auto i : sel)
                g_sum += ep.g(i);
            const double c = std::min(1.0 / ep.p_legacy, ep.a0 * g_sum * g_sum);
            const double r0 = std::log(double(mx) * ep.b0 / c) + uniform_range(gen, 0.5, 6.0);
            const auto res = high_snr_closed_form(ep, r0, sel);
            REQUIRE(res.mode == AllocationMode::hybrid);
            const double pt = res.powers.per_beam(sel.front());
            if (pt <= 0.0 || res.powers.final_slot <= 0.0)
                continue; // clamped corner; the merged constraint is not binding
            const double lhs = double(m) * std::log1p(c * pt) +
                               std::log1p(ep.b0 * res.powers.final_slot);
            CHECK(lhs == Approx(r0).epsilon(1e-9));
        }
    }
    SUBCASE("below the threshold it falls back to OMA") {
        const auto ep = synth({1.0}, {1.0}, 1.0, 1e6);
        const auto res = high_snr_closed_form(ep, 5.0, {0}); // ln(1e6) ~ 13.8 > 5
        CHECK(res.mode == AllocationMode::oma_fallback);
        CHECK(res.powers.final_slot == Approx(std::expm1(5.0) / 1e6).epsilon(1e-12));
    }
    SUBCASE("literal threshold variant") {
        // e^{R0} = e^4 > Mx b0 / c = 30 but R0 = 4 < 30
        const auto ep = synth({1.0}, {1.0}, 1.0, 30.0);
        CHECK(high_snr_closed_form(ep, 4.0, {0}, false).mode == AllocationMode::hybrid);
        CHECK(high_snr_closed_form(ep, 4.0, {0}, true).mode == AllocationMode::oma_fallback);
    }
    SUBCASE("large-M diagnostic matches its formula") {
        const auto ep = synth(std::vector<double>(40, 1.0), std::vector<double>(40, 0.3), 0.5,
                              100.0, 2.0);
        const auto sel = all_of(20);
        const auto res = high_snr_closed_form(ep, 12.0, sel);
        double g_sum = 0;
        for (const auto i : sel)
            g_sum += ep.g(i);
        const double c = std::min(1.0 / ep.p_legacy, ep.a0 * g_sum * g_sum);
        const double expect =
            (std::exp((12.0 - std::log(20.0 * ep.b0)) / 41.0) - 1.0) / c;
        CHECK(res.large_m_power == Approx(expect).epsilon(1e-12));
    }
    SUBCASE("deterministic scenario reference values at -70 dBm, R0 = 10") {
        auto spec = build_deterministic_scenario();
        const auto inst = build_instance(spec);
        const auto sel = qualify_and_select(inst.params, 3, Approach::approach_2);
        const auto res = high_snr_closed_form(inst.params, 10.0, sel);
        CHECK(res.powers.per_beam(0) == Approx(0.21182662132840774).epsilon(1e-6));
        CHECK(res.powers.per_beam(1) == Approx(res.powers.per_beam(0)).epsilon(1e-12));
        CHECK(res.powers.final_slot == Approx(0.7338587327191451).epsilon(1e-6));
        CHECK(res.dual_multiplier == Approx(0.7445995421480265).epsilon(1e-6));
    }
}

TEST_CASE("brute-force oracle") {
    const auto ep = synth({1.0, 2.0}, {1.0, 0.5}, 0.8, 10.0);
    SUBCASE("zero target") {
        AllocationProblem<double> prob{ep, Approach::approach_2, 0.0, all_of(2), 1.0};
        CHECK(brute_force_oracle(prob, 1e-4).total_energy == 0.0);
    }
    SUBCASE("dimension guard") {
        const auto big = synth({1, 1, 1, 1}, {1, 1, 1, 1}, 1.0, 10.0);
        AllocationProblem<double> prob{big, Approach::approach_2, 1.0, all_of(4), 1.0};
        CHECK_THROWS_AS(brute_force_oracle(prob, 1e-4), std::invalid_argument);
        AllocationProblem<double> ok{ep, Approach::approach_2, 1.0, all_of(2), 1.0};
        CHECK_THROWS_AS(brute_force_oracle(ok, 0.0), std::invalid_argument);
    }
    SUBCASE("two-user instances agree with the closed form") {
        auto gen = make_stream(800, 0);
        for (int rep = 0; rep < 10; ++rep) {
            const double beta = std::exp(uniform_range(gen, -1.5, 1.5));
            const double b0 = beta * std::exp(uniform_range(gen, 0.3, 3.5));
            const auto p = synth({beta}, {1.0}, 3.0 * beta, b0);
            const double r0 = uniform_range(gen, 0.2, 7.0);
            AllocationProblem<double> prob{p, Approach::approach_2, r0, {0}, 1.0};
            const auto ref = closed_form_two_user(p, r0);
            const auto res = brute_force_oracle(prob, 1e-7);
            CHECK(std::abs(res.total_energy - ref.total_energy) <=
                  1e-5 * std::max(ref.total_energy, 1e-9));
        }
    }
}

TEST_CASE("best_energy and dominance") {
    SUBCASE("hybrid is never worse than OMA") {
        auto gen = make_stream(900, 0);
        for (int rep = 0; rep < 20; ++rep) {
            const Eigen::Index m = 1 + static_cast<Eigen::Index>(gen() % 3);
            std::vector<double> ah, g;
            for (Eigen::Index i = 0; i < m; ++i) {
                ah.push_back(std::exp(uniform_range(gen, -1.0, 2.0)));
                g.push_back(std::exp(uniform_range(gen, -2.0, 1.0)));
            }
            const double a0 = std::exp(uniform_range(gen, -1.0, 1.0));
            const double b0 = std::exp(uniform_range(gen, 0.5, 4.0));
            const auto ep = synth(ah, g, a0, b0);
            const double r0 = uniform_range(gen, 0.2, 6.0);
            const auto approach = gen() % 2 == 0 ? Approach::approach_1 : Approach::approach_2;
            AllocationProblem<double> prob{ep, approach, r0, all_of(m), 1.0};
            const auto best = best_energy(prob);
            const auto oma = solve_oma_baseline(ep, r0);
            CHECK(best.total_energy <= oma.total_energy + 1e-9);
        }
    }
}

TEST_CASE("allocation monotonicity and limits on the deterministic scenario") {
    auto spec = build_deterministic_scenario();
    spec.beam_kind = BeamKind::zero_forcing;

    SUBCASE("optimal energy is non-decreasing in the target rate") {
        const auto inst = build_instance(spec);
        const auto sel = qualify_and_select(inst.params, 3, Approach::approach_2);
        double prev = -1.0;
        for (const double r0 : {2.0, 4.0, 6.0, 8.0, 10.0, 12.0}) {
            AllocationProblem<double> prob{inst.params, Approach::approach_2, r0, sel, 1.0};
            const double e = solve_approach2(prob).total_energy;
            CHECK(e >= prev * (1.0 - 1e-9));
            prev = e;
        }
    }

    SUBCASE("high-SNR gap shrinks as noise drops") {
        double prev_gap = std::numeric_limits<double>::infinity();
        for (const double noise_dbm : {-60.0, -70.0, -80.0, -90.0}) {
            spec.noise_w = dbm_to_watt(noise_dbm);
            const auto inst = build_instance(spec);
            const auto sel = qualify_and_select(inst.params, 3, Approach::approach_2);
            AllocationProblem<double> prob{inst.params, Approach::approach_2, 10.0, sel, 1.0};
            const double opt = solve_approach2(prob).total_energy;
            const double approx = high_snr_closed_form(inst.params, 10.0, sel).total_energy;
            const double gap = std::abs(approx - opt) / opt;
            CHECK(gap <= prev_gap * (1.0 + 1e-9));
            prev_gap = gap;
        }
    }

    SUBCASE("solver matches the oracle on the deterministic instance") {
        spec.noise_w = dbm_to_watt(-80.0);
        const auto inst = build_instance(spec);
        const auto sel = qualify_and_select(inst.params, 3, Approach::approach_2);
        AllocationProblem<double> prob{inst.params, Approach::approach_2, 10.0, sel, 1.0};
        const auto res = solve_approach2(prob);
        const auto ref = brute_force_oracle(prob, 1e-6);
        CHECK(std::abs(res.total_energy - ref.total_energy) <= 1e-3 * ref.total_energy);
        CHECK(res.total_energy == Approx(0.545462).epsilon(1e-4)); // ZF, -80 dBm, R0 = 10
    }

    SUBCASE("two-user channel-derived params keep beta below b0") {
        ScenarioSpec one = build_deterministic_scenario();
        one.placement = PlacementKind::random_halfring;
        one.legacy_count = 1;
        one.mx_list = {1};
        one.beam_kind = BeamKind::beamfocusing;
        for (int trial = 0; trial < 20; ++trial) {
            one.seed = 42;
            const auto inst = build_instance(one, trial);
            const auto& ep = inst.params;
            const double beta = std::min(ep.a(0) * ep.h_eff(0), ep.a0 * ep.g(0) * ep.g(0));
            CHECK(beta < ep.b0);
            const auto res = closed_form_two_user(ep, 8.0);
            if (res.mode == AllocationMode::hybrid)
                CHECK(res.powers.final_slot > 0.0);
        }
    }
}
