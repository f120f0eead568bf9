// Best responses, equilibrium solving, KKT certification, structure checks.
#include "doctest.h"

#include "clmm/errors.hpp"
#include "clmm/rng.hpp"
#include "clmm/solver.hpp"
#include "support.hpp"

#include <cmath>
#include <vector>

using namespace clmm;

namespace {

GameSpec one_range_spec(double alpha, double fee, double tau, Eigen::ArrayXd budgets,
                        double chi = 0.0) {
    const int n = static_cast<int>(budgets.size());
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("lp" + std::to_string(i));
    return GameSpec(TickGrid(std::vector<double>{1, 4}), alpha, 4.0, 1.0,
                    (Eigen::ArrayXd(1) << fee).finished(),
                    (Eigen::ArrayXd(1) << tau).finished(),
                    (Eigen::ArrayXd(1) << chi).finished(), std::move(ids),
                    std::move(budgets));
}

const SolverOptions kDefaults{};

}  // namespace

TEST_CASE("best response against unit opponent weight, hand values") {
    // One range, f = 1, eps = 1, nu_minus = 1, alpha = 1:
    // maximize k/(1+k) - tau k, so k* solves (1+k)^-2 = tau.
    const Eigen::ArrayXd nu1 = Eigen::ArrayXd::Ones(1);
    SUBCASE("ample budget, interior optimum") {
        const GameSpec spec = one_range_spec(1.0, 1.0, 0.25, Eigen::ArrayXd::Constant(1, 10.0));
        const BestResponse br = best_response_vs(spec, nu1, 10.0);
        CHECK(br.k(0) == doctest::Approx(1.0).epsilon(1e-9));
        CHECK(br.lambda == 0.0);
    }
    SUBCASE("IL too expensive, corner at zero") {
        const GameSpec spec = one_range_spec(1.0, 1.0, 2.0, Eigen::ArrayXd::Constant(1, 10.0));
        const BestResponse br = best_response_vs(spec, nu1, 10.0);
        CHECK(br.k(0) == 0.0);
    }
    SUBCASE("binding budget") {
        const GameSpec spec = one_range_spec(1.0, 1.0, 0.25, Eigen::ArrayXd::Constant(1, 0.1));
        const BestResponse br = best_response_vs(spec, nu1, 0.1);
        CHECK(br.k(0) == doctest::Approx(0.1).epsilon(1e-9));
        // Stationarity at the cap: (1+k)^-2 - tau = lambda eps.
        CHECK(br.lambda == doctest::Approx(1.0 / 1.21 - 0.25).epsilon(1e-7));
    }
    SUBCASE("zero fee spends nothing") {
        const GameSpec spec = one_range_spec(1.0, 0.0, 0.25, Eigen::ArrayXd::Constant(1, 1.0));
        const BestResponse br = best_response_vs(spec, nu1, 1.0);
        CHECK(br.k(0) == 0.0);
        CHECK(br.lambda == 0.0);
    }
}

TEST_CASE("best responses never exceed the budget and beat random rows") {
    Rng rng(41);
    for (int trial = 0; trial < 40; ++trial) {
        const int n_players = 2 + static_cast<int>(rng.below(3));
        const int m_count = 1 + static_cast<int>(rng.below(4));
        const GameSpec spec = testutil::random_spec(rng, n_players, m_count,
                                                    trial % 2 ? 1.0 : 0.5, trial % 3 != 0);
        AtomicProfile profile(n_players, m_count);
        for (int n = 0; n < n_players; ++n)
            profile.k.row(n) = testutil::random_action(rng, spec, n).transpose();

        const Eigen::ArrayXd br = best_response(spec, profile, 0);
        CHECK(budget_used(spec, br) <= spec.budgets()(0) * (1 + 1e-9));

        AtomicProfile with_br = profile;
        with_br.k.row(0) = br.transpose();
        const double u_br = atomic_utility(spec, with_br, 0);
        for (int alt = 0; alt < 25; ++alt) {
            AtomicProfile other = profile;
            other.k.row(0) = testutil::random_action(rng, spec, 0).transpose();
            CHECK(u_br >= atomic_utility(spec, other, 0) - 1e-9);
        }
    }
}

TEST_CASE("open supremum raises NoMaximizerError") {
    for (double alpha : {1.0, 0.5}) {
        const GameSpec solo = one_range_spec(alpha, 1.0, 0.25, Eigen::ArrayXd::Constant(1, 1.0));
        CHECK_THROWS_AS(best_response_vs(solo, Eigen::ArrayXd::Zero(1), 1.0),
                        NoMaximizerError);
        CHECK_THROWS_AS(solve_ne(solo), NoMaximizerError);

        // Non-player weight restores a maximizer for the solo provider.
        const GameSpec cushioned =
            one_range_spec(alpha, 1.0, 0.25, Eigen::ArrayXd::Constant(1, 1.0), 0.5);
        CHECK_NOTHROW(best_response_vs(cushioned, cushioned.chis(), 1.0));
        const EquilibriumResult res = solve_ne(cushioned);
        CHECK(res.converged);
    }
}

TEST_CASE("solver input validation") {
    const GameSpec spec = one_range_spec(1.0, 1.0, 0.25, Eigen::ArrayXd::Constant(2, 1.0));
    CHECK_THROWS_AS(best_response_vs(spec, Eigen::ArrayXd::Ones(3), 1.0),
                    std::invalid_argument);
    CHECK_THROWS_AS(best_response_vs(spec, Eigen::ArrayXd::Ones(1), 0.0),
                    std::invalid_argument);
    SolverOptions bad;
    bad.omega = 0.0;
    CHECK_THROWS_AS(solve_ne(spec, bad), std::invalid_argument);
    bad.omega = 0.5;
    bad.max_iters = 0;
    CHECK_THROWS_AS(solve_ne(spec, bad), std::invalid_argument);
    const GameSpec invalid = one_range_spec(1.0, -1.0, 0.25, Eigen::ArrayXd::Constant(2, 1.0));
    CHECK_THROWS_AS(solve_ne(invalid), InputError);
}

TEST_CASE("two-player one-range equilibrium, hand values") {
    // f = 1, tau = 1/4, eps = 1. Unconstrained symmetric row is k = 1.
    SUBCASE("ample budgets") {
        const GameSpec spec = one_range_spec(1.0, 1.0, 0.25, Eigen::ArrayXd::Constant(2, 10.0));
        const EquilibriumResult res = solve_ne(spec);
        REQUIRE(res.converged);
        CHECK(res.profile.k(0, 0) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(res.profile.k(1, 0) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(atomic_utility(spec, res.profile, 0) == doctest::Approx(0.25).epsilon(1e-8));
        CHECK(res.kkt.max_residual() <= kDefaults.tol_kkt);
    }
    SUBCASE("one budget binds") {
        // Player 0 capped at 0.5; player 1 best-responds with
        // k1 = sqrt(k0 / tau) - k0 = sqrt(2) - 1/2.
        const GameSpec spec = one_range_spec(
            1.0, 1.0, 0.25, (Eigen::ArrayXd(2) << 0.5, 10.0).finished());
        const EquilibriumResult res = solve_ne(spec);
        REQUIRE(res.converged);
        CHECK(res.profile.k(0, 0) == doctest::Approx(0.5).epsilon(1e-6));
        CHECK(res.profile.k(1, 0) == doctest::Approx(std::sqrt(2.0) - 0.5).epsilon(1e-6));
        // Budget dual of the capped player: f nu_-0 / (nu)^2 - tau, nu = sqrt(2).
        CHECK(res.kkt.lambda(0) ==
              doctest::Approx((std::sqrt(2.0) - 0.5) / 2.0 - 0.25).epsilon(1e-5));
        CHECK(res.kkt.lambda(1) == 0.0);
        CHECK(res.kkt.max_residual() <= kDefaults.tol_kkt);
    }
}

TEST_CASE("equilibrium is independent of the initialization seed") {
    Rng rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const GameSpec spec = testutil::random_spec(rng, 3, 3, trial % 2 ? 1.0 : 0.5,
                                                    trial % 2 == 0);
        SolverOptions opts;
        opts.seed = 1;
        const EquilibriumResult a = solve_ne(spec, opts);
        opts.seed = 99991;
        const EquilibriumResult b = solve_ne(spec, opts);
        REQUIRE(a.converged);
        REQUIRE(b.converged);
        CHECK((a.profile.k - b.profile.k).abs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("KKT residuals certify equilibria and reject perturbations") {
    Rng rng(47);
    const GameSpec spec = testutil::random_spec(rng, 3, 3, 1.0, false);
    const EquilibriumResult res = solve_ne(spec);
    REQUIRE(res.converged);
    CHECK(res.kkt.max_residual() <= 1e-8);
    CHECK(res.kkt.feasibility <= 1e-12);

    AtomicProfile bent = res.profile;
    bent.k(0, 0) += 0.1;
    const KktReport report = kkt_residuals(spec, bent);
    CHECK(report.max_residual() > 1e-3);
}

TEST_CASE("all-zero fees converge to the zero profile") {
    GameSpec spec(TickGrid(std::vector<double>{1, 2, 4}), 1.0, 2.0, 1.0,
                  Eigen::ArrayXd::Zero(2), Eigen::ArrayXd::Constant(2, 0.3),
                  Eigen::ArrayXd::Zero(2), {"a", "b"}, Eigen::ArrayXd::Constant(2, 1.0));
    const EquilibriumResult res = solve_ne(spec);
    REQUIRE(res.converged);
    CHECK(res.profile.k.maxCoeff() == 0.0);
    CHECK(res.kkt.max_residual() <= 1e-8);
}

TEST_CASE("closed form matches the ample-budget formula") {
    Rng rng(53);
    for (int trial = 0; trial < 20; ++trial) {
        const int n_players = 2 + static_cast<int>(rng.below(5));
        const int m_count = 1 + static_cast<int>(rng.below(6));
        const double alpha = trial % 2 ? 1.0 : 0.5;
        const GameSpec spec = testutil::equal_budget_spec(rng, n_players, m_count, alpha, 1e6);
        const ClosedFormResult cf = closed_form_constant_budget(spec);
        CHECK_FALSE(cf.budget_limited);
        CHECK(cf.mu == 0.0);
        const double n = n_players;
        for (int m = 0; m < m_count; ++m) {
            const double expect = alpha * (n - 1) * spec.fees()(m) / (n * n * spec.taus()(m));
            for (int p = 0; p < n_players; ++p)
                CHECK(cf.profile.k(p, m) == doctest::Approx(expect).epsilon(1e-12));
        }
    }
}

TEST_CASE("closed form with a binding budget matches the solver") {
    Rng rng(59);
    for (int trial = 0; trial < 10; ++trial) {
        const int n_players = 2 + static_cast<int>(rng.below(3));
        const int m_count = 1 + static_cast<int>(rng.below(4));
        const double alpha = trial % 2 ? 1.0 : 0.5;
        // Tiny common budget so the constraint surely binds.
        const GameSpec spec = testutil::equal_budget_spec(rng, n_players, m_count, alpha, 0.01);
        const ClosedFormResult cf = closed_form_constant_budget(spec);
        CHECK(cf.budget_limited);
        CHECK(cf.mu > 0.0);
        CHECK(budget_used(spec, cf.profile.row(0)) == doctest::Approx(0.01).epsilon(1e-9));

        const EquilibriumResult res = solve_ne(spec);
        REQUIRE(res.converged);
        CHECK((res.profile.k - cf.profile.k).abs().maxCoeff() < 1e-6);
    }
}

TEST_CASE("closed form rejects unequal budgets, nonzero chi; N = 1 degenerates") {
    Rng rng(61);
    const GameSpec base = testutil::random_spec(rng, 2, 2, 1.0, true);
    CHECK_THROWS_AS(
        closed_form_constant_budget(testutil::with_budgets(base, (Eigen::ArrayXd(2) << 1, 2).finished())),
        InputError);
    const GameSpec chi_spec = one_range_spec(1.0, 1.0, 0.25, Eigen::ArrayXd::Constant(2, 1.0), 0.7);
    CHECK_THROWS_AS(closed_form_constant_budget(chi_spec), InputError);

    const GameSpec solo = one_range_spec(1.0, 1.0, 0.25, Eigen::ArrayXd::Constant(1, 1.0));
    const ClosedFormResult cf = closed_form_constant_budget(solo);
    CHECK(cf.degenerate);
    CHECK(cf.profile.k.maxCoeff() == 0.0);
}

TEST_CASE("waterfill structure holds at equilibrium and fails off it") {
    const GameSpec spec = one_range_spec(
        1.0, 1.0, 0.25, (Eigen::ArrayXd(2) << 0.5, 10.0).finished());
    const EquilibriumResult res = solve_ne(spec);
    REQUIRE(res.converged);
    const WaterfillReport wf = waterfill_check(spec, res.profile);
    CHECK(wf.pass);
    REQUIRE(wf.slack_players == std::vector<int>{1});
    // Common dollar level is player 1's spend; player 0 sits at its budget.
    CHECK(wf.h == doctest::Approx(std::sqrt(2.0) - 0.5).epsilon(1e-6));
    CHECK(wf.h_m(0) == doctest::Approx(std::sqrt(2.0) - 0.5).epsilon(1e-6));

    AtomicProfile bent = res.profile;
    bent.k(0, 0) = 0.9;  // above the common row but below budget? no: above both
    bent.k(1, 0) = 0.2;
    CHECK_FALSE(waterfill_check(spec, bent).pass);
}

TEST_CASE("structure checks pass on random converged equilibria") {
    Rng rng(67);
    for (int trial = 0; trial < 15; ++trial) {
        const int n_players = 2 + static_cast<int>(rng.below(4));
        const int m_count = 1 + static_cast<int>(rng.below(4));
        const double alpha = trial % 2 ? 1.0 : 0.5;
        const GameSpec spec = testutil::random_spec(rng, n_players, m_count, alpha, true);
        const EquilibriumResult res = solve_ne(spec);
        REQUIRE(res.converged);
        const StructureReport rep = structure_checks(spec, res.profile);
        CHECK(rep.waterfill);
        CHECK(rep.dominance);
        CHECK(rep.positivity);
        CHECK(rep.constant_utility);
        if (alpha < 1) CHECK(rep.positivity_checked);
    }
}

TEST_CASE("alpha < 1 equilibria deposit on every range with fees") {
    Rng rng(71);
    for (int trial = 0; trial < 10; ++trial) {
        const GameSpec spec = testutil::random_spec(rng, 2 + static_cast<int>(rng.below(3)),
                                                    3, 0.5, true);
        const EquilibriumResult res = solve_ne(spec);
        REQUIRE(res.converged);
        CHECK(res.profile.k.minCoeff() > 0.0);
    }
}

TEST_CASE("constant utility value at an unconstrained symmetric equilibrium") {
    Rng rng(73);
    for (int trial = 0; trial < 10; ++trial) {
        const int n_players = 2 + static_cast<int>(rng.below(5));
        const double alpha = trial % 2 ? 1.0 : 0.5;
        const GameSpec spec = testutil::equal_budget_spec(rng, n_players, 3, alpha, 1e7);
        const EquilibriumResult res = solve_ne(spec);
        REQUIRE(res.converged);
        const double n = n_players;
        const double expect = ((1 - alpha) * n + alpha) / (n * n) * spec.fees().sum();
        for (int p = 0; p < n_players; ++p)
            CHECK(atomic_utility(spec, res.profile, p) ==
                  doctest::Approx(expect).epsilon(1e-8));
    }
}

TEST_CASE("lift_to_original reproduces the atomic profile exactly") {
    Rng rng(79);
    const GameSpec spec = testutil::random_spec(rng, 3, 4, 1.0, true);
    const EquilibriumResult res = solve_ne(spec);
    REQUIRE(res.converged);
    const std::vector<GeneralAllocation> lifted = lift_to_original(res.profile);
    REQUIRE(static_cast<int>(lifted.size()) == 3);
    for (int n = 0; n < 3; ++n) {
        const Eigen::ArrayXd back = theta(lifted[n], spec.num_ranges());
        for (int m = 0; m < 4; ++m) CHECK(back(m) == res.profile.k(n, m));  // bitwise
    }
}
