// Nash-equilibrium machinery: exact best responses, damped simultaneous
// best-response iteration, KKT certification, closed forms and structure
// checks for equilibrium profiles.
#pragma once

#include "clmm/game.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace clmm {

struct SolverOptions {
    double omega = 0.5;          // relaxation weight on the best-response step
    int max_iters = 10000;
    double tol_profile = 1e-10;  // sup-norm step size at convergence
    double tol_kkt = 1e-8;       // residual bound for certification
    std::uint64_t seed = 0;      // initial profile randomization
};

// Best response of player n to fixed opponent weights nu_minus (chi included):
// maximizes sum_m f_m k^alpha/(nu_minus_m + k^alpha) - tau_m k subject to
// k >= 0, sum_m eps_m k_m <= budget. Exact up to numerical tolerance via
// bisection on the budget dual lambda and per-range stationarity solves.
struct BestResponse {
    Eigen::ArrayXd k;
    double lambda = 0;  // budget dual; 0 when the budget does not bind
};
BestResponse best_response_vs(const GameSpec& spec, const Eigen::ArrayXd& nu_minus,
                              double budget);
Eigen::ArrayXd best_response(const GameSpec& spec, const AtomicProfile& profile, int n);

// KKT residuals of a profile, with duals recovered by least violation:
// lambda_n from the active ranges (forced to 0 when the budget has slack),
// mu_{n,m} from the zero ranges, clipped non-negative.
struct KktReport {
    Eigen::ArrayXd lambda;
    Eigen::ArrayXXd mu;
    double stationarity = 0;
    double comp_slack = 0;
    double feasibility = 0;
    double max_residual() const;
};
KktReport kkt_residuals(const GameSpec& spec, const AtomicProfile& profile);

struct EquilibriumResult {
    AtomicProfile profile;
    KktReport kkt;
    int iterations = 0;
    bool converged = false;
};

// Damped simultaneous best-response iteration
//   K[t+1] = (1 - omega) K[t] + omega BR(K[t]),
// stopped at sup-norm step < tol_profile, then KKT-certified. The fixed
// point is the game's unique equilibrium, so the result is independent of
// the seeded initialization up to tolerance.
EquilibriumResult solve_ne(const GameSpec& spec, const SolverOptions& opts = {});

// Symmetric equilibrium for equal budgets B0 and chi = 0:
//   k_m = alpha (N-1) f_m / (N^2 (tau_m + mu eps_m)),
// mu = 0 if the common budget covers the unconstrained row, otherwise the
// unique root of sum_m eps_m k_m(mu) = B0.
struct ClosedFormResult {
    AtomicProfile profile;
    double mu = 0;
    bool budget_limited = false;
    bool degenerate = false;  // N = 1: zero profile
};
ClosedFormResult closed_form_constant_budget(const GameSpec& spec);

// Waterfill structure of an equilibrium: players with budget slack share a
// common row h_m, everyone else is entrywise below it, and dollar spends are
// A_n = min(h, B_n) for the common level h.
struct WaterfillReport {
    bool pass = false;
    double h = 0;             // shared dollar spend of slack players
    Eigen::ArrayXd h_m;       // shared row (empty if no slack player)
    std::vector<int> slack_players;
    double worst_violation = 0;
    std::string detail;
};
WaterfillReport waterfill_check(const GameSpec& spec, const AtomicProfile& profile,
                                double tol = 1e-7);

// Equilibrium structure properties: budget dominance (bigger budget, bigger
// row; equal budgets, equal rows), strict positivity for alpha < 1 on ranges
// with fees (chi = 0 only), and the constant-utility value
// ((1-alpha) N + alpha)/N^2 sum_m f_m when no budget binds (chi = 0 only).
struct StructureReport {
    bool waterfill = false;
    bool dominance = false;
    bool positivity = true;
    bool positivity_checked = false;
    bool constant_utility = true;
    bool constant_utility_checked = false;
    double worst_violation = 0;
    bool pass() const {
        return waterfill && dominance && positivity && constant_utility;
    }
};
StructureReport structure_checks(const GameSpec& spec, const AtomicProfile& profile,
                                 double tol = 1e-7);

// Equilibrium of the original game induced by the atomic one: xi per row.
std::vector<GeneralAllocation> lift_to_original(const AtomicProfile& profile);

}  // namespace clmm
