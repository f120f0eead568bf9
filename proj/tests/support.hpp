// Seeded random specs and profiles shared by the test binaries.
#pragma once

#include "clmm/game.hpp"
#include "clmm/rng.hpp"

#include <cmath>
#include <string>
#include <utility>
#include <vector>

namespace testutil {

inline clmm::TickGrid random_grid(clmm::Rng& rng, int m_count) {
    std::vector<double> ticks(m_count + 1);
    ticks[0] = std::exp(rng.uniform(-1.0, 1.0));
    for (int i = 1; i <= m_count; ++i)
        ticks[i] = ticks[i - 1] * std::exp(rng.uniform(0.3, 1.0));
    return clmm::TickGrid(ticks);
}

// Random well-posed spec; taus are bounded away from 0 so best responses
// stay finite even without a binding budget.
inline clmm::GameSpec random_spec(clmm::Rng& rng, int n_players, int m_count,
                                  double alpha, bool zero_chi, double budget_lo = 0.5,
                                  double budget_hi = 5.0) {
    clmm::TickGrid grid = random_grid(rng, m_count);
    const double q0 =
        std::exp(rng.uniform(std::log(grid.min_tick()), std::log(grid.max_tick())));
    const double p_y0 = rng.uniform(0.5, 2.0);
    Eigen::ArrayXd fees(m_count), taus(m_count), chis(m_count);
    for (int m = 0; m < m_count; ++m) {
        fees(m) = rng.uniform(0.5, 5.0);
        taus(m) = rng.uniform(0.05, 1.0);
        chis(m) = zero_chi ? 0.0 : rng.uniform(0.1, 2.0);
    }
    std::vector<std::string> ids;
    Eigen::ArrayXd budgets(n_players);
    for (int n = 0; n < n_players; ++n) {
        ids.push_back("lp" + std::to_string(n));
        budgets(n) = rng.uniform(budget_lo, budget_hi);
    }
    return clmm::GameSpec(std::move(grid), alpha, q0, p_y0, fees, taus, chis,
                          std::move(ids), budgets);
}

inline clmm::GameSpec with_budgets(const clmm::GameSpec& spec, Eigen::ArrayXd budgets) {
    return clmm::GameSpec(spec.grid(), spec.alpha(), spec.q0(), spec.p_y0(),
                          spec.fees(), spec.taus(), spec.chis(), spec.player_ids(),
                          std::move(budgets));
}

inline clmm::GameSpec equal_budget_spec(clmm::Rng& rng, int n_players, int m_count,
                                        double alpha, double b0) {
    clmm::GameSpec spec = random_spec(rng, n_players, m_count, alpha, true);
    return with_budgets(spec, Eigen::ArrayXd::Constant(n_players, b0));
}

// Uniformly random feasible row for player n (spends a random fraction).
inline Eigen::ArrayXd random_action(clmm::Rng& rng, const clmm::GameSpec& spec, int n) {
    Eigen::ArrayXd weights(spec.num_ranges());
    for (int m = 0; m < spec.num_ranges(); ++m) weights(m) = rng.uniform();
    const double spend = spec.budgets()(n) * rng.uniform();
    const double total = (weights * spec.eps()).sum();
    return total > 0 ? Eigen::ArrayXd(weights * (spend / total)) : weights * 0.0;
}

}  // namespace testutil
