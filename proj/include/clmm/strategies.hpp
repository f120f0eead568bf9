// Strategy suite: candidate actions (GT, NE, BR, YDay, rNE, iNE, iBR), the
// overlap metric, and per-day evaluation against ground truth.
#pragma once

#include "clmm/pipeline.hpp"
#include "clmm/solver.hpp"

#include <optional>
#include <string>
#include <vector>

namespace clmm {

// Overlap between two actions of the same player: 1 minus the total-variation
// distance between their dollar layouts (unspent budget counted as its own
// bucket), so identical actions give 1 and disjoint full-budget actions 0.
double overlap(const GameSpec& spec, int n, const Eigen::ArrayXd& a,
               const Eigen::ArrayXd& b);

// Overlap for rows living on different grids: both are refined onto the
// union grid first (the tick-splitting rule keeps layouts exact).
double overlap_cross(double budget, double q0, double p_y0, const TickGrid& grid_a,
                     const Eigen::ArrayXd& a, const TickGrid& grid_b,
                     const Eigen::ArrayXd& b);

// Rebuckets a row from one grid onto another: positions are split at the
// target ticks; liquidity only counts where it covers a whole target range.
Eigen::ArrayXd map_row(const Eigen::ArrayXd& row, const TickGrid& from,
                       const TickGrid& to);

struct ActionEvaluation {
    double utility = 0;  // dollars, against the others' ground-truth rows
    double roi = 0;      // utility / budget
};
ActionEvaluation evaluate_action(const GameSpec& spec, const AtomicProfile& gt, int n,
                                 const Eigen::ArrayXd& action);

// Normalized optimality gap: (U(best response) - U(action)) / budget.
double nog(const GameSpec& spec, const AtomicProfile& gt, int n,
           const Eigen::ArrayXd& action);

// Yesterday's action carried over: rebucketed onto today's grid and scaled
// by the budget ratio.
Eigen::ArrayXd yday(const Eigen::ArrayXd& prev_row, const TickGrid& prev_grid,
                    double prev_budget, double new_budget, const TickGrid& today_grid);

// Single-range best response in an inert game (M = 1) against a fixed
// opponent weight.
double ibr(const GameSpec& single_range_spec, double gt_others_weight, int n);

enum class Strategy { gt, ne, nea, br, yday, rne, ine, ibr };

std::string strategy_name(Strategy s);
std::optional<Strategy> strategy_from_name(const std::string& name);

struct SuiteOptions {
    SolverOptions solver;
    std::vector<Strategy> strategies;  // empty = all
    double expansion_e = 2.0;          // inert-game hull expansion E
    double fluctuation_r = 1.1;        // reactive-game log-uniform ratio
    int history_days = 7;              // inert-game lookback
    std::string pool;
    int jobs = 1;
};

struct ReportRow {
    std::string pool;
    std::string date;
    std::string player;
    Strategy strategy = Strategy::gt;
    std::optional<double> overlap_gt;
    std::optional<double> utility;  // dollars
    std::optional<double> roi;
    std::optional<double> nog;
};

// Evaluates each requested strategy for every day and player. Cells that
// need missing history (yday/rne on day 1, ine/ibr with no prior days, yday
// for a player absent yesterday) are omitted.
std::vector<ReportRow> run_strategy_suite(const std::vector<DailyGame>& days,
                                          const SuiteOptions& opts);

}  // namespace clmm
