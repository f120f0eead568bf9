// The liquidity-provision game: spec, action profiles, utilities, and the
// liquidity-preserving map between general allocations and atomic profiles.
#pragma once

#include "clmm/types.hpp"

#include <map>
#include <string>
#include <utility>
#include <vector>

namespace clmm {

// Immutable description of one day's game: grid, prices, per-range fee pots
// f_m, IL rates tau_m, non-player weights chi_m, and player budgets (dollars).
// Safe for concurrent reads once constructed.
class GameSpec {
public:
    GameSpec(TickGrid grid, double alpha, double q0, double p_y0,
             Eigen::ArrayXd fees, Eigen::ArrayXd taus, Eigen::ArrayXd chis,
             std::vector<std::string> player_ids, Eigen::ArrayXd budgets);

    int num_players() const { return static_cast<int>(budgets_.size()); }
    int num_ranges() const { return grid_.num_ranges(); }
    const TickGrid& grid() const { return grid_; }
    double alpha() const { return alpha_; }
    double q0() const { return q0_; }
    double p_y0() const { return p_y0_; }
    const Eigen::ArrayXd& fees() const { return fees_; }
    const Eigen::ArrayXd& taus() const { return taus_; }
    const Eigen::ArrayXd& chis() const { return chis_; }
    const Eigen::ArrayXd& budgets() const { return budgets_; }
    const std::vector<std::string>& player_ids() const { return player_ids_; }

    // Cached liquidity price eps_m = eps_{t_m, t_{m+1}}(q0) at p_y0.
    const Eigen::ArrayXd& eps() const { return eps_; }

private:
    TickGrid grid_;
    double alpha_;
    double q0_;
    double p_y0_;
    Eigen::ArrayXd fees_, taus_, chis_, budgets_, eps_;
    std::vector<std::string> player_ids_;
};

// Domain violations ("alpha out of range", negative fees, ...); empty if ok.
std::vector<std::string> validate_spec(const GameSpec& spec);

// Atomic action profile: k(n, m) = liquidity of player n on atomic range m.
struct AtomicProfile {
    AtomicProfile() = default;
    AtomicProfile(int n, int m) : k(Eigen::ArrayXXd::Zero(n, m)) {}
    explicit AtomicProfile(Eigen::ArrayXXd values) : k(std::move(values)) {}

    Eigen::ArrayXXd k;

    int num_players() const { return static_cast<int>(k.rows()); }
    int num_ranges() const { return static_cast<int>(k.cols()); }
    Eigen::ArrayXd row(int n) const { return k.row(n).transpose(); }
};

// One player's position book on general (multi-range) intervals, keyed by
// tick index pair (lo, hi), lo < hi.
class GeneralAllocation {
public:
    void add(int lo, int hi, double liquidity);
    double get(int lo, int hi) const;
    const std::map<std::pair<int, int>, double>& entries() const { return entries_; }

private:
    std::map<std::pair<int, int>, double> entries_;
};

// Projection Theta: atomic row k_m = sum of liquidity over general ranges
// covering range m. Liquidity-preserving together with xi.
Eigen::ArrayXd theta(const GeneralAllocation& alloc, int num_ranges);

// Diagonal embedding xi: one single-range position per atomic range, so
// theta(xi(k)) = k exactly.
GeneralAllocation xi(const Eigen::ArrayXd& k);

// Dollar cost of an action at the spec's day-start prices.
double budget_used(const GameSpec& spec, const Eigen::ArrayXd& k);
double budget_used(const GameSpec& spec, const GeneralAllocation& alloc);

// Weight totals nu_m = chi_m + sum_n k(n,m)^alpha.
Eigen::ArrayXd nu_totals(const GameSpec& spec, const AtomicProfile& profile);

// Fee share of player n on range m: k^alpha / nu_m, and 0 when k = 0.
double fee_share(const GameSpec& spec, const AtomicProfile& profile, int n, int m);

// Atomic-game utility of player n: sum_m f_m share(n,m) - tau_m k(n,m).
double atomic_utility(const GameSpec& spec, const AtomicProfile& profile, int n);

// Expected IL rate per general range (lo, hi), consistent with the spec's
// atomic rates by additivity: taubar_{lo,hi} = sum of tau_m over covered m.
std::map<std::pair<int, int>, double> general_taus_from_atomic(const GameSpec& spec);

// Original-game utility of player n: fee shares act on theta(allocs), IL is
// charged per general range at taus_general.
double original_utility(const GameSpec& spec,
                        const std::vector<GeneralAllocation>& allocs,
                        const std::map<std::pair<int, int>, double>& taus_general,
                        int n);

}  // namespace clmm
