// Game spec, utilities, and the atomic/general correspondence.
#include "clmm/game.hpp"

#include "clmm/amm.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace clmm {
namespace {

// k^alpha with the alpha = 1 fast path (pow dominates solver profiles).
inline double weight_pow(double k, double alpha) {
    return alpha == 1.0 ? k : std::pow(k, alpha);
}

}  // namespace

GameSpec::GameSpec(TickGrid grid, double alpha, double q0, double p_y0,
                   Eigen::ArrayXd fees, Eigen::ArrayXd taus, Eigen::ArrayXd chis,
                   std::vector<std::string> player_ids, Eigen::ArrayXd budgets)
    : grid_(std::move(grid)),
      alpha_(alpha),
      q0_(q0),
      p_y0_(p_y0),
      fees_(std::move(fees)),
      taus_(std::move(taus)),
      chis_(std::move(chis)),
      budgets_(std::move(budgets)),
      player_ids_(std::move(player_ids)) {
    const Eigen::Index m = grid_.num_ranges();
    if (fees_.size() != m || taus_.size() != m || chis_.size() != m) {
        std::ostringstream os;
        os << "per-range arrays must have " << m << " entries (got fees " << fees_.size()
           << ", taus " << taus_.size() << ", chis " << chis_.size() << ")";
        throw std::invalid_argument(os.str());
    }
    if (budgets_.size() != static_cast<Eigen::Index>(player_ids_.size()))
        throw std::invalid_argument("one budget per player id required");
    eps_.resize(m);
    for (Eigen::Index r = 0; r < m; ++r) {
        eps_(r) = liquidity_price(grid_.lower(static_cast<int>(r)),
                                  grid_.upper(static_cast<int>(r)), q0_, p_y0_);
    }
}

std::vector<std::string> validate_spec(const GameSpec& spec) {
    std::vector<std::string> problems;
    auto bad = [&](const std::string& msg) { problems.push_back(msg); };

    if (!(spec.alpha() > 0) || spec.alpha() > 1 || !std::isfinite(spec.alpha()))
        bad("alpha out of range (0, 1]");
    if (!std::isfinite(spec.q0()) || spec.q0() <= 0) bad("q0 must be positive");
    if (!std::isfinite(spec.p_y0()) || spec.p_y0() <= 0) bad("p_y0 must be positive");
    for (int m = 0; m < spec.num_ranges(); ++m) {
        if (!std::isfinite(spec.fees()(m)) || spec.fees()(m) < 0)
            bad("fee " + std::to_string(m) + " must be non-negative");
        if (!std::isfinite(spec.taus()(m)) || spec.taus()(m) < 0)
            bad("tau " + std::to_string(m) + " must be non-negative");
        if (!std::isfinite(spec.chis()(m)) || spec.chis()(m) < 0)
            bad("chi " + std::to_string(m) + " must be non-negative");
    }
    if (spec.num_players() == 0) bad("at least one player required");
    for (int n = 0; n < spec.num_players(); ++n) {
        if (!std::isfinite(spec.budgets()(n)) || spec.budgets()(n) <= 0)
            bad("budget of player " + std::to_string(n) + " must be positive");
        if (spec.player_ids()[n].empty())
            bad("player " + std::to_string(n) + " has an empty id");
    }
    return problems;
}

void GeneralAllocation::add(int lo, int hi, double liquidity) {
    if (lo < 0 || hi <= lo) throw std::invalid_argument("range needs tick indices lo < hi");
    if (!std::isfinite(liquidity) || liquidity < 0)
        throw std::invalid_argument("liquidity must be non-negative");
    if (liquidity == 0) return;
    entries_[{lo, hi}] += liquidity;
}

double GeneralAllocation::get(int lo, int hi) const {
    auto it = entries_.find({lo, hi});
    return it == entries_.end() ? 0.0 : it->second;
}

Eigen::ArrayXd theta(const GeneralAllocation& alloc, int num_ranges) {
    Eigen::ArrayXd k = Eigen::ArrayXd::Zero(num_ranges);
    for (const auto& [range, liq] : alloc.entries()) {
        const auto [lo, hi] = range;
        if (hi > num_ranges)
            throw std::invalid_argument("allocation range exceeds the grid");
        for (int m = lo; m < hi; ++m) k(m) += liq;
    }
    return k;
}

GeneralAllocation xi(const Eigen::ArrayXd& k) {
    GeneralAllocation alloc;
    for (Eigen::Index m = 0; m < k.size(); ++m) {
        if (k(m) < 0) throw std::invalid_argument("liquidity must be non-negative");
        alloc.add(static_cast<int>(m), static_cast<int>(m) + 1, k(m));
    }
    return alloc;
}

double budget_used(const GameSpec& spec, const Eigen::ArrayXd& k) {
    if (k.size() != spec.num_ranges())
        throw std::invalid_argument("row size does not match the grid");
    return (k * spec.eps()).sum();
}

double budget_used(const GameSpec& spec, const GeneralAllocation& alloc) {
    double total = 0;
    for (const auto& [range, liq] : alloc.entries()) {
        const auto [lo, hi] = range;
        if (hi > spec.num_ranges())
            throw std::invalid_argument("allocation range exceeds the grid");
        total += liq * liquidity_price(spec.grid().tick(lo), spec.grid().tick(hi),
                                       spec.q0(), spec.p_y0());
    }
    return total;
}

Eigen::ArrayXd nu_totals(const GameSpec& spec, const AtomicProfile& profile) {
    if (profile.num_players() != spec.num_players() ||
        profile.num_ranges() != spec.num_ranges())
        throw std::invalid_argument("profile shape does not match the spec");
    Eigen::ArrayXd nu = spec.chis();
    for (int n = 0; n < profile.num_players(); ++n)
        for (int m = 0; m < profile.num_ranges(); ++m)
            nu(m) += weight_pow(profile.k(n, m), spec.alpha());
    return nu;
}

double fee_share(const GameSpec& spec, const AtomicProfile& profile, int n, int m) {
    const double k = profile.k(n, m);
    if (k == 0) return 0;
    const Eigen::ArrayXd nu = nu_totals(spec, profile);
    return weight_pow(k, spec.alpha()) / nu(m);
}

double atomic_utility(const GameSpec& spec, const AtomicProfile& profile, int n) {
    const Eigen::ArrayXd nu = nu_totals(spec, profile);
    double u = 0;
    for (int m = 0; m < spec.num_ranges(); ++m) {
        const double k = profile.k(n, m);
        if (k > 0) u += spec.fees()(m) * weight_pow(k, spec.alpha()) / nu(m);
        u -= spec.taus()(m) * k;
    }
    return u;
}

std::map<std::pair<int, int>, double> general_taus_from_atomic(const GameSpec& spec) {
    std::map<std::pair<int, int>, double> taus;
    for (int lo = 0; lo < spec.num_ranges(); ++lo) {
        double acc = 0;
        for (int hi = lo + 1; hi <= spec.num_ranges(); ++hi) {
            acc += spec.taus()(hi - 1);
            taus[{lo, hi}] = acc;
        }
    }
    return taus;
}

double original_utility(const GameSpec& spec,
                        const std::vector<GeneralAllocation>& allocs,
                        const std::map<std::pair<int, int>, double>& taus_general,
                        int n) {
    if (static_cast<int>(allocs.size()) != spec.num_players())
        throw std::invalid_argument("one allocation per player required");
    if (n < 0 || n >= spec.num_players()) throw std::invalid_argument("bad player index");

    AtomicProfile profile(spec.num_players(), spec.num_ranges());
    for (int i = 0; i < spec.num_players(); ++i)
        profile.k.row(i) = theta(allocs[i], spec.num_ranges()).transpose();

    const Eigen::ArrayXd nu = nu_totals(spec, profile);
    double u = 0;
    for (int m = 0; m < spec.num_ranges(); ++m) {
        const double k = profile.k(n, m);
        if (k > 0) u += spec.fees()(m) * weight_pow(k, spec.alpha()) / nu(m);
    }
    for (const auto& [range, liq] : allocs[n].entries()) {
        auto it = taus_general.find(range);
        if (it == taus_general.end()) {
            std::ostringstream os;
            os << "missing IL rate for range (" << range.first << ", " << range.second << ")";
            throw std::invalid_argument(os.str());
        }
        u -= it->second * liq;
    }
    return u;
}

}  // namespace clmm
