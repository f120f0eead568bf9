// Strategy actions and their per-day evaluation against ground truth.
#include "clmm/strategies.hpp"

#include "clmm/amm.hpp"
#include "clmm/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace clmm {
namespace {

const std::vector<Strategy> kCanonical{Strategy::gt,   Strategy::ne,  Strategy::nea,
                                       Strategy::br,   Strategy::yday, Strategy::rne,
                                       Strategy::ine,  Strategy::ibr};

// Validates an action row and returns its dollar cost.
double checked_spend(const GameSpec& spec, int n, const Eigen::ArrayXd& row) {
    if (row.size() != spec.num_ranges())
        throw std::invalid_argument("action size does not match the grid");
    if (!row.isFinite().all() || (row < -1e-9).any())
        throw InputError("action has negative or non-finite entries");
    const double spend = (spec.eps() * row.max(0.0)).sum();
    const double budget = spec.budgets()(n);
    if (spend > budget * (1 + 1e-9) + 1e-12) {
        std::ostringstream os;
        os << "action of player " << n << " costs " << spend << ", budget is " << budget;
        throw InputError(os.str());
    }
    return spend;
}

void check_player(const GameSpec& spec, int n) {
    if (n < 0 || n >= spec.num_players())
        throw std::invalid_argument("player index out of range");
}

}  // namespace

double overlap(const GameSpec& spec, int n, const Eigen::ArrayXd& a,
               const Eigen::ArrayXd& b) {
    check_player(spec, n);
    const double budget = spec.budgets()(n);
    const double spend_a = checked_spend(spec, n, a);
    const double spend_b = checked_spend(spec, n, b);
    const double tv =
        ((spec.eps() * (a - b)).abs().sum() + std::abs(spend_a - spend_b)) /
        (2 * budget);
    return std::clamp(1.0 - tv, 0.0, 1.0);
}

double overlap_cross(double budget, double q0, double p_y0, const TickGrid& grid_a,
                     const Eigen::ArrayXd& a, const TickGrid& grid_b,
                     const Eigen::ArrayXd& b) {
    if (!std::isfinite(budget) || budget <= 0)
        throw std::invalid_argument("budget must be positive");
    std::vector<double> ticks(grid_a.ticks().data(),
                              grid_a.ticks().data() + grid_a.num_ticks());
    ticks.insert(ticks.end(), grid_b.ticks().data(),
                 grid_b.ticks().data() + grid_b.num_ticks());
    std::sort(ticks.begin(), ticks.end());
    ticks.erase(std::unique(ticks.begin(), ticks.end()), ticks.end());
    const TickGrid u(ticks);

    const Eigen::ArrayXd ua = map_row(a, grid_a, u);
    const Eigen::ArrayXd ub = map_row(b, grid_b, u);
    Eigen::ArrayXd eps(u.num_ranges());
    for (int m = 0; m < u.num_ranges(); ++m)
        eps(m) = liquidity_price(u.lower(m), u.upper(m), q0, p_y0);
    const double spend_a = (eps * ua).sum();
    const double spend_b = (eps * ub).sum();
    const double tv =
        ((eps * (ua - ub)).abs().sum() + std::abs(spend_a - spend_b)) / (2 * budget);
    return std::clamp(1.0 - tv, 0.0, 1.0);
}

Eigen::ArrayXd map_row(const Eigen::ArrayXd& row, const TickGrid& from,
                       const TickGrid& to) {
    if (row.size() != from.num_ranges())
        throw std::invalid_argument("row size does not match its grid");
    std::vector<Position> positions;
    for (int m = 0; m < from.num_ranges(); ++m)
        if (row(m) > 0) positions.push_back({from.lower(m), from.upper(m), row(m)});
    return rebucket(positions, to);
}

ActionEvaluation evaluate_action(const GameSpec& spec, const AtomicProfile& gt, int n,
                                 const Eigen::ArrayXd& action) {
    check_player(spec, n);
    if (gt.num_players() != spec.num_players() || gt.num_ranges() != spec.num_ranges())
        throw std::invalid_argument("profile shape does not match the spec");
    checked_spend(spec, n, action);
    AtomicProfile world = gt;
    world.k.row(n) = action.max(0.0).transpose();
    ActionEvaluation ev;
    ev.utility = atomic_utility(spec, world, n);
    ev.roi = ev.utility / spec.budgets()(n);
    return ev;
}

double nog(const GameSpec& spec, const AtomicProfile& gt, int n,
           const Eigen::ArrayXd& action) {
    const double u_action = evaluate_action(spec, gt, n, action).utility;
    const Eigen::ArrayXd br = best_response(spec, gt, n);
    const double u_br = evaluate_action(spec, gt, n, br).utility;
    return (u_br - u_action) / spec.budgets()(n);
}

Eigen::ArrayXd yday(const Eigen::ArrayXd& prev_row, const TickGrid& prev_grid,
                    double prev_budget, double new_budget,
                    const TickGrid& today_grid) {
    if (!std::isfinite(prev_budget) || prev_budget <= 0 || !std::isfinite(new_budget) ||
        new_budget <= 0)
        throw std::invalid_argument("budgets must be positive");
    return map_row(prev_row, prev_grid, today_grid) * (new_budget / prev_budget);
}

double ibr(const GameSpec& single_range_spec, double gt_others_weight, int n) {
    if (single_range_spec.num_ranges() != 1)
        throw std::invalid_argument("inert best response needs a single-range game");
    check_player(single_range_spec, n);
    if (!std::isfinite(gt_others_weight) || gt_others_weight < 0)
        throw std::invalid_argument("opponent weight must be non-negative");
    Eigen::ArrayXd nu(1);
    nu(0) = single_range_spec.chis()(0) + gt_others_weight;
    return best_response_vs(single_range_spec, nu, single_range_spec.budgets()(n)).k(0);
}

std::string strategy_name(Strategy s) {
    switch (s) {
        case Strategy::gt: return "gt";
        case Strategy::ne: return "ne";
        case Strategy::nea: return "nea";
        case Strategy::br: return "br";
        case Strategy::yday: return "yday";
        case Strategy::rne: return "rne";
        case Strategy::ine: return "ine";
        case Strategy::ibr: return "ibr";
    }
    throw std::logic_error("unknown strategy");
}

std::optional<Strategy> strategy_from_name(const std::string& name) {
    for (Strategy s : kCanonical)
        if (strategy_name(s) == name) return s;
    return std::nullopt;
}

namespace {

std::vector<ReportRow> evaluate_day(const std::vector<DailyGame>& days, std::size_t d,
                                    const std::vector<Strategy>& requested,
                                    const SuiteOptions& opts) {
    const DailyGame& day = days[d];
    const GameSpec& spec = day.spec;
    const AtomicProfile& gt = day.gt;
    const int n_players = spec.num_players();
    auto want = [&](Strategy s) {
        return std::find(requested.begin(), requested.end(), s) != requested.end();
    };

    std::optional<AtomicProfile> ne_profile;
    if (want(Strategy::ne) || want(Strategy::nea)) {
        EquilibriumResult res = solve_ne(spec, opts.solver);
        if (res.converged) ne_profile = std::move(res.profile);
    }

    std::optional<GameSpec> rgame;
    std::optional<AtomicProfile> rne_profile;
    if (want(Strategy::rne) && d > 0) {
        rgame = build_reactive_game(days[d - 1], day, opts.fluctuation_r);
        EquilibriumResult res = solve_ne(*rgame, opts.solver);
        if (res.converged) rne_profile = std::move(res.profile);
    }

    std::optional<GameSpec> igame;
    std::optional<AtomicProfile> ine_profile;
    if ((want(Strategy::ine) || want(Strategy::ibr)) && d > 0) {
        std::vector<const DailyGame*> history;
        const std::size_t lo =
            d > static_cast<std::size_t>(opts.history_days)
                ? d - static_cast<std::size_t>(opts.history_days)
                : 0;
        for (std::size_t i = lo; i < d; ++i) history.push_back(&days[i]);
        igame = build_inert_game(history, opts.expansion_e, day);
        if (want(Strategy::ine)) {
            EquilibriumResult res = solve_ne(*igame, opts.solver);
            if (res.converged) ine_profile = std::move(res.profile);
        }
    }

    // One best response per player serves the br strategy and every nog.
    const bool need_br = std::any_of(requested.begin(), requested.end(),
                                     [](Strategy s) { return s != Strategy::nea; });
    std::vector<Eigen::ArrayXd> br_rows(static_cast<std::size_t>(n_players));
    std::vector<double> br_utils(static_cast<std::size_t>(n_players), 0.0);
    if (need_br) {
        for (int n = 0; n < n_players; ++n) {
            br_rows[n] = best_response(spec, gt, n);
            br_utils[n] = evaluate_action(spec, gt, n, br_rows[n]).utility;
        }
    }

    std::vector<ReportRow> rows;
    for (int n = 0; n < n_players; ++n) {
        const Eigen::ArrayXd gt_row = gt.row(n);
        const double budget = spec.budgets()(n);
        for (Strategy s : requested) {
            Eigen::ArrayXd native;
            const TickGrid* native_grid = &spec.grid();
            bool available = true;
            switch (s) {
                case Strategy::gt:
                    native = gt_row;
                    break;
                case Strategy::ne:
                case Strategy::nea:
                    if (ne_profile) native = ne_profile->row(n);
                    else available = false;
                    break;
                case Strategy::br:
                    native = br_rows[n];
                    break;
                case Strategy::yday: {
                    if (d == 0) {
                        available = false;
                        break;
                    }
                    const DailyGame& prev = days[d - 1];
                    const auto& prev_ids = prev.spec.player_ids();
                    const auto it = std::find(prev_ids.begin(), prev_ids.end(),
                                              spec.player_ids()[n]);
                    if (it == prev_ids.end()) {
                        available = false;
                        break;
                    }
                    const int j = static_cast<int>(it - prev_ids.begin());
                    native = yday(prev.gt.row(j), prev.spec.grid(),
                                  prev.spec.budgets()(j), budget, spec.grid());
                    // Yesterday's layout is scaled in liquidity units, so at
                    // today's prices it can cost more than today's budget;
                    // shrink it uniformly to keep the action feasible.
                    const double cost = (spec.eps() * native).sum();
                    if (cost > budget) native *= budget / cost;
                    break;
                }
                case Strategy::rne:
                    if (rne_profile) {
                        native = rne_profile->row(n);
                        native_grid = &rgame->grid();
                    } else {
                        available = false;
                    }
                    break;
                case Strategy::ine:
                    if (ine_profile) {
                        native = ine_profile->row(n);
                        native_grid = &igame->grid();
                    } else {
                        available = false;
                    }
                    break;
                case Strategy::ibr: {
                    if (!igame) {
                        available = false;
                        break;
                    }
                    double others = 0;
                    for (int i = 0; i < n_players; ++i)
                        if (i != n)
                            others += std::pow(spec.budgets()(i) / igame->eps()(0),
                                               spec.alpha());
                    Eigen::ArrayXd k1(1);
                    k1(0) = ibr(*igame, others, n);
                    native = k1;
                    native_grid = &igame->grid();
                    break;
                }
            }
            if (!available) continue;

            ReportRow row;
            row.pool = opts.pool;
            row.date = day.date;
            row.player = spec.player_ids()[n];
            row.strategy = s;

            const bool same_grid = native_grid == &spec.grid();
            const Eigen::ArrayXd action =
                same_grid ? native : map_row(native, *native_grid, spec.grid());
            row.overlap_gt =
                same_grid ? overlap(spec, n, action, gt_row)
                          : overlap_cross(budget, spec.q0(), spec.p_y0(), *native_grid,
                                          native, spec.grid(), gt_row);
            if (s == Strategy::nea) {
                row.utility = atomic_utility(spec, *ne_profile, n);
                row.roi = *row.utility / budget;
            } else {
                const ActionEvaluation ev = evaluate_action(spec, gt, n, action);
                row.utility = ev.utility;
                row.roi = ev.roi;
                row.nog = (br_utils[n] - ev.utility) / budget;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

}  // namespace

std::vector<ReportRow> run_strategy_suite(const std::vector<DailyGame>& days,
                                          const SuiteOptions& opts) {
    if (opts.history_days < 1) throw std::invalid_argument("history_days must be >= 1");
    if (opts.jobs < 1) throw std::invalid_argument("jobs must be >= 1");
    if (!std::isfinite(opts.fluctuation_r) || opts.fluctuation_r <= 1)
        throw std::invalid_argument("fluctuation ratio must exceed 1");

    std::vector<Strategy> requested;
    for (Strategy s : kCanonical) {
        const bool take = opts.strategies.empty() ||
                          std::find(opts.strategies.begin(), opts.strategies.end(),
                                    s) != opts.strategies.end();
        if (take) requested.push_back(s);
    }

    std::vector<std::vector<ReportRow>> per_day(days.size());
    if (opts.jobs <= 1 || days.size() <= 1) {
        for (std::size_t d = 0; d < days.size(); ++d)
            per_day[d] = evaluate_day(days, d, requested, opts);
    } else {
        const std::size_t workers =
            std::min<std::size_t>(static_cast<std::size_t>(opts.jobs), days.size());
        std::vector<std::thread> threads;
        std::vector<std::exception_ptr> errors(workers);
        std::atomic<std::size_t> next{0};
        for (std::size_t w = 0; w < workers; ++w) {
            threads.emplace_back([&, w] {
                try {
                    for (std::size_t d = next.fetch_add(1); d < days.size();
                         d = next.fetch_add(1))
                        per_day[d] = evaluate_day(days, d, requested, opts);
                } catch (...) {
                    errors[w] = std::current_exception();
                }
            });
        }
        for (std::thread& t : threads) t.join();
        for (const std::exception_ptr& e : errors)
            if (e) std::rethrow_exception(e);
    }

    std::vector<ReportRow> rows;
    for (std::vector<ReportRow>& day_rows : per_day)
        rows.insert(rows.end(), std::make_move_iterator(day_rows.begin()),
                    std::make_move_iterator(day_rows.end()));
    return rows;
}

}  // namespace clmm
