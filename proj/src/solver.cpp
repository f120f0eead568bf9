// Equilibrium solver: exact best responses via duals, damped simultaneous
// best-response iteration, KKT certification and structure checks.
#include "clmm/solver.hpp"

#include "clmm/errors.hpp"
#include "clmm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace clmm {
namespace {

constexpr double kHugeMarginal = 1e300;

inline double weight_pow(double k, double alpha) {
    return alpha == 1.0 ? k : std::pow(k, alpha);
}

// Marginal fee revenue d/dk [f k^a / (nu + k^a)] at k, opponents' weight nu.
double marginal_revenue(double f, double nu, double alpha, double k) {
    if (f <= 0) return 0;
    if (nu <= 0) return 0;  // share is already 1 for any k > 0
    if (k == 0) {
        if (alpha == 1.0) return f / nu;
        return kHugeMarginal;  // k^{alpha-1} blows up
    }
    const double ka = weight_pow(k, alpha);
    const double tot = nu + ka;
    return alpha * f * nu * (ka / k) / (tot * tot);
}

// Unique k > 0 with marginal_revenue(k) = c, for f, nu, c > 0. The marginal
// is strictly decreasing; alpha = 1 solves in closed form, alpha < 1 by a
// bracketed Newton iteration on x = log k (|dh/dx| >= 1 - alpha there).
double stationary_k(double f, double nu, double alpha, double c) {
    if (alpha == 1.0) {
        const double s = std::sqrt(f * nu / c);
        return s > nu ? s - nu : 0.0;
    }
    const double log_c = std::log(c);
    auto h = [&](double x) {
        // log marginal_revenue(e^x) - log c
        const double ka = std::exp(alpha * x);
        return std::log(alpha * f * nu) + (alpha - 1.0) * x - 2.0 * std::log(nu + ka) -
               log_c;
    };
    auto h_prime = [&](double x) {
        const double ka = std::exp(alpha * x);
        return ((alpha - 1.0) * nu - (alpha + 1.0) * ka) / (nu + ka);
    };
    // Upper bound: marginal <= min(a f k^{a-1}/nu, a f nu k^{-1-a}).
    const double hi_1 = std::pow(alpha * f / (c * nu), 1.0 / (1.0 - alpha));
    const double hi_2 = std::pow(alpha * f * nu / c, 1.0 / (1.0 + alpha));
    double x_hi = std::log(std::min(hi_1, hi_2));
    double x_lo = x_hi - std::max(1.0, -h(x_hi) / (1.0 - alpha) + 1.0);
    while (h(x_lo) <= 0) {
        x_hi = x_lo;
        x_lo -= std::max(1.0, (x_hi - x_lo) * 2);
    }
    double x = 0.5 * (x_lo + x_hi);
    for (int iter = 0; iter < 200; ++iter) {
        const double hx = h(x);
        if (hx > 0) x_lo = x; else x_hi = x;
        if (std::abs(hx) < 1e-14 || x_hi - x_lo < 1e-15 * (1.0 + std::abs(x))) break;
        double x_next = x - hx / h_prime(x);
        if (!(x_next > x_lo && x_next < x_hi)) x_next = 0.5 * (x_lo + x_hi);
        x = x_next;
    }
    return std::exp(x);
}

struct RangeProblem {
    double f = 0;
    double tau = 0;
    double eps = 0;
    double nu = 0;  // opponents' weight incl. chi
};

}  // namespace

BestResponse best_response_vs(const GameSpec& spec, const Eigen::ArrayXd& nu_minus,
                              double budget) {
    const int m_count = spec.num_ranges();
    if (nu_minus.size() != m_count)
        throw std::invalid_argument("opponent weights must have one entry per range");
    if (!(budget > 0) || !std::isfinite(budget))
        throw std::invalid_argument("budget must be positive");
    const double alpha = spec.alpha();

    std::vector<RangeProblem> ranges(m_count);
    for (int m = 0; m < m_count; ++m) {
        ranges[m] = {spec.fees()(m), spec.taus()(m), spec.eps()(m), nu_minus(m)};
        if (ranges[m].f > 0 && ranges[m].nu <= 0) {
            std::ostringstream os;
            os << "no maximizer (open supremum): range " << m
               << " has fees but no competing weight";
            throw NoMaximizerError(os.str());
        }
    }

    auto row_at = [&](double lambda, Eigen::ArrayXd& k) -> double {
        double spend = 0;
        for (int m = 0; m < m_count; ++m) {
            const RangeProblem& r = ranges[m];
            if (r.f <= 0) {
                k(m) = 0;
                continue;
            }
            const double c = r.tau + lambda * r.eps;
            if (c <= 0) {
                k(m) = std::numeric_limits<double>::infinity();
                return std::numeric_limits<double>::infinity();
            }
            k(m) = stationary_k(r.f, r.nu, alpha, c);
            spend += r.eps * k(m);
        }
        return spend;
    };

    BestResponse br;
    br.k.resize(m_count);
    double spend0 = row_at(0.0, br.k);
    if (spend0 <= budget) {
        br.lambda = 0;
        return br;
    }

    // The budget binds; spend is continuous and strictly decreasing in
    // lambda wherever positive, so bracket and close in with safeguarded
    // Newton (d spend / d lambda from the implicit stationarity derivative).
    double lo = 0, hi = 1;
    Eigen::ArrayXd k_hi(m_count);
    while (row_at(hi, k_hi) > budget) {
        lo = hi;
        hi *= 2;
        if (hi > 1e300) throw std::runtime_error("budget dual bracket diverged");
    }

    auto spend_slope = [&](double lambda, const Eigen::ArrayXd& k) {
        double slope = 0;
        for (int m = 0; m < m_count; ++m) {
            const RangeProblem& r = ranges[m];
            if (r.f <= 0 || k(m) <= 0) continue;
            const double c = r.tau + lambda * r.eps;
            const double ka = weight_pow(k(m), alpha);
            // dk/dlambda = eps / g'(k), g'(k) = g(k) [(a-1)nu - (a+1)k^a] / (k (nu+k^a))
            const double g_prime =
                c * ((alpha - 1.0) * r.nu - (alpha + 1.0) * ka) / (k(m) * (r.nu + ka));
            slope += r.eps * r.eps / g_prime;
        }
        return slope;
    };

    double lambda = 0.5 * (lo + hi);
    Eigen::ArrayXd k(m_count);
    for (int iter = 0; iter < 128; ++iter) {
        const double spend = row_at(lambda, k);
        if (spend > budget) lo = lambda; else hi = lambda;
        if (std::abs(spend - budget) <= 1e-13 * std::max(1.0, budget) ||
            hi - lo <= 1e-16 * std::max(1.0, hi))
            break;
        const double slope = spend_slope(lambda, k);
        double next = slope < 0 ? lambda - (spend - budget) / slope : lambda;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        lambda = next;
    }
    row_at(lambda, k);
    br.k = k;
    br.lambda = lambda;
    return br;
}

Eigen::ArrayXd best_response(const GameSpec& spec, const AtomicProfile& profile, int n) {
    if (n < 0 || n >= spec.num_players()) throw std::invalid_argument("bad player index");
    if (profile.num_players() != spec.num_players() ||
        profile.num_ranges() != spec.num_ranges())
        throw std::invalid_argument("profile shape does not match the spec");
    Eigen::ArrayXd nu_minus = spec.chis();
    for (int i = 0; i < spec.num_players(); ++i) {
        if (i == n) continue;
        for (int m = 0; m < spec.num_ranges(); ++m)
            nu_minus(m) += weight_pow(profile.k(i, m), spec.alpha());
    }
    return best_response_vs(spec, nu_minus, spec.budgets()(n)).k;
}

double KktReport::max_residual() const {
    return std::max({stationarity, comp_slack, feasibility});
}

KktReport kkt_residuals(const GameSpec& spec, const AtomicProfile& profile) {
    const int n_count = spec.num_players();
    const int m_count = spec.num_ranges();
    if (profile.num_players() != n_count || profile.num_ranges() != m_count)
        throw std::invalid_argument("profile shape does not match the spec");
    const double alpha = spec.alpha();

    KktReport rep;
    rep.lambda = Eigen::ArrayXd::Zero(n_count);
    rep.mu = Eigen::ArrayXXd::Zero(n_count, m_count);

    const Eigen::ArrayXd nu = nu_totals(spec, profile);
    for (int n = 0; n < n_count; ++n) {
        const double budget = spec.budgets()(n);
        const double spent = budget_used(spec, profile.row(n));
        const double slack = budget - spent;
        const bool binding = slack <= 1e-9 * std::max(1.0, budget);

        rep.feasibility = std::max(rep.feasibility, -slack);
        for (int m = 0; m < m_count; ++m)
            rep.feasibility = std::max(rep.feasibility, -profile.k(n, m));

        // Net marginal G = marginal revenue - tau; at an equilibrium
        // G = lambda eps on active ranges and G <= lambda eps elsewhere.
        Eigen::ArrayXd g(m_count);
        for (int m = 0; m < m_count; ++m) {
            const double k = profile.k(n, m);
            const double nu_minus = std::max(0.0, nu(m) - weight_pow(std::max(0.0, k), alpha));
            g(m) = marginal_revenue(spec.fees()(m), nu_minus, alpha, std::max(0.0, k)) -
                   spec.taus()(m);
        }

        double lambda = 0;
        if (binding) {
            double lo = std::numeric_limits<double>::infinity();
            double hi = -std::numeric_limits<double>::infinity();
            for (int m = 0; m < m_count; ++m) {
                if (profile.k(n, m) <= 0) continue;
                const double cand = g(m) / spec.eps()(m);
                lo = std::min(lo, cand);
                hi = std::max(hi, cand);
            }
            if (lo <= hi) lambda = std::max(0.0, 0.5 * (lo + hi));
        }
        rep.lambda(n) = lambda;
        rep.comp_slack = std::max(rep.comp_slack, std::abs(lambda * slack));

        for (int m = 0; m < m_count; ++m) {
            const double k = profile.k(n, m);
            double mu = 0;
            if (k <= 0) mu = std::max(0.0, lambda * spec.eps()(m) - g(m));
            rep.mu(n, m) = mu;
            rep.comp_slack = std::max(rep.comp_slack, std::abs(mu * std::max(0.0, k)));
            const double resid = g(m) - lambda * spec.eps()(m) + mu;
            rep.stationarity = std::max(rep.stationarity, std::abs(resid));
        }
    }
    return rep;
}

EquilibriumResult solve_ne(const GameSpec& spec, const SolverOptions& opts) {
    if (!(opts.omega > 0) || opts.omega > 1)
        throw std::invalid_argument("omega must lie in (0, 1]");
    if (opts.max_iters < 1) throw std::invalid_argument("max_iters must be positive");
    if (auto problems = validate_spec(spec); !problems.empty()) {
        std::ostringstream os;
        os << "invalid spec:";
        for (const auto& p : problems) os << " " << p << ";";
        throw InputError(os.str());
    }

    const int n_count = spec.num_players();
    const int m_count = spec.num_ranges();
    const double alpha = spec.alpha();

    EquilibriumResult res;
    res.profile = AtomicProfile(n_count, m_count);

    if ((spec.fees() <= 0).all()) {
        // Pure-loss game: nobody provides liquidity.
        res.kkt = kkt_residuals(spec, res.profile);
        res.converged = res.kkt.max_residual() <= opts.tol_kkt;
        return res;
    }

    Rng rng(opts.seed);
    for (int n = 0; n < n_count; ++n)
        for (int m = 0; m < m_count; ++m)
            res.profile.k(n, m) =
                rng.uniform(0.1, 0.9) * spec.budgets()(n) / (m_count * spec.eps()(m));

    Eigen::ArrayXXd next(n_count, m_count);
    Eigen::ArrayXd nu_minus(m_count);
    auto sweep = [&](double omega) {
        Eigen::ArrayXXd weights = res.profile.k;
        if (alpha != 1.0)
            weights = weights.pow(alpha);
        Eigen::ArrayXd nu = spec.chis();
        for (int n = 0; n < n_count; ++n) nu += weights.row(n).transpose();

        for (int n = 0; n < n_count; ++n) {
            nu_minus = nu - weights.row(n).transpose();
            nu_minus = nu_minus.max(0.0);
            const BestResponse br = best_response_vs(spec, nu_minus, spec.budgets()(n));
            next.row(n) = (1.0 - omega) * res.profile.k.row(n) +
                          omega * br.k.transpose();
        }

        const double step = (next - res.profile.k).abs().maxCoeff();
        res.profile.k = next;
        return step;
    };

    for (int iter = 1; iter <= opts.max_iters; ++iter) {
        const double step = sweep(opts.omega);
        res.iterations = iter;
        if (step < opts.tol_profile) {
            // Trial certification. The candidate is one undamped sweep ahead:
            // entries whose best response is 0 decay geometrically and pass
            // the step test while still positive, and the snap puts them at
            // exactly 0. If the residuals are still too large (small steps
            // do not bound them when budgets are tiny and the game is sharply
            // curved), drop the snap and keep contracting.
            const Eigen::ArrayXXd damped = res.profile.k;
            sweep(1.0);
            res.kkt = kkt_residuals(spec, res.profile);
            if (res.kkt.max_residual() <= opts.tol_kkt) {
                res.converged = true;
                return res;
            }
            res.profile.k = damped;
        }
    }
    res.kkt = kkt_residuals(spec, res.profile);
    res.converged = false;
    return res;
}

ClosedFormResult closed_form_constant_budget(const GameSpec& spec) {
    const int n_count = spec.num_players();
    const int m_count = spec.num_ranges();
    const double alpha = spec.alpha();

    const double b0 = spec.budgets()(0);
    for (int n = 1; n < n_count; ++n) {
        if (std::abs(spec.budgets()(n) - b0) > 1e-12 * std::max(1.0, std::abs(b0))) {
            std::ostringstream os;
            os << "closed form needs equal budgets; player 0 has " << b0 << ", player "
               << n << " has " << spec.budgets()(n);
            throw InputError(os.str());
        }
    }
    for (int m = 0; m < m_count; ++m) {
        if (spec.chis()(m) != 0) {
            std::ostringstream os;
            os << "closed form needs chi = 0; range " << m << " has chi = "
               << spec.chis()(m);
            throw InputError(os.str());
        }
    }

    ClosedFormResult res;
    res.profile = AtomicProfile(n_count, m_count);
    if (n_count == 1) {
        res.degenerate = true;
        return res;
    }

    const double scale = alpha * (n_count - 1) / static_cast<double>(n_count) /
                         static_cast<double>(n_count);
    auto row_spend = [&](double mu, Eigen::ArrayXd& k) {
        double spend = 0;
        for (int m = 0; m < m_count; ++m) {
            const double f = spec.fees()(m);
            const double denom = spec.taus()(m) + mu * spec.eps()(m);
            k(m) = f <= 0 ? 0
                          : (denom <= 0 ? std::numeric_limits<double>::infinity()
                                        : scale * f / denom);
            spend += spec.eps()(m) * k(m);
        }
        return spend;
    };

    Eigen::ArrayXd k(m_count);
    if (row_spend(0.0, k) <= b0) {
        res.mu = 0;
        res.budget_limited = false;
    } else {
        res.budget_limited = true;
        double lo = 0, hi = 1;
        while (row_spend(hi, k) > b0) hi *= 2;
        for (int iter = 0; iter < 200; ++iter) {
            const double mid = 0.5 * (lo + hi);
            if (row_spend(mid, k) > b0) lo = mid; else hi = mid;
            if (hi - lo <= 1e-16 * std::max(1.0, hi)) break;
        }
        res.mu = 0.5 * (lo + hi);
        row_spend(res.mu, k);
    }
    for (int n = 0; n < n_count; ++n) res.profile.k.row(n) = k.transpose();
    return res;
}

namespace {

// Waterfill conditions for one classification of slack players.
bool waterfill_once(const GameSpec& spec, const AtomicProfile& profile,
                    const std::vector<int>& slack_players, double tol,
                    double* worst, Eigen::ArrayXd* h_row, double* h_out) {
    const int m_count = spec.num_ranges();
    const int n_count = spec.num_players();

    Eigen::ArrayXd spends(n_count);
    for (int n = 0; n < n_count; ++n) spends(n) = budget_used(spec, profile.row(n));

    Eigen::ArrayXd h_m;
    double h;
    if (!slack_players.empty()) {
        h_m = Eigen::ArrayXd::Zero(m_count);
        for (int n : slack_players) h_m += profile.row(n);
        h_m /= static_cast<double>(slack_players.size());
        h = (h_m * spec.eps()).sum();
    } else {
        h_m = profile.k.colwise().maxCoeff().transpose();
        h = spends.maxCoeff();
    }

    double violation = 0;
    // (i) slack players share a common row
    for (int n : slack_players)
        violation = std::max(violation, (profile.row(n) - h_m).abs().maxCoeff());
    // (ii) nobody exceeds the shared row
    for (int n = 0; n < n_count; ++n)
        violation = std::max(violation, (profile.row(n) - h_m).maxCoeff());
    // (iii) spends waterfill at level h
    for (int n = 0; n < n_count; ++n) {
        const double target = std::min(h, spec.budgets()(n));
        violation = std::max(violation,
                             std::abs(spends(n) - target) / std::max(1.0, target));
    }
    *worst = violation;
    *h_row = h_m;
    *h_out = h;
    return violation <= tol;
}

}  // namespace

WaterfillReport waterfill_check(const GameSpec& spec, const AtomicProfile& profile,
                                double tol) {
    const int n_count = spec.num_players();
    WaterfillReport rep;

    std::vector<int> slack, borderline;
    for (int n = 0; n < n_count; ++n) {
        const double gap = spec.budgets()(n) - budget_used(spec, profile.row(n));
        const double cut = tol * std::max(1.0, spec.budgets()(n));
        if (gap > cut) slack.push_back(n);
        else if (gap > -cut) borderline.push_back(n);
    }

    double worst = 0, h = 0;
    Eigen::ArrayXd h_row;
    rep.pass = waterfill_once(spec, profile, slack, tol, &worst, &h_row, &h);
    rep.worst_violation = worst;
    if (!rep.pass && !borderline.empty()) {
        // Near-binding players are legitimate members of either class.
        std::vector<int> widened = slack;
        widened.insert(widened.end(), borderline.begin(), borderline.end());
        std::sort(widened.begin(), widened.end());
        double worst2 = 0, h2 = 0;
        Eigen::ArrayXd h_row2;
        if (waterfill_once(spec, profile, widened, tol, &worst2, &h_row2, &h2)) {
            rep.pass = true;
            worst = worst2;
            h_row = h_row2;
            h = h2;
            slack = widened;
        }
        rep.worst_violation = std::min(rep.worst_violation, worst2);
    }
    rep.h = h;
    rep.h_m = h_row;
    rep.slack_players = slack;
    if (!rep.pass) rep.detail = "waterfill structure violated";
    return rep;
}

StructureReport structure_checks(const GameSpec& spec, const AtomicProfile& profile,
                                 double tol) {
    const int n_count = spec.num_players();
    const int m_count = spec.num_ranges();
    StructureReport rep;

    const WaterfillReport wf = waterfill_check(spec, profile, tol);
    rep.waterfill = wf.pass;
    rep.worst_violation = wf.worst_violation;

    rep.dominance = true;
    for (int i = 0; i < n_count; ++i) {
        for (int j = 0; j < n_count; ++j) {
            const double bi = spec.budgets()(i), bj = spec.budgets()(j);
            const double cut = tol * std::max(1.0, std::max(bi, bj));
            if (std::abs(bi - bj) <= cut) {
                const double dev = (profile.row(i) - profile.row(j)).abs().maxCoeff();
                if (dev > tol * std::max(1.0, profile.k.abs().maxCoeff()))
                    rep.dominance = false;
            } else if (bi < bj) {
                const double dev = (profile.row(i) - profile.row(j)).maxCoeff();
                if (dev > tol * std::max(1.0, profile.k.abs().maxCoeff()))
                    rep.dominance = false;
            }
        }
    }

    const bool no_chi = (spec.chis() == 0).all();
    if (spec.alpha() < 1 && no_chi) {
        rep.positivity_checked = true;
        for (int n = 0; n < n_count; ++n)
            for (int m = 0; m < m_count; ++m)
                if (spec.fees()(m) > 0 && !(profile.k(n, m) > 0)) rep.positivity = false;
    }

    if (no_chi) {
        bool any_binding = false;
        for (int n = 0; n < n_count; ++n) {
            const double gap = spec.budgets()(n) - budget_used(spec, profile.row(n));
            if (gap <= tol * std::max(1.0, spec.budgets()(n))) any_binding = true;
        }
        if (!any_binding) {
            rep.constant_utility_checked = true;
            const double target = ((1.0 - spec.alpha()) * n_count + spec.alpha()) /
                                  (static_cast<double>(n_count) * n_count) *
                                  spec.fees().sum();
            for (int n = 0; n < n_count; ++n) {
                const double u = atomic_utility(spec, profile, n);
                if (std::abs(u - target) > tol * std::max(1.0, std::abs(target)))
                    rep.constant_utility = false;
            }
        }
    }
    return rep;
}

std::vector<GeneralAllocation> lift_to_original(const AtomicProfile& profile) {
    std::vector<GeneralAllocation> allocs;
    allocs.reserve(profile.num_players());
    for (int n = 0; n < profile.num_players(); ++n) allocs.push_back(xi(profile.row(n)));
    return allocs;
}

}  // namespace clmm
