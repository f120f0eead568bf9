// AMM math: liquidity prices, IL rates, fluctuation expectations.
#include "clmm/amm.hpp"

#include "clmm/errors.hpp"
#include "clmm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <utility>

namespace clmm {
namespace {

bool positive_finite(double v) { return std::isfinite(v) && v > 0; }

void check_range(double a, double b) {
    if (!positive_finite(a) || !positive_finite(b) || !(a < b)) {
        std::ostringstream os;
        os << "invalid price range (" << a << ", " << b << ")";
        throw std::invalid_argument(os.str());
    }
}

void check_price(double q, const char* name) {
    if (!positive_finite(q)) {
        std::ostringstream os;
        os << "invalid " << name << " " << q;
        throw std::invalid_argument(os.str());
    }
}

// 64-point Gauss-Legendre rule on [-1, 1]; nodes by Newton on P_64.
struct GaussRule {
    static constexpr int n = 64;
    double node[n];
    double weight[n];

    GaussRule() {
        for (int i = 0; i < (n + 1) / 2; ++i) {
            double z = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double pp = 0;
            for (int iter = 0; iter < 64; ++iter) {
                double p0 = 1, p1 = 0;
                for (int k = 0; k < n; ++k) {
                    const double p2 = p1;
                    p1 = p0;
                    p0 = ((2.0 * k + 1.0) * z * p1 - k * p2) / (k + 1);
                }
                pp = n * (z * p0 - p1) / (z * z - 1.0);
                const double dz = p0 / pp;
                z -= dz;
                if (std::abs(dz) < 1e-15) break;
            }
            node[i] = -z;
            node[n - 1 - i] = z;
            weight[i] = weight[n - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
        }
    }

    template <typename F>
    double integrate(F&& f, double lo, double hi) const {
        const double mid = 0.5 * (lo + hi);
        const double half = 0.5 * (hi - lo);
        double acc = 0;
        for (int i = 0; i < n; ++i) acc += weight[i] * f(mid + half * node[i]);
        return acc * half;
    }
};

const GaussRule& gauss64() {
    static const GaussRule rule;
    return rule;
}

}  // namespace

TickGrid::TickGrid(Eigen::ArrayXd ticks) : ticks_(std::move(ticks)) {
    if (ticks_.size() < 2) throw std::invalid_argument("tick grid needs at least 2 ticks");
    for (Eigen::Index i = 0; i < ticks_.size(); ++i) {
        if (!positive_finite(ticks_(i)))
            throw std::invalid_argument("ticks must be positive and finite");
        if (i > 0 && !(ticks_(i - 1) < ticks_(i)))
            throw std::invalid_argument("ticks must be strictly increasing");
    }
}

TickGrid::TickGrid(const std::vector<double>& ticks)
    : TickGrid(Eigen::Map<const Eigen::ArrayXd>(ticks.data(),
                                                static_cast<Eigen::Index>(ticks.size()))) {}

int TickGrid::find_tick(double t) const {
    const double* begin = ticks_.data();
    const double* end = begin + ticks_.size();
    const double* it = std::lower_bound(begin, end, t);
    if (it != end && *it == t) return static_cast<int>(it - begin);
    return -1;
}

bool TickGrid::operator==(const TickGrid& other) const {
    return ticks_.size() == other.ticks_.size() && (ticks_ == other.ticks_).all();
}

LiquidityHistogram::LiquidityHistogram(TickGrid g, Eigen::ArrayXd values)
    : grid(std::move(g)), liquidity(std::move(values)) {
    if (liquidity.size() != grid.num_ranges())
        throw std::invalid_argument("liquidity histogram size does not match grid");
    for (Eigen::Index m = 0; m < liquidity.size(); ++m) {
        if (!std::isfinite(liquidity(m)) || liquidity(m) < 0)
            throw std::invalid_argument("liquidity must be finite and non-negative");
    }
}

double clamp_price(double q, double a, double b) {
    check_range(a, b);
    check_price(q, "price");
    return std::max(a, std::min(b, q));
}

TokenAmounts position_amounts(const Position& pos, double q) {
    check_range(pos.lower, pos.upper);
    check_price(q, "price");
    if (!std::isfinite(pos.liquidity) || pos.liquidity < 0)
        throw std::invalid_argument("position liquidity must be non-negative");
    const double rq = std::sqrt(std::max(pos.lower, std::min(pos.upper, q)));
    return {pos.liquidity * (1.0 / rq - 1.0 / std::sqrt(pos.upper)),
            pos.liquidity * (rq - std::sqrt(pos.lower))};
}

double liquidity_price(double a, double b, double q, double p_y) {
    check_range(a, b);
    check_price(q, "price");
    check_price(p_y, "p_y");
    const double rq = std::sqrt(std::max(a, std::min(b, q)));
    return p_y * (rq - std::sqrt(a) + q / rq - q / std::sqrt(b));
}

double il_rate(double a, double b, double q, double q_new, double p_y, double p_y_new) {
    check_range(a, b);
    check_price(q, "price");
    check_price(q_new, "price");
    check_price(p_y, "p_y");
    check_price(p_y_new, "p_y");
    const double rq = std::sqrt(std::max(a, std::min(b, q)));
    const double rq_new = std::sqrt(std::max(a, std::min(b, q_new)));
    return (p_y_new / p_y) * (rq + q_new / rq - rq_new - q_new / rq_new);
}

double il_rate_legacy(double q, double q_new, double p_y, double p_y_new) {
    check_price(q, "price");
    check_price(q_new, "price");
    check_price(p_y, "p_y");
    check_price(p_y_new, "p_y");
    const double rq = std::sqrt(q);
    return (p_y_new / p_y) * (rq + q_new / rq - 2.0 * std::sqrt(q_new));
}

PriceDistribution PriceDistribution::point_mass(double q_new) {
    return discrete({{q_new, 1.0}});
}

PriceDistribution PriceDistribution::discrete(
    std::vector<std::pair<double, double>> outcomes) {
    if (outcomes.empty()) throw InputError("price distribution has no outcomes");
    double total = 0;
    for (const auto& [q, w] : outcomes) {
        if (!positive_finite(q)) throw InputError("price outcome must be positive");
        if (!std::isfinite(w) || w < 0) throw InputError("outcome weight must be non-negative");
        total += w;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        std::ostringstream os;
        os << "outcome weights sum to " << total << ", expected 1";
        throw InputError(os.str());
    }
    PriceDistribution dist;
    dist.outcomes_ = std::move(outcomes);
    return dist;
}

PriceDistribution PriceDistribution::log_uniform(double r) {
    if (!std::isfinite(r) || r <= 1.0) throw InputError("fluctuation ratio must exceed 1");
    PriceDistribution dist;
    dist.log_uniform_r_ = r;
    return dist;
}

double PriceDistribution::sample(double q, Rng& rng) const {
    if (!is_log_uniform())
        throw std::logic_error("sample() is only defined for the log-uniform model");
    const double w = std::log(log_uniform_r_);
    return q * std::exp(rng.uniform(-w, w));
}

double expected_il_rate(double a, double b, double q, const PriceDistribution& dist) {
    check_range(a, b);
    check_price(q, "price");
    if (!dist.is_log_uniform()) {
        double acc = 0;
        for (const auto& [q_new, w] : dist.outcomes()) acc += w * il_rate(a, b, q, q_new);
        return std::max(0.0, acc);
    }
    // log q' ~ Uniform(log q - w, log q + w); the integrand is smooth except
    // where q' crosses a or b, so split there and apply the rule per piece.
    const double w = std::log(dist.ratio());
    std::vector<double> cuts = {-w, w};
    for (double kink : {std::log(a / q), std::log(b / q)}) {
        if (kink > -w && kink < w) cuts.push_back(kink);
    }
    std::sort(cuts.begin(), cuts.end());
    double acc = 0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
        acc += gauss64().integrate(
            [&](double u) { return il_rate(a, b, q, q * std::exp(u)); }, cuts[i],
            cuts[i + 1]);
    }
    // The integrand only touches 0 (ranges the support never enters), so the
    // ulp-scale noise of those evaluations is clipped rather than returned.
    return std::max(0.0, acc / (2.0 * w));
}

PricePoint shift_prices(const PricePoint& p) {
    check_price(p.q, "price");
    check_price(p.p_x, "p_x");
    check_price(p.p_y, "p_y");
    return {p.q, std::sqrt(p.p_x * p.p_y * p.q), std::sqrt(p.p_x * p.p_y / p.q)};
}

double price_shift_error(const PricePoint& p) {
    check_price(p.q, "price");
    check_price(p.p_x, "p_x");
    check_price(p.p_y, "p_y");
    return 0.5 * (std::log(p.p_y) + std::log(p.q) - std::log(p.p_x));
}

double empirical_il_rate(double a, double b, const PricePoint& prev, const PricePoint& cur) {
    const PricePoint sp = shift_prices(prev);
    const PricePoint sc = shift_prices(cur);
    // On consistent prices the rate is non-negative; clip the ulp-scale
    // noise of the clamped-to-the-same-side case so specs built from it
    // never carry a negative rate.
    return std::max(0.0, il_rate(a, b, sp.q, sc.q, sp.p_y, sc.p_y));
}

}  // namespace clmm
