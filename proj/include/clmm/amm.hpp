// Concentrated-liquidity AMM math: position values, liquidity prices,
// impermanent-loss rates and their expectations under price fluctuation.
#pragma once

#include "clmm/types.hpp"

#include <utility>
#include <vector>

namespace clmm {

// Price clamped into the range: max{a, min{b, q}}.
double clamp_price(double q, double a, double b);

struct TokenAmounts {
    double dx = 0;
    double dy = 0;
};

// Token amounts held by a position at marginal price q.
TokenAmounts position_amounts(const Position& pos, double q);

// Dollar value of one unit of liquidity on (a, b) at price q:
//   eps_{a,b}(q) = p_y (sqrt(qh) - sqrt(a) + q/sqrt(qh) - q/sqrt(b)),
// qh the clamped price. Constant sqrt(b)-sqrt(a) above b, linear in q below a.
double liquidity_price(double a, double b, double q, double p_y = 1.0);

// Impermanent-loss rate per unit of liquidity on (a, b) for a move q -> q_new
// (dollar loss of holding the position versus holding its initial tokens):
//   (p_y_new / p_y) (sqrt(qh) + q_new/sqrt(qh) - sqrt(qh') - q_new/sqrt(qh')).
// Non-negative, zero when both prices clamp to the same point, and additive
// across a split of (a, b) at an interior c.
double il_rate(double a, double b, double q, double q_new,
               double p_y = 1.0, double p_y_new = 1.0);

// Legacy full-range variant (no clamping; diverges as q_new -> 0):
//   (p_y_new / p_y) (sqrt(q) + q_new/sqrt(q) - 2 sqrt(q_new)).
double il_rate_legacy(double q, double q_new, double p_y = 1.0, double p_y_new = 1.0);

// Distribution of the day-ahead price q' used when taking IL expectations.
// Either a finite set of outcomes or the log-uniform fluctuation model
// log(q'/q) ~ Uniform(-log r, log r).
class PriceDistribution {
public:
    static PriceDistribution point_mass(double q_new);
    // Outcomes (q', weight); weights must sum to 1.
    static PriceDistribution discrete(std::vector<std::pair<double, double>> outcomes);
    static PriceDistribution log_uniform(double r);

    bool is_log_uniform() const { return log_uniform_r_ > 0; }
    double ratio() const { return log_uniform_r_; }
    const std::vector<std::pair<double, double>>& outcomes() const { return outcomes_; }

    // One draw of q' around center q (log-uniform case only).
    double sample(double q, class Rng& rng) const;

private:
    PriceDistribution() = default;
    std::vector<std::pair<double, double>> outcomes_;
    double log_uniform_r_ = 0;
};

// E[il_rate(a, b, q, q')] with q' ~ dist and p_y held constant. Discrete
// distributions are summed exactly; the log-uniform model is integrated with
// 64-point Gauss-Legendre per smooth piece (split at the clamp kinks a, b).
double expected_il_rate(double a, double b, double q, const PriceDistribution& dist);

// Project (p_x, p_y) onto the consistency manifold p_x = q p_y, preserving
// the product: returns (sqrt(p_x p_y q), sqrt(p_x p_y / q)).
PricePoint shift_prices(const PricePoint& p);

// Log-scale inconsistency removed by the shift: log(px_bar) - log(p_x).
double price_shift_error(const PricePoint& p);

// Realized IL rate of (a, b) between two observed price points, evaluated on
// shifted (consistent) prices so the result is non-negative.
double empirical_il_rate(double a, double b, const PricePoint& prev, const PricePoint& cur);

}  // namespace clmm
