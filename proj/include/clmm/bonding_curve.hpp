// Piecewise-hyperbolic bonding curve y = phi(x) induced by a liquidity
// histogram: C1 across populated ranges, slope -q at marginal price q.
#pragma once

#include "clmm/types.hpp"

#include <vector>

namespace clmm {

class BondingCurve {
public:
    explicit BondingCurve(const LiquidityHistogram& hist);

    // Curve breakpoint at tick index i: pool holdings (x, y) when the price
    // sits exactly at tick t_i. x decreases with i; x at the last tick is 0.
    struct Breakpoint {
        double x = 0;
        double y = 0;
        double tick = 0;
    };

    const std::vector<Breakpoint>& breakpoints() const { return breakpoints_; }
    double max_x() const { return breakpoints_.front().x; }

    // phi(x) for x in [0, max_x]; throws std::domain_error outside.
    double eval(double x) const;

    // phi'(x); equals -t_i at breakpoint i. At a breakpoint collapsed by an
    // empty range the slope jumps; the left limit (smaller-x side) is returned.
    double slope(double x) const;

private:
    int piece_at(double x) const;

    TickGrid grid_;
    Eigen::ArrayXd j_;                     // liquidity per atomic range
    std::vector<Breakpoint> breakpoints_;  // one per tick
};

}  // namespace clmm
