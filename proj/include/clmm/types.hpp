// Shared value types: tick grids, price points, liquidity positions.
#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace clmm {

// Strictly increasing positive ticks t_0 < ... < t_M delimiting M atomic
// price ranges; atomic range m (0-based) is (t_m, t_{m+1}).
class TickGrid {
public:
    explicit TickGrid(Eigen::ArrayXd ticks);
    explicit TickGrid(const std::vector<double>& ticks);

    int num_ticks() const { return static_cast<int>(ticks_.size()); }
    int num_ranges() const { return num_ticks() - 1; }
    double tick(int i) const { return ticks_(i); }
    double lower(int m) const { return ticks_(m); }
    double upper(int m) const { return ticks_(m + 1); }
    double min_tick() const { return ticks_(0); }
    double max_tick() const { return ticks_(ticks_.size() - 1); }
    const Eigen::ArrayXd& ticks() const { return ticks_; }

    // Index of an exactly matching tick, or -1.
    int find_tick(double t) const;

    bool operator==(const TickGrid& other) const;
    bool operator!=(const TickGrid& other) const { return !(*this == other); }

private:
    Eigen::ArrayXd ticks_;
};

// Pool price state: marginal price q = p_X / p_Y plus the two fiat prices.
// The triple need not satisfy q = p_X / p_Y exactly; shift_prices projects
// onto that manifold.
struct PricePoint {
    double q = 0;
    double p_x = 0;
    double p_y = 0;
};

// One liquidity position: `liquidity` units on price range (lower, upper).
struct Position {
    double lower = 0;
    double upper = 0;
    double liquidity = 0;
};

// Per-range liquidity on a grid (one value per atomic range).
struct LiquidityHistogram {
    LiquidityHistogram(TickGrid g, Eigen::ArrayXd values);

    TickGrid grid;
    Eigen::ArrayXd liquidity;
};

}  // namespace clmm
