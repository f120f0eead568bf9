// Bonding curve construction and evaluation.
#include "clmm/bonding_curve.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace clmm {

BondingCurve::BondingCurve(const LiquidityHistogram& hist)
    : grid_(hist.grid), j_(hist.liquidity) {
    const int num_ticks = grid_.num_ticks();
    breakpoints_.resize(num_ticks);
    // x accumulates from the top tick down, y from the bottom tick up.
    breakpoints_[num_ticks - 1].x = 0;
    for (int i = num_ticks - 2; i >= 0; --i) {
        breakpoints_[i].x = breakpoints_[i + 1].x +
                            j_(i) * (1.0 / std::sqrt(grid_.tick(i)) -
                                     1.0 / std::sqrt(grid_.tick(i + 1)));
    }
    breakpoints_[0].y = 0;
    for (int i = 1; i < num_ticks; ++i) {
        breakpoints_[i].y = breakpoints_[i - 1].y +
                            j_(i - 1) * (std::sqrt(grid_.tick(i)) -
                                         std::sqrt(grid_.tick(i - 1)));
    }
    for (int i = 0; i < num_ticks; ++i) breakpoints_[i].tick = grid_.tick(i);
}

int BondingCurve::piece_at(double x) const {
    if (!std::isfinite(x) || x < 0 || x > max_x()) {
        std::ostringstream os;
        os << "x = " << x << " outside curve domain [0, " << max_x() << "]";
        throw std::domain_error(os.str());
    }
    // Pieces ordered by descending x as the range index rises. Among pieces
    // containing x, prefer the largest index (the smaller-x side), which is
    // the left limit at breakpoints collapsed by empty ranges.
    for (int m = grid_.num_ranges() - 1; m >= 0; --m) {
        if (j_(m) <= 0) continue;
        if (x <= breakpoints_[m].x) return m;
    }
    throw std::domain_error("bonding curve has no liquidity");
}

double BondingCurve::eval(double x) const {
    const int m = piece_at(x);
    const double j = j_(m);
    const double denom = x - breakpoints_[m + 1].x + j / std::sqrt(grid_.tick(m + 1));
    return j * j / denom + breakpoints_[m].y - j * std::sqrt(grid_.tick(m));
}

double BondingCurve::slope(double x) const {
    const int m = piece_at(x);
    const double j = j_(m);
    const double denom = x - breakpoints_[m + 1].x + j / std::sqrt(grid_.tick(m + 1));
    return -(j * j) / (denom * denom);
}

}  // namespace clmm
