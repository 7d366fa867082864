#pragma once

// Frozen reference values and brute-force oracles shared by the unit tests
// and the acceptance binary.

#include <algorithm>
#include <cstddef>
#include <vector>

namespace testing {

struct TCase {
    std::vector<double> x;
    double t_pop, p_pop;       // sd with divisor n
    double t_sample, p_sample; // sd with divisor n - 1
};

// Frozen from mpmath at 40 significant digits (regularized incomplete beta).
inline const std::vector<TCase> kTCases = {
    {{0.1, 0.2, 0.3, 0.4}, 4.4721359549995794, 0.010417575598092422, 3.8729833462074169, 0.015233145831085496},
    {{5.1, 4.9, 5.6, 5.8, 6.0, 5.2}, 33.744205851841121, 2.1488197748064192e-7, 30.804104550252019,
     3.3832930437088044e-7},
    {{0.3, -0.1, 0.4, 0.2, 0.5}, 2.8234195779599509, 0.02383114686893812, 2.5253432421288869, 0.032492955171060332},
    {{1.2, 0.8, 1.9, -0.4, 0.7, 1.1, 0.3}, 3.1502461225928669, 0.0099042679779131994, 2.9165611795270214,
     0.013375402403302744},
    {{-0.2, 0.1, -0.3, 0.05, -0.1}, -1.3446321855011928, 0.87503463782019178, -1.2026755886059097,
     0.85228877847212253},
    {{2, 3, 1, 4, 2, 3, 5, 1}, 5.6377108637978042, 0.00039222540604126281, 5.273595624506188,
     0.0005780424169259628},
    {{0.01, 0.02, -0.01, 0.03, 0.0, 0.02, 0.01, -0.02, 0.04}, 1.8605210188381268, 0.049925338265930219,
     1.7541160386140584, 0.058747291333547285},
    {{12.5, -3.2, 7.7, 4.4, -1.1, 9.9, 0.6, 3.3, 2.2, 5.5, -0.7}, 2.6662160691477195, 0.011822817667400451,
     2.5421372767777899, 0.014627873553526953},
    {{0.5, 0.6}, 15.556349186104046, 0.020433619923481825, 11.0, 0.028857938376304478},
    {{-1.5, -2.5, -0.5, -1.0, -2.0, -3.0}, -5.0199601592044533, 0.99798237329449499, -4.58257569495584,
     0.99703322774120387},
    {{0.25, 0.12, 0.31, -0.05, 0.18, 0.22, 0.09, 0.14, 0.27, 0.03, 0.11, 0.19}, 5.4215655471605274,
     0.0001048394871769519, 5.1907538213293125, 0.00014936389807400166},
};

// Tests every k explicitly: reject the k smallest for the largest k with
// p_(k) <= k q / m.
inline std::vector<bool> bh_oracle(const std::vector<double>& p, double q)
{
    const std::size_t m = p.size();
    std::vector<double> sorted = p;
    std::sort(sorted.begin(), sorted.end());
    std::size_t best = 0;
    for (std::size_t k = 1; k <= m; ++k)
        if (sorted[k - 1] <= static_cast<double>(k) * q / static_cast<double>(m))
            best = k;
    std::vector<bool> mask(m, false);
    if (best == 0)
        return mask;
    const double threshold = sorted[best - 1];
    for (std::size_t i = 0; i < m; ++i)
        mask[i] = p[i] <= threshold;
    return mask;
}

} // namespace testing
