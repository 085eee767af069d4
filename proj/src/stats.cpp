#include "darnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace darnet
{
double quantile_sorted(std::span<double const> sorted, double q)
{
    if (sorted.empty())
        return 0;
    double pos = q * double(sorted.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    double w = pos - double(lo);
    return sorted[lo] * (1 - w) + sorted[hi] * w;
}

Summary summarize(std::span<double const> values)
{
    Summary s;
    s.count = values.size();
    if (values.empty())
        return s;
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    // summing in sorted order keeps the result independent of input order
    s.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / s.count;
    double ss = 0;
    for (double v : sorted)
        ss += (v - s.mean) * (v - s.mean);
    s.sd = s.count > 1 ? std::sqrt(ss / double(s.count - 1)) : 0.0;
    s.se = s.sd / std::sqrt(double(s.count));
    s.ci_low = s.mean - 1.96 * s.se;
    s.ci_high = s.mean + 1.96 * s.se;
    s.min = sorted.front();
    s.max = sorted.back();
    s.q05 = quantile_sorted(sorted, 0.05);
    s.q50 = quantile_sorted(sorted, 0.50);
    s.q95 = quantile_sorted(sorted, 0.95);
    return s;
}
}  // namespace darnet
