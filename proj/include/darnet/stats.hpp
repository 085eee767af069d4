#pragma once

#include <span>
#include <vector>

namespace darnet
{
//! Pooled statistics of a sample of replica-level values.
struct Summary
{
    std::size_t count = 0;
    double mean = 0;
    double sd = 0;
    double se = 0;
    double ci_low = 0;   //!< mean - 1.96 se
    double ci_high = 0;  //!< mean + 1.96 se
    double min = 0;
    double q05 = 0;
    double q50 = 0;
    double q95 = 0;
    double max = 0;
};

//! Summary of \c values; invariant to their order.
Summary summarize(std::span<double const> values);

//! Linear-interpolated quantile of an already sorted sample.
double quantile_sorted(std::span<double const> sorted, double q);
}  // namespace darnet
