#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <thread>
#include <vector>

#include "darnet/analytics.hpp"
#include "darnet/errors.hpp"
#include "darnet/model.hpp"

namespace darnet
{
//---------------------------------------------------------------------------//
struct SimConfig
{
    double horizon = 100;
    double sample_interval = 1;
    double burn_in = 0;
    std::uint64_t seed = 1;
    int replicas = 1;
    long event_cap = 1'000'000'000L;

    void validate() const;
};

struct Sample
{
    double time = 0;
    double f = 0;
    double g = 0;
    double mean_load = 0;
    long lost = 0;
    long accepted = 0;
};

struct Trajectory
{
    std::vector<Sample> samples;
    //! Time averages of f and g over [burn_in, end_time].
    double mean_f = 0;
    double mean_g = 0;
    //! Largest / smallest f seen at any instant after burn-in.
    double max_f_after_burn_in = 0;
    double min_f_after_burn_in = 1;
    long events = 0;
    long arrival_events = 0;
    long departures = 0;
    long accepted = 0;
    long lost = 0;
    long initial_load = 0;
    double end_time = 0;
    bool truncated = false;  //!< event cap hit before the horizon
    std::uint64_t digest = 0;
    SystemState final_state;
};

//! Link law of a product system: ET(alpha, beta, sigma, K), with
//! Er(beta, K) as the special case alpha = beta, sigma = 0.
struct ProductLink
{
    analytics::EtParams et;

    static ProductLink erlang(double beta, int capacity)
    {
        return {{beta, beta, 0, capacity}};
    }
};

/*!
 * Event-driven simulation of a DAR system.
 *
 * One exponential clock at total rate 2 lambda n + (total load); arrivals
 * pick a link uniformly and run handle_arrival, departures pick a call
 * uniformly. Samples are taken at multiples of the sample interval.
 */
Trajectory run(ModelParams const& params, SystemState init,
               SimConfig const& config);

//! Simulation of n independent links with load-dependent constant rates.
Trajectory run_product(ProductLink const& link, int links, SystemState init,
                       SimConfig const& config);

//---------------------------------------------------------------------------//

struct HittingPredicate
{
    enum class Quantity
    {
        f,
        g
    };
    enum class Direction
    {
        at_most,
        at_least
    };

    Quantity quantity = Quantity::f;
    Direction direction = Direction::at_most;
    double threshold = 0;

    bool holds(BlockingProfile const& p) const
    {
        double v = quantity == Quantity::f ? p.f : p.g;
        return direction == Direction::at_most ? v <= threshold
                                               : v >= threshold;
    }
};

struct HittingResult
{
    bool hit = false;
    double time = 0;  //!< hitting time, or the cap when not hit
    long events = 0;
};

HittingResult hitting_time(ModelParams const& params, SystemState init,
                           HittingPredicate const& predicate, double cap,
                           std::uint64_t seed,
                           long event_cap = 1'000'000'000L);

//---------------------------------------------------------------------------//
// Replication
//---------------------------------------------------------------------------//

//! Worker count: DARNET_THREADS if set, else the hardware concurrency.
int default_threads();

//! Seed of replica \c index: base_seed + index.
constexpr std::uint64_t replica_seed(std::uint64_t base_seed,
                                     std::size_t index)
{
    return base_seed + index;
}

/*!
 * Run \c task for replicas 0..replicas-1 in parallel.
 *
 * Results are stored by replica index, so the output does not depend on
 * scheduling. The first failing replica (lowest index) is rethrown as a
 * ReplicaError.
 */
template<class Task>
auto replicate(std::size_t replicas, std::uint64_t base_seed, Task&& task,
               int threads = 0)
    -> std::vector<decltype(task(std::uint64_t{}, std::size_t{}))>
{
    using R = decltype(task(std::uint64_t{}, std::size_t{}));
    if (replicas < 1)
        throw InvalidParameter("replicate: need at least one replica");
    if (threads <= 0)
        threads = default_threads();
    std::vector<std::optional<R>> slots(replicas);
    std::vector<std::exception_ptr> errors(replicas);
    std::atomic<std::size_t> next{0};

    auto worker = [&] {
        for (std::size_t i = next++; i < replicas; i = next++)
        {
            try
            {
                slots[i].emplace(task(replica_seed(base_seed, i), i));
            }
            catch (...)
            {
                errors[i] = std::current_exception();
            }
        }
    };
    auto count = std::min<std::size_t>(std::size_t(threads), replicas);
    {
        std::vector<std::jthread> pool;
        for (std::size_t t = 1; t < count; ++t)
            pool.emplace_back(worker);
        worker();
    }
    for (std::size_t i = 0; i < replicas; ++i)
    {
        if (!errors[i])
            continue;
        try
        {
            std::rethrow_exception(errors[i]);
        }
        catch (std::exception const& e)
        {
            throw ReplicaError(i, e.what(), errors[i]);
        }
    }
    std::vector<R> out;
    out.reserve(replicas);
    for (auto& s : slots)
        out.push_back(std::move(*s));
    return out;
}
}  // namespace darnet
