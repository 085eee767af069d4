#include "darnet/engine.hpp"

#include <cmath>
#include <cstdlib>
#include <string>

#include "darnet/load_index.hpp"

namespace darnet
{
void SimConfig::validate() const
{
    if (!(horizon > 0))
        throw InvalidParameter("horizon must be positive");
    if (!(sample_interval > 0))
        throw InvalidParameter("sample interval must be positive");
    if (!(burn_in >= 0 && burn_in < horizon))
        throw InvalidParameter("burn-in must lie in [0, horizon)");
    if (replicas < 1)
        throw InvalidParameter("replicas must be >= 1");
    if (event_cap < 1)
        throw InvalidParameter("event cap must be >= 1");
}

int default_threads()
{
    if (char const* env = std::getenv("DARNET_THREADS"))
    {
        int v = std::atoi(env);
        if (v > 0)
            return v;
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : int(hw);
}

namespace
{
std::vector<long> as_weights(SystemState const& s)
{
    return {s.loads().begin(), s.loads().end()};
}

/*
 * Shared event loop. \c arrive applies one event of the arrival stream
 * (total rate \c arrival_rate) to a uniformly chosen link.
 */
template<class Arrive>
Trajectory simulate(SystemState state, double arrival_rate,
                    SimConfig const& config, Rng& rng, Arrive&& arrive)
{
    config.validate();
    int const n = state.size();
    LoadIndex index(as_weights(state));

    Trajectory tr;
    tr.initial_load = state.total_load();
    double const horizon = config.horizon;
    double const burn = config.burn_in;
    double integral_f = 0, integral_g = 0;
    double t = 0;
    long next_sample = 0;

    auto profile = [&] {
        return BlockingProfile{state.full_count() / double(n),
                               state.reserved_count() / double(n)};
    };
    auto emit_until = [&](double limit) {
        for (;;)
        {
            double ts = double(next_sample) * config.sample_interval;
            if (ts >= limit || ts > horizon)
                break;
            auto p = profile();
            tr.samples.push_back({ts, p.f, p.g,
                                  double(state.total_load()) / n, tr.lost,
                                  tr.accepted});
            ++next_sample;
        }
    };

    for (;;)
    {
        double rate = arrival_rate + double(state.total_load());
        double t_next = t + rng.exponential(rate);
        emit_until(t_next);

        double lo = std::max(t, burn), hi = std::min(t_next, horizon);
        if (hi > lo)
        {
            auto p = profile();
            integral_f += p.f * (hi - lo);
            integral_g += p.g * (hi - lo);
        }
        if (t_next > burn && t <= horizon)
        {
            double f = profile().f;
            tr.max_f_after_burn_in = std::max(tr.max_f_after_burn_in, f);
            tr.min_f_after_burn_in = std::min(tr.min_f_after_burn_in, f);
        }
        if (t_next > horizon)
        {
            t = horizon;
            break;
        }
        if (tr.events >= config.event_cap)
        {
            tr.truncated = true;
            t = t_next;
            break;
        }

        t = t_next;
        ++tr.events;
        if (rng.uniform() * rate < arrival_rate)
        {
            ++tr.arrival_events;
            int link = static_cast<int>(rng.index(n));
            ArrivalOutcome out = arrive(state, link);
            if (out.accepted())
            {
                ++tr.accepted;
                index.update(out.to, +1);
            }
            else if (out.kind == ArrivalOutcome::Kind::lost_reroute
                     || out.kind == ArrivalOutcome::Kind::no_op_full)
            {
                ++tr.lost;
            }
        }
        else
        {
            auto unit = static_cast<long>(rng.index(state.total_load()));
            auto link = static_cast<int>(index.find(unit));
            state.remove(link);
            index.update(link, -1);
            ++tr.departures;
        }
    }

    tr.end_time = t;
    double span = t - burn;
    if (span > 0)
    {
        tr.mean_f = integral_f / span;
        tr.mean_g = integral_g / span;
    }
    else
    {
        tr.mean_f = profile().f;
        tr.mean_g = profile().g;
    }
    tr.digest = state.digest();
    tr.final_state = std::move(state);
    return tr;
}

void check_dimensions(SystemState const& s, int links, int capacity, int sigma)
{
    if (s.size() != links || s.capacity() != capacity || s.sigma() != sigma)
        throw InvalidParameter("initial state does not match parameters");
}
}  // namespace

Trajectory run(ModelParams const& params, SystemState init,
               SimConfig const& config)
{
    params.validate();
    check_dimensions(init, params.links, params.capacity, params.sigma);
    Rng rng(config.seed);
    double arrival_rate = 2 * params.lambda() * params.links;
    return simulate(std::move(init), arrival_rate, config, rng,
                    [&](SystemState& s, int link) {
                        return handle_arrival(params, s, link, rng);
                    });
}

Trajectory run_product(ProductLink const& link, int links, SystemState init,
                       SimConfig const& config)
{
    auto const& et = link.et;
    et.validate();
    if (links < 1)
        throw InvalidParameter("product system needs at least one link");
    check_dimensions(init, links, et.capacity, et.sigma);
    Rng rng(config.seed);
    double top = std::max(et.alpha, et.beta) * et.capacity;
    return simulate(
        std::move(init), top * links, config, rng,
        [&](SystemState& s, int j) {
            using Kind = ArrivalOutcome::Kind;
            ArrivalOutcome out;
            out.from = j;
            double u = rng.uniform();
            if (s.full(j))
            {
                out.kind = Kind::no_op_full;
            }
            else if (u * top < et.up_rate(s.load(j)))
            {
                s.add(j);
                out.kind = Kind::accepted_direct;
                out.to = j;
            }
            return out;
        });
}

HittingResult hitting_time(ModelParams const& params, SystemState init,
                           HittingPredicate const& predicate, double cap,
                           std::uint64_t seed, long event_cap)
{
    params.validate();
    check_dimensions(init, params.links, params.capacity, params.sigma);
    if (!(cap > 0))
        throw InvalidParameter("hitting_time: cap must be positive");

    SystemState state = std::move(init);
    HittingResult res;
    if (predicate.holds(blocking_profile(state, params)))
        return res.hit = true, res;

    Rng rng(seed);
    int const n = params.links;
    LoadIndex index(as_weights(state));
    double const arrival_rate = 2 * params.lambda() * n;
    double t = 0;
    for (;;)
    {
        double rate = arrival_rate + double(state.total_load());
        t += rng.exponential(rate);
        if (t > cap)
        {
            res.time = cap;
            return res;
        }
        if (res.events >= event_cap)
            throw EventCapExceeded("hitting_time: event cap exceeded at t="
                                   + std::to_string(t));
        ++res.events;
        if (rng.uniform() * rate < arrival_rate)
        {
            auto out = handle_arrival(params, state,
                                      static_cast<int>(rng.index(n)), rng);
            if (out.accepted())
                index.update(out.to, +1);
        }
        else
        {
            auto unit = static_cast<long>(rng.index(state.total_load()));
            auto link = static_cast<int>(index.find(unit));
            state.remove(link);
            index.update(link, -1);
        }
        if (predicate.holds(blocking_profile(state, params)))
        {
            res.hit = true;
            res.time = t;
            return res;
        }
    }
}
}  // namespace darnet
