#include "darnet/model.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#include "darnet/analytics.hpp"
#include "darnet/errors.hpp"

namespace darnet
{
void ModelParams::validate() const
{
    if (!(alpha > 0))
        throw InvalidParameter("alpha must be positive");
    if (capacity < 1 || capacity < sigma)
        throw InvalidParameter("capacity must be >= max(sigma, 1)");
    if (links < 2)
        throw InvalidParameter("need at least two links");
    if (rho < 1)
        throw InvalidParameter("rho must be >= 1");
    if (sigma < 0)
        throw InvalidParameter("sigma must be >= 0");
    if (rho > 1 && sigma > 0)
        throw InvalidParameter("retries and trunk reservation are exclusive");
}

ModelParams::Variant ModelParams::variant() const
{
    if (sigma > 0)
        return Variant::trunk;
    return rho > 1 ? Variant::retries : Variant::base;
}

char const* to_string(ModelParams::Variant v)
{
    switch (v)
    {
        case ModelParams::Variant::base:
            return "base";
        case ModelParams::Variant::retries:
            return "retries";
        case ModelParams::Variant::trunk:
            return "trunk";
    }
    return "?";
}

char const* to_string(ArrivalOutcome::Kind k)
{
    using K = ArrivalOutcome::Kind;
    switch (k)
    {
        case K::accepted_direct:
            return "accepted-direct";
        case K::rejected_coin:
            return "rejected-coin";
        case K::rerouted:
            return "rerouted";
        case K::lost_reroute:
            return "lost-reroute";
        case K::no_op_full:
            return "no-op-full";
    }
    return "?";
}

//---------------------------------------------------------------------------//

SystemState::SystemState(std::vector<int> loads, int capacity, int sigma)
    : loads_(std::move(loads)), capacity_(capacity), sigma_(sigma)
{
    if (capacity < 1 || sigma < 0 || sigma > capacity)
        throw InvalidParameter("state: need 0 <= sigma <= K, K >= 1");
    for (int l : loads_)
    {
        if (l < 0 || l > capacity_)
            throw InvalidParameter("state: load outside [0, K]");
        account(l, +1);
    }
}

void SystemState::account(int load, int sign)
{
    full_count_ += sign * (load == capacity_);
    reserved_count_ += sign * (load >= capacity_ - sigma_);
    total_ += sign * load;
}

void SystemState::add(int link)
{
    assert(loads_[link] < capacity_);
    account(loads_[link], -1);
    account(++loads_[link], +1);
}

void SystemState::remove(int link)
{
    assert(loads_[link] > 0);
    account(loads_[link], -1);
    account(--loads_[link], +1);
}

bool SystemState::counts_consistent() const
{
    SystemState fresh(loads_, capacity_, sigma_);
    return fresh.full_count_ == full_count_
           && fresh.reserved_count_ == reserved_count_ && fresh.total_ == total_;
}

std::uint64_t SystemState::digest() const
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (int l : loads_)
    {
        for (int b = 0; b < 4; ++b)
        {
            h ^= static_cast<std::uint64_t>((l >> (8 * b)) & 0xff);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

//---------------------------------------------------------------------------//

BlockingProfile blocking_profile(SystemState const& state,
                                 ModelParams const& params)
{
    double n = params.links;
    BlockingProfile p;
    p.f = state.full_count() / n;
    p.g = params.sigma == 0 ? p.f : state.reserved_count() / n;
    return p;
}

double generator_rate(ModelParams const& params, SystemState const& state)
{
    if (params.variant() != ModelParams::Variant::base)
        throw WrongVariant("generator_rate is defined for the base model only");
    double f = blocking_profile(state, params).f;
    return params.lambda() * (1 + 2 * f * (1 - f));
}

std::vector<double> acceptance_rate_vector(ModelParams const& params,
                                           SystemState const& state)
{
    auto [f, g] = blocking_profile(state, params);
    double lam = params.lambda();
    double open_rate = params.sigma == 0
                           ? lam * (1 + analytics::reroute_rate(params.rho, f))
                           : lam * (1 + 2 * f * (1 - g));
    std::vector<double> rates(state.size());
    for (int j = 0; j < state.size(); ++j)
    {
        if (state.full(j))
            rates[j] = 0;
        else if (params.sigma > 0 && state.reserved(j))
            rates[j] = lam;
        else
            rates[j] = open_rate;
    }
    return rates;
}

bool reroute_admissible(ModelParams const& params, SystemState const& state,
                        int i, int j)
{
    if (params.sigma > 0)
        return !state.reserved(i) && !state.reserved(j);
    return !state.full(i) && !state.full(j);
}

ArrivalOutcome handle_arrival(ModelParams const& params, SystemState& state,
                              int link, Rng& rng)
{
    using Kind = ArrivalOutcome::Kind;
    ArrivalOutcome out;
    out.from = link;
    if (!state.full(link))
    {
        if (rng.coin())
        {
            state.add(link);
            out.kind = Kind::accepted_direct;
            out.to = link;
        }
        else
        {
            out.kind = Kind::rejected_coin;
        }
        return out;
    }

    int const n = state.size();
    int const tries = params.sigma > 0 ? 1 : params.rho;
    out.kind = Kind::lost_reroute;
    for (int r = 0; r < tries; ++r)
    {
        int i = static_cast<int>(rng.index(n));
        int j = static_cast<int>(rng.index(n));
        out.tries = r + 1;
        if (reroute_admissible(params, state, i, j))
        {
            state.add(i);
            out.kind = Kind::rerouted;
            out.to = i;
            break;
        }
    }
    return out;
}

void discrete_step(ModelParams const& params, SystemState& state, Rng& rng)
{
    if (params.variant() != ModelParams::Variant::base)
        throw WrongVariant("discrete_step is defined for the base model only");
    int const n = state.size();
    if (rng.uniform() < 1 / (2 * params.alpha + 1))
    {
        int link = static_cast<int>(rng.index(n));
        int slot = static_cast<int>(rng.index(params.capacity));
        if (slot < state.load(link))
            state.remove(link);
        return;
    }
    double f = blocking_profile(state, params).f;
    if (rng.uniform() < 0.5 * (1 + 2 * f * (1 - f)))
    {
        int link = static_cast<int>(rng.index(n));
        if (!state.full(link))
            state.add(link);
    }
}

int default_fill(ModelParams const& params)
{
    int fill = static_cast<int>(std::floor(params.alpha * params.capacity));
    return std::clamp(fill, 0, std::max(0, params.capacity - params.sigma - 1));
}

SystemState initial_state(InitialSpec const& spec, ModelParams const& params)
{
    params.validate();
    int const n = params.links, K = params.capacity;
    std::vector<int> loads(n, 0);
    switch (spec.kind)
    {
        case InitialSpec::Kind::empty:
            break;
        case InitialSpec::Kind::full:
            std::fill(loads.begin(), loads.end(), K);
            break;
        case InitialSpec::Kind::f_blocking: {
            if (!(spec.f >= 0 && spec.f <= 1))
                throw InvalidParameter("initial_state: f must lie in [0,1]");
            int fill = spec.fill < 0 ? default_fill(params) : spec.fill;
            if (fill > K)
                throw InvalidParameter("initial_state: fill exceeds capacity");
            auto full = static_cast<int>(std::ceil(spec.f * n - 1e-9));
            for (int j = 0; j < n; ++j)
                loads[j] = j < full ? K : fill;
            break;
        }
    }
    return SystemState(std::move(loads), K, params.sigma);
}
}  // namespace darnet
