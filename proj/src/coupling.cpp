#include "darnet/coupling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "darnet/analytics.hpp"
#include "darnet/errors.hpp"
#include "darnet/stats.hpp"

namespace darnet::coupling
{
char const* to_string(Variant v)
{
    switch (v)
    {
        case Variant::base:
            return "base";
        case Variant::retries:
            return "retries";
        case Variant::refined_retries:
            return "refined-retries";
        case Variant::trunk:
            return "trunk";
    }
    return "?";
}

Variant variant_from_string(std::string const& name)
{
    for (auto v : {Variant::base, Variant::retries, Variant::refined_retries,
                   Variant::trunk})
    {
        if (name == to_string(v))
            return v;
    }
    throw InvalidParameter("unknown coupling variant '" + name + "'");
}

void check_variant(Variant v, ModelParams const& params)
{
    params.validate();
    bool ok = true;
    switch (v)
    {
        case Variant::base:
            ok = params.rho == 1 && params.sigma == 0;
            break;
        case Variant::retries:
        case Variant::refined_retries:
            ok = params.sigma == 0;
            break;
        case Variant::trunk:
            ok = params.rho == 1;
            break;
    }
    if (!ok)
        throw PreconditionViolated(std::string("coupling variant ")
                                   + to_string(v)
                                   + " does not match the model parameters");
}

namespace
{
constexpr Side other(Side s)
{
    return s == Side::x ? Side::y : Side::x;
}
}  // namespace

//---------------------------------------------------------------------------//
// CoupledPair
//---------------------------------------------------------------------------//

CoupledPair::CoupledPair(SystemState x, SystemState y)
    : x_(std::move(x)), y_(std::move(y))
{
    if (x_.size() != y_.size() || x_.capacity() != y_.capacity()
        || x_.sigma() != y_.sigma())
        throw InvalidParameter("coupled pair: dimension mismatch");
    std::vector<long> weights(x_.size());
    position_.assign(x_.size(), -1);
    for (int j = 0; j < x_.size(); ++j)
    {
        weights[j] = std::max(x_.load(j), y_.load(j));
        int diff = x_.load(j) - y_.load(j);
        distance_ += std::abs(diff);
        if (diff != 0)
        {
            position_[j] = static_cast<int>(mismatched_.size());
            mismatched_.push_back(j);
        }
    }
    max_index_ = LoadIndex(weights);
}

void CoupledPair::set_watch_level(int level)
{
    watch_level_ = level;
    above_x_ = above_y_ = 0;
    for (int j = 0; j < size(); ++j)
    {
        above_x_ += x_.load(j) > level;
        above_y_ += y_.load(j) > level;
    }
}

void CoupledPair::change(Side s, int link, int delta)
{
    auto& sys = s == Side::x ? x_ : y_;
    int old_load = sys.load(link);
    int old_max = std::max(x_.load(link), y_.load(link));
    int old_diff = x_.load(link) - y_.load(link);
    if (delta > 0)
        sys.add(link);
    else
        sys.remove(link);
    int new_max = std::max(x_.load(link), y_.load(link));
    int new_diff = x_.load(link) - y_.load(link);

    distance_ += std::abs(new_diff) - std::abs(old_diff);
    if (new_max != old_max)
        max_index_.update(link, new_max - old_max);
    if (old_diff == 0 && new_diff != 0)
    {
        position_[link] = static_cast<int>(mismatched_.size());
        mismatched_.push_back(link);
    }
    else if (old_diff != 0 && new_diff == 0)
    {
        int pos = position_[link];
        int last = mismatched_.back();
        mismatched_[pos] = last;
        position_[last] = pos;
        mismatched_.pop_back();
        position_[link] = -1;
    }
    if (watch_level_ >= 0)
    {
        int d = int(sys.load(link) > watch_level_) - int(old_load > watch_level_);
        (s == Side::x ? above_x_ : above_y_) += d;
    }
}

void CoupledPair::add(Side s, int link)
{
    change(s, link, +1);
}

void CoupledPair::remove(Side s, int link)
{
    change(s, link, -1);
}

int CoupledPair::departure_link(long unit) const
{
    return static_cast<int>(max_index_.find(unit));
}

long pair_distance(SystemState const& x, SystemState const& y)
{
    if (x.size() != y.size())
        throw InvalidParameter("pair_distance: dimension mismatch");
    long d = 0;
    for (int j = 0; j < x.size(); ++j)
        d += std::abs(x.load(j) - y.load(j));
    return d;
}

//---------------------------------------------------------------------------//
// Joint events
//---------------------------------------------------------------------------//

double coupled_rate(ModelParams const& params, CoupledPair const& pair)
{
    return 2 * params.lambda() * pair.size()
           + double(pair.departure_weight());
}

namespace
{
using Kind = ArrivalOutcome::Kind;

ArrivalOutcome make_outcome(int from, Kind kind, int to = -1, int tries = 0)
{
    ArrivalOutcome o;
    o.from = from;
    o.kind = kind;
    o.to = to;
    o.tries = tries;
    return o;
}

// Direct call at an open link: heads places it.
ArrivalOutcome direct(CoupledPair& pair, Side s, int k, bool heads)
{
    if (!heads)
        return make_outcome(k, Kind::rejected_coin);
    pair.add(s, k);
    return make_outcome(k, Kind::accepted_direct, k);
}

// Independent rerouting in one system, pairs drawn as needed.
ArrivalOutcome own_reroute(ModelParams const& params, CoupledPair& pair,
                           Side s, int k, int tries, Rng& rng)
{
    int const n = pair.size();
    auto out = make_outcome(k, Kind::lost_reroute);
    for (int r = 0; r < tries; ++r)
    {
        int i = static_cast<int>(rng.index(n));
        int j = static_cast<int>(rng.index(n));
        out.tries = r + 1;
        if (reroute_admissible(params, pair.get(s), i, j))
        {
            pair.add(s, i);
            out.kind = Kind::rerouted;
            out.to = i;
            break;
        }
    }
    return out;
}

// Rerouting over a pre-drawn list shared by both systems.
ArrivalOutcome shared_reroute(ModelParams const& params, CoupledPair& pair,
                              Side s, int k,
                              std::vector<std::pair<int, int>> const& pairs)
{
    auto out = make_outcome(k, Kind::lost_reroute);
    for (std::size_t r = 0; r < pairs.size(); ++r)
    {
        auto [i, j] = pairs[r];
        out.tries = static_cast<int>(r + 1);
        if (reroute_admissible(params, pair.get(s), i, j))
        {
            pair.add(s, i);
            out.kind = Kind::rerouted;
            out.to = i;
            break;
        }
    }
    return out;
}

void standard_arrival(ModelParams const& params, int tries, CoupledPair& pair,
                      int k, Rng& rng, CoupledEvent& ev)
{
    bool fx = pair.x().full(k), fy = pair.y().full(k);
    if (!fx && !fy)
    {
        bool heads = rng.coin();
        ev.x_out = direct(pair, Side::x, k, heads);
        ev.y_out = direct(pair, Side::y, k, heads);
        return;
    }
    if (fx != fy)
    {
        Side full_side = fx ? Side::x : Side::y;
        Side open_side = other(full_side);
        bool heads = rng.coin();
        auto open_out = direct(pair, open_side, k, heads);
        auto full_out = own_reroute(params, pair, full_side, k, tries, rng);
        (open_side == Side::x ? ev.x_out : ev.y_out) = open_out;
        (full_side == Side::x ? ev.x_out : ev.y_out) = full_out;
        return;
    }
    int const n = pair.size();
    std::vector<std::pair<int, int>> pairs(tries);
    for (auto& p : pairs)
    {
        p.first = static_cast<int>(rng.index(n));
        p.second = static_cast<int>(rng.index(n));
    }
    ev.x_out = shared_reroute(params, pair, Side::x, k, pairs);
    ev.y_out = shared_reroute(params, pair, Side::y, k, pairs);
}

/*
 * Mismatch-aware arrival at distance one. \c big has the extra call on the
 * mismatched link \c m and is full there; \c small is one below.
 */
void refined_arrival(ModelParams const& params, CoupledPair& pair, int k,
                     int m, Side big, Rng& rng, CoupledEvent& ev)
{
    Side small = other(big);
    int const n = pair.size();
    int const rho = params.rho;
    auto& big_out = big == Side::x ? ev.x_out : ev.y_out;
    auto& small_out = small == Side::x ? ev.x_out : ev.y_out;
    bool f_big = pair.get(big).full(k), f_small = pair.get(small).full(k);
    ev.refined = true;

    if (!f_big && !f_small)
    {
        bool heads = rng.coin();
        ev.x_out = direct(pair, Side::x, k, heads);
        ev.y_out = direct(pair, Side::y, k, heads);
        return;
    }
    if (f_small && !f_big)
        throw PreconditionViolated("refined coupling: full sets not nested");
    if (!f_small)
    {
        // k == m: the open system gets the coin, the full one reroutes alone
        bool heads = rng.coin();
        small_out = direct(pair, small, k, heads);
        big_out = own_reroute(params, pair, big, k, rho, rng);
        return;
    }

    // Full in both: search pairs against the small system.
    int i = -1, j = -1, tries = 0;
    bool found = false;
    while (tries < rho && !found)
    {
        i = static_cast<int>(rng.index(n));
        j = static_cast<int>(rng.index(n));
        ++tries;
        found = reroute_admissible(params, pair.get(small), i, j);
    }
    if (!found)
    {
        small_out = make_outcome(k, Kind::lost_reroute, -1, tries);
        big_out = make_outcome(k, Kind::lost_reroute, -1, tries);
        return;
    }
    double f_b = pair.get(big).full_count() / double(n);
    pair.add(small, i);
    small_out = make_outcome(k, Kind::rerouted, i, tries);
    if (i != m && j != m)
    {
        pair.add(big, i);
        big_out = make_outcome(k, Kind::rerouted, i, tries);
        return;
    }
    double busy = 1 - (1 - f_b) * (1 - f_b);
    double p_more = 1 - std::pow(busy, rho - tries);
    if (rng.uniform() < p_more)
    {
        int target = i;
        if (i == m)
        {
            do
            {
                target = static_cast<int>(rng.index(n));
            } while (pair.get(big).full(target));
        }
        pair.add(big, target);
        big_out = make_outcome(k, Kind::rerouted, target, rho);
    }
    else
    {
        big_out = make_outcome(k, Kind::lost_reroute, -1, rho);
    }
}
}  // namespace

CoupledEvent coupled_event(Variant variant, ModelParams const& params,
                           CoupledPair& pair, Rng& rng)
{
    CoupledEvent ev;
    ev.distance_before = pair.distance();
    int const n = pair.size();
    double arrival_rate = 2 * params.lambda() * n;
    double rate = arrival_rate + double(pair.departure_weight());

    if (rng.uniform() * rate < arrival_rate)
    {
        ev.type = CoupledEvent::Type::arrival;
        int k = static_cast<int>(rng.index(n));
        ev.link = k;
        int tries = (variant == Variant::retries
                     || variant == Variant::refined_retries)
                        ? params.rho
                        : 1;
        bool refined = false;
        if (variant == Variant::refined_retries && pair.distance() == 1)
        {
            int m = pair.mismatched().front();
            Side big = pair.x().load(m) > pair.y().load(m) ? Side::x
                                                             : Side::y;
            if (pair.get(big).full(m))
            {
                refined_arrival(params, pair, k, m, big, rng, ev);
                refined = true;
            }
        }
        if (!refined)
            standard_arrival(params, tries, pair, k, rng, ev);

        bool xr = ev.x_out.kind == Kind::rerouted;
        bool yr = ev.y_out.kind == Kind::rerouted;
        ev.divergent_reroute = (xr || yr)
                               && !(xr && yr && ev.x_out.to == ev.y_out.to);
    }
    else
    {
        ev.type = CoupledEvent::Type::departure;
        auto unit = static_cast<long>(
            rng.index(static_cast<std::size_t>(pair.departure_weight())));
        int link = pair.departure_link(unit);
        ev.link = link;
        int a = pair.x().load(link), b = pair.y().load(link);
        int top = std::max(a, b);
        if (rng.uniform() * top < std::min(a, b))
        {
            pair.remove(Side::x, link);
            pair.remove(Side::y, link);
            ev.departed = CoupledEvent::Departed::both;
        }
        else if (a > b)
        {
            pair.remove(Side::x, link);
            ev.departed = CoupledEvent::Departed::x_only;
        }
        else
        {
            pair.remove(Side::y, link);
            ev.departed = CoupledEvent::Departed::y_only;
        }
    }
    ev.distance_after = pair.distance();
    return ev;
}

HittingResult coalescence_time(Variant variant, ModelParams const& params,
                               SystemState x, SystemState y, double cap,
                               std::uint64_t seed, long event_cap)
{
    check_variant(variant, params);
    if (!(cap > 0))
        throw InvalidParameter("coalescence_time: cap must be positive");
    CoupledPair pair(std::move(x), std::move(y));
    if (pair.size() != params.links)
        throw InvalidParameter("coalescence_time: state size mismatch");
    HittingResult res;
    Rng rng(seed);
    double t = 0;
    while (!pair.coalesced())
    {
        t += rng.exponential(coupled_rate(params, pair));
        if (t > cap)
        {
            res.time = cap;
            return res;
        }
        if (res.events >= event_cap)
            throw EventCapExceeded("coalescence_time: event cap exceeded");
        ++res.events;
        coupled_event(variant, params, pair, rng);
    }
    res.hit = true;
    res.time = t;
    return res;
}

//---------------------------------------------------------------------------//
// Domination
//---------------------------------------------------------------------------//

void DominationBand::validate() const
{
    bool ok = true;
    switch (shape)
    {
        case Shape::sandwich:
            break;
        case Shape::between:
        case Shape::below:
            ok = f >= 0 && f <= 0.5;
            break;
        case Shape::above:
            ok = f >= 0.5 && f <= 1;
            break;
    }
    if (!ok)
        throw InvalidParameter("domination band: f outside the shape's range");
}

bool DominationBand::contains(double phi) const
{
    switch (shape)
    {
        case Shape::sandwich:
            return true;
        case Shape::between:
            return phi >= f && phi <= 1 - f;
        case Shape::below:
            return phi <= f;
        case Shape::above:
            return phi >= f;
    }
    return false;
}

DominationReport domination_run(ModelParams const& params,
                                DominationBand const& band, SystemState init,
                                SimConfig const& config)
{
    params.validate();
    if (params.variant() != ModelParams::Variant::base)
        throw WrongVariant("domination_run: base model only");
    band.validate();
    config.validate();
    if (init.size() != params.links || init.capacity() != params.capacity)
        throw InvalidParameter("domination_run: state size mismatch");

    int const n = params.links;
    int const K = params.capacity;
    double const alpha = params.alpha;
    auto beta_of = [&](double f) {
        return analytics::effective_intensity(alpha, 1, f);
    };

    // comparison systems and their intensities
    std::optional<SystemState> lower, upper;
    double beta_lower = 0, beta_upper = 0;
    using Shape = DominationBand::Shape;
    switch (band.shape)
    {
        case Shape::sandwich:
            lower = init;
            upper = init;
            beta_lower = alpha;
            beta_upper = 1.5 * alpha;
            break;
        case Shape::between:
            lower = init;
            beta_lower = beta_of(band.f);
            break;
        case Shape::below:
        case Shape::above:
            upper = init;
            beta_upper = beta_of(band.f);
            break;
    }
    SystemState x = std::move(init);
    auto phi = [n](SystemState const& s) { return s.full_count() / double(n); };
    if (!band.contains(phi(x)))
        throw InvalidParameter("domination_run: start lies outside the band");

    double const beta_top = std::max({1.5 * alpha, beta_lower, beta_upper});
    double const arrival_rate = beta_top * K * n;

    auto link_max = [&](int j) {
        int m = x.load(j);
        if (lower)
            m = std::max(m, lower->load(j));
        if (upper)
            m = std::max(m, upper->load(j));
        return m;
    };
    std::vector<long> w(n);
    for (int j = 0; j < n; ++j)
        w[j] = link_max(j);
    LoadIndex index(w);

    DominationReport rep;
    auto check_link = [&](int j, double t) {
        ++rep.checks;
        if (lower && lower->load(j) > x.load(j))
            rep.violations.push_back({t, rep.events, j, "lower<=x"});
        if (upper && x.load(j) > upper->load(j))
            rep.violations.push_back({t, rep.events, j, "x<=upper"});
    };
    for (int j = 0; j < n; ++j)
        check_link(j, 0);

    Rng rng(config.seed);
    double t = 0;
    long next_sample = 0;
    auto emit_until = [&](double limit) {
        for (;;)
        {
            double ts = double(next_sample) * config.sample_interval;
            if (ts >= limit || ts > config.horizon)
                break;
            rep.samples.push_back({ts, lower ? phi(*lower) : -1.0, phi(x),
                                   upper ? phi(*upper) : -1.0});
            ++next_sample;
        }
    };

    for (;;)
    {
        double rate = arrival_rate + double(index.total());
        double t_next = t + rng.exponential(rate);
        emit_until(t_next);
        if (t_next > config.horizon)
        {
            t = config.horizon;
            break;
        }
        if (rep.events >= config.event_cap)
            throw EventCapExceeded("domination_run: event cap exceeded");
        t = t_next;
        ++rep.events;

        int j = -1;
        if (rng.uniform() * rate < arrival_rate)
        {
            j = static_cast<int>(rng.index(n));
            double u = rng.uniform() * beta_top;
            double beta_x = beta_of(phi(x));
            if (lower && u < beta_lower && !lower->full(j))
                lower->add(j);
            if (upper && u < beta_upper && !upper->full(j))
                upper->add(j);
            if (u < beta_x && !x.full(j))
                x.add(j);
        }
        else
        {
            auto unit = static_cast<long>(rng.index(index.total()));
            j = static_cast<int>(index.find(unit));
            // the level-th call on link j departs in every system holding it
            int level = static_cast<int>(rng.index(link_max(j))) + 1;
            if (x.load(j) >= level)
                x.remove(j);
            if (lower && lower->load(j) >= level)
                lower->remove(j);
            if (upper && upper->load(j) >= level)
                upper->remove(j);
        }
        index.update(j, link_max(j) - w[j]);
        w[j] = link_max(j);

        if (!band.contains(phi(x)))
        {
            rep.exited = true;
            break;
        }
        check_link(j, t);
    }
    rep.exit_time = t;
    return rep;
}

//---------------------------------------------------------------------------//
// Contraction estimates
//---------------------------------------------------------------------------//

namespace
{
bool attempted_reroute(ArrivalOutcome const& o)
{
    return o.kind == Kind::rerouted || o.kind == Kind::lost_reroute;
}

// Side holding more calls on the given link.
Side heavier(CoupledPair const& pair, int link)
{
    return pair.x().load(link) >= pair.y().load(link) ? Side::x : Side::y;
}
}  // namespace

ContractionSample contraction_sample(ModelParams const& params,
                                     ContractionSpec const& spec,
                                     CoupledPair pair, Rng& rng)
{
    check_variant(spec.variant, params);
    if (pair.distance() != 1)
        throw InvalidParameter("contraction_sample: start pair must be adjacent");

    int const n = params.links;
    int const K = params.capacity;
    bool const low = spec.regime == Regime::low;
    int const xi_level = static_cast<int>(std::floor(spec.xi * K));
    double const band_lo = analytics::varphi_rho(params.rho) + 2 * spec.xi;
    double const band_hi = 2.0 / 3.0;
    if (low)
        pair.set_watch_level(xi_level);

    auto in_band = [&](Side s) {
        if (low)
            return pair.above_watch(s) <= 2 * spec.epsilon * n;
        double f = pair.get(s).full_count() / double(n);
        return f >= band_lo && f <= band_hi;
    };

    ContractionSample out;
    out.good = in_band(Side::x) && in_band(Side::y);
    out.max_distance = pair.distance();

    int const m0 = pair.mismatched().front();
    Side big = heavier(pair, m0);
    Side small = other(big);
    int m = m0;  // current mismatched link (high regime)
    bool phase_two = false;
    int attempts = 0;
    double t = 0;
    long events = 0;

    for (;;)
    {
        t += rng.exponential(coupled_rate(params, pair));
        if (t > spec.cap)
        {
            out.reason = "cap";
            t = spec.cap;
            break;
        }
        if (events++ >= spec.event_cap)
            throw EventCapExceeded("contraction_sample: event cap exceeded");
        auto ev = coupled_event(spec.variant, params, pair, rng);
        out.good = out.good && in_band(Side::x) && in_band(Side::y);
        auto const& bo = ev.out(big);
        auto const& so = ev.out(small);
        bool arrival = ev.type == CoupledEvent::Type::arrival;

        std::string stop;
        if (low)
        {
            // an arrival accepted in the small system only, off m0
            if (arrival && so.accepted() && so.to != m0 && bo.to != so.to)
                stop = "accepted-in-small-only";
            if (stop.empty() && !phase_two)
            {
                if (arrival && bo.from == m0 && attempted_reroute(bo))
                    ++attempts;
                if (attempts >= 10)
                    stop = "ten-reroute-attempts";
                for (auto const* o : {&bo, &so})
                {
                    if (!stop.empty() || !arrival || o->kind != Kind::rerouted)
                        continue;
                    int before = pair.get(big).load(o->to)
                                 - int(bo.kind == Kind::rerouted
                                       && bo.to == o->to);
                    if (before >= xi_level)
                        stop = "landed-on-busy-link";
                }
            }
            if (stop.empty())
            {
                if (!phase_two
                    && pair.x().load(m0) == pair.y().load(m0))
                    phase_two = true;
                for (int j : pair.mismatched())
                {
                    if (!phase_two && j == m0)
                        continue;
                    if (pair.x().full(j) || pair.y().full(j))
                    {
                        stop = "created-mismatch-full";
                        break;
                    }
                }
            }
            if (stop.empty() && pair.coalesced())
                stop = "coalesced";
        }
        else
        {
            if (!arrival && ev.link == m
                && ev.departed
                       == (big == Side::x ? CoupledEvent::Departed::x_only
                                          : CoupledEvent::Departed::y_only))
                stop = "extra-call-ended";
            else if (arrival && so.kind == Kind::rerouted && so.to == m
                     && !(bo.kind == Kind::rerouted && bo.to == m))
                stop = "reroute-matched";
            else if (arrival && bo.from == m && attempted_reroute(bo)
                     && !attempted_reroute(so))
                stop = "mismatched-link-rerouted";
            else if (arrival && so.kind == Kind::rerouted
                     && bo.kind != Kind::rerouted)
                stop = "reroute-in-small-only";
            else if (pair.coalesced())
                stop = "coalesced";
        }

        if (!stop.empty())
        {
            out.reason = stop;
            break;
        }
        out.max_distance = std::max(out.max_distance, pair.distance());
        if (!low && pair.distance() == 1)
        {
            m = pair.mismatched().front();
            big = heavier(pair, m);
            small = other(big);
        }
    }
    out.tau = t;
    out.distance_at_stop = pair.distance();
    return out;
}

ContractionEstimate estimate_contraction(ModelParams const& params,
                                         ContractionSpec const& spec)
{
    check_variant(spec.variant, params);
    if (spec.replicas < 1)
        throw InvalidParameter("estimate_contraction: replicas must be >= 1");
    if (!(spec.cap > 0) || spec.burn_in < 0)
        throw InvalidParameter("estimate_contraction: bad time limits");

    auto task = [&](std::uint64_t seed, std::size_t) {
        Rng rng(seed);
        InitialSpec init{spec.regime == Regime::low ? InitialSpec::Kind::empty
                                                    : InitialSpec::Kind::full};
        SystemState y = initial_state(init, params);
        if (spec.burn_in > 0)
        {
            SimConfig cfg;
            cfg.horizon = spec.burn_in;
            cfg.sample_interval = spec.burn_in;
            cfg.seed = rng.bits();
            cfg.event_cap = spec.event_cap;
            y = run(params, std::move(y), cfg).final_state;
        }
        std::vector<int> open, near_full;
        for (int j = 0; j < y.size(); ++j)
        {
            if (!y.full(j))
                open.push_back(j);
            if (y.load(j) == params.capacity - 1)
                near_full.push_back(j);
        }
        if (open.empty())
            throw std::runtime_error("burn-in ended with every link full");
        auto const& pool = spec.start == ContractionSpec::Start::near_full
                                   && !near_full.empty()
                               ? near_full
                               : open;
        int link = pool[rng.index(pool.size())];
        SystemState x = y;
        x.add(link);
        return contraction_sample(params, spec,
                                  CoupledPair(std::move(x), std::move(y)), rng);
    };
    auto samples = replicate(static_cast<std::size_t>(spec.replicas), spec.seed,
                             task, spec.threads);

    ContractionEstimate est;
    est.replicas = spec.replicas;
    std::vector<double> values, taus;
    int good = 0;
    for (auto const& s : samples)
    {
        values.push_back(s.good ? double(s.distance_at_stop) : 0.0);
        taus.push_back(s.tau);
        est.max_distance = std::max(est.max_distance, s.max_distance);
        good += s.good;
    }
    auto v = summarize(values);
    auto tq = summarize(taus);
    est.gamma0_hat = v.mean;
    est.ci_low = std::max(0.0, v.ci_low);
    est.ci_high = v.ci_high;
    est.tau_q50 = tq.q50;
    est.tau_q95 = tq.q95;
    est.good_fraction = double(good) / spec.replicas;
    est.samples = std::move(samples);
    return est;
}
}  // namespace darnet::coupling
