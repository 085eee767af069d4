#include <doctest.h>

#include <cmath>
#include <random>

#include "darnet/analytics.hpp"
#include "darnet/engine.hpp"
#include "darnet/errors.hpp"
#include "darnet/model.hpp"
#include "darnet/stats.hpp"
#include "oracles.hpp"

using namespace darnet;

namespace
{
SystemState random_state(std::mt19937_64& gen, ModelParams const& p)
{
    std::uniform_real_distribution<double> u(0, 1);
    double p_full = u(gen);
    std::vector<int> loads(p.links);
    for (auto& l : loads)
        l = u(gen) < p_full
                ? p.capacity
                : std::uniform_int_distribution<int>(0, p.capacity)(gen);
    return SystemState(loads, p.capacity, p.sigma);
}

//! Seed whose first draw matches \c want under \c probe.
template<class Probe>
std::uint64_t find_seed(Probe probe)
{
    for (std::uint64_t s = 1;; ++s)
    {
        Rng r(s);
        if (probe(r))
            return s;
    }
}
}  // namespace

TEST_SUITE("model")
{
TEST_CASE("params")
{
    CHECK(ModelParams{0.9, 10, 5, 1, 0}.variant() == ModelParams::Variant::base);
    CHECK(ModelParams{0.9, 10, 5, 3, 0}.variant()
          == ModelParams::Variant::retries);
    CHECK(ModelParams{0.9, 10, 5, 1, 2}.variant() == ModelParams::Variant::trunk);
    CHECK_THROWS_AS(ModelParams({0.9, 10, 5, 2, 2}).validate(), InvalidParameter);
    CHECK_THROWS_AS(ModelParams({0.9, 10, 1, 1, 0}).validate(), InvalidParameter);
    CHECK_THROWS_AS(ModelParams({0, 10, 5, 1, 0}).validate(), InvalidParameter);
    CHECK_THROWS_AS(ModelParams({0.9, 3, 5, 1, 4}).validate(), InvalidParameter);
    CHECK(ModelParams{0.9, 10, 5}.lambda() == doctest::Approx(9));
}

TEST_CASE("system state counts")
{
    SystemState s({4, 3, 2, 0}, 4, 1);
    CHECK(s.full_count() == 1);
    CHECK(s.reserved_count() == 2);
    CHECK(s.total_load() == 9);
    s.add(1);
    s.remove(0);
    CHECK(s.full_count() == 1);
    CHECK(s.reserved_count() == 2);
    CHECK(s.total_load() == 9);
    CHECK(s.counts_consistent());
    CHECK_THROWS(SystemState({5}, 4));
}

TEST_CASE("blocking profile")
{
    ModelParams p{0.8, 4, 4, 1, 1};
    auto full = initial_state({InitialSpec::Kind::full}, p);
    auto b = blocking_profile(full, p);
    CHECK(b.f == 1);
    CHECK(b.g == 1);
    b = blocking_profile(initial_state({InitialSpec::Kind::empty}, p), p);
    CHECK(b.f == 0);
    CHECK(b.g == 0);
    b = blocking_profile(SystemState({4, 3, 2, 0}, 4, 1), p);
    CHECK(b.f == 0.25);
    CHECK(b.g == 0.5);

    ModelParams q{0.8, 4, 4};
    b = blocking_profile(SystemState({4, 3, 2, 0}, 4), q);
    CHECK(b.g == b.f);
}

TEST_CASE("generator rate")
{
    ModelParams p{0.8, 10, 4};
    CHECK(generator_rate(p, SystemState({0, 0, 0, 0}, 10))
          == doctest::Approx(8));
    CHECK(generator_rate(p, SystemState({10, 10, 0, 0}, 10))
          == doctest::Approx(12));
    for (int k = 0; k <= 4; ++k)
    {
        std::vector<int> a(4, 0), b(4, 0);
        for (int i = 0; i < k; ++i)
            a[i] = 10;
        for (int i = 0; i < 4 - k; ++i)
            b[i] = 10;
        CHECK(generator_rate(p, SystemState(a, 10))
              == doctest::Approx(generator_rate(p, SystemState(b, 10))));
    }
    CHECK_THROWS_AS(generator_rate({0.8, 10, 4, 2, 0}, SystemState({0, 0, 0, 0}, 10)),
                    WrongVariant);
    CHECK_THROWS_AS(generator_rate({0.8, 10, 4, 1, 1},
                                   SystemState({0, 0, 0, 0}, 10, 1)),
                    WrongVariant);
}

TEST_CASE("acceptance rates match enumerated event semantics")
{
    std::mt19937_64 gen(11);
    std::vector<ModelParams> cases{
        {0.9, 6, 12, 1, 0}, {0.9, 6, 12, 3, 0}, {0.9, 6, 12, 1, 2}};
    for (auto const& p : cases)
    {
        for (int trial = 0; trial < 30; ++trial)
        {
            auto s = random_state(gen, p);
            auto got = acceptance_rate_vector(p, s);
            auto want = oracle::enumerated_rates(p, s);
            for (int l = 0; l < p.links; ++l)
                CHECK(got[l] == doctest::Approx(want[l]).epsilon(1e-12));
            if (p.variant() == ModelParams::Variant::base)
            {
                for (int l = 0; l < p.links; ++l)
                    if (!s.full(l))
                        CHECK(want[l] == doctest::Approx(generator_rate(p, s))
                                             .epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("arrival procedure")
{
    ModelParams p{0.9, 4, 5};

    SUBCASE("coin tails at an open link")
    {
        auto seed = find_seed([](Rng& r) { return !r.coin(); });
        SystemState s({1, 2, 3, 4, 0}, 4);
        Rng rng(seed);
        auto out = handle_arrival(p, s, 0, rng);
        CHECK(out.kind == ArrivalOutcome::Kind::rejected_coin);
        CHECK(s == SystemState({1, 2, 3, 4, 0}, 4));
    }
    SUBCASE("coin heads at an open link")
    {
        auto seed = find_seed([](Rng& r) { return r.coin(); });
        SystemState s({1, 2, 3, 4, 0}, 4);
        Rng rng(seed);
        auto out = handle_arrival(p, s, 0, rng);
        CHECK(out.kind == ArrivalOutcome::Kind::accepted_direct);
        CHECK(s.load(0) == 2);
    }
    SUBCASE("full link reroutes onto i of an open pair")
    {
        SystemState s({4, 0, 0, 4, 0}, 4);
        auto seed = find_seed([&](Rng& r) {
            int i = int(r.index(5)), j = int(r.index(5));
            return !s.full(i) && !s.full(j);
        });
        Rng probe(seed);
        int i = int(probe.index(5));
        Rng rng(seed);
        auto out = handle_arrival(p, s, 0, rng);
        CHECK(out.kind == ArrivalOutcome::Kind::rerouted);
        CHECK(out.from == 0);
        CHECK(out.to == i);
        CHECK(s.load(i) == 1);
        CHECK(out.tries == 1);
    }
    SUBCASE("trunk pair touching the reserve level is refused")
    {
        ModelParams t{0.9, 4, 2, 1, 1};
        for (std::uint64_t seed = 1; seed < 50; ++seed)
        {
            SystemState s({4, 3}, 4, 1);
            Rng rng(seed);
            auto out = handle_arrival(t, s, 0, rng);
            CHECK(out.kind == ArrivalOutcome::Kind::lost_reroute);
            CHECK(s == SystemState({4, 3}, 4, 1));
        }
    }
    SUBCASE("retries stop at the first admissible pair")
    {
        ModelParams r{0.9, 4, 5, 4, 0};
        for (std::uint64_t seed = 1; seed < 200; ++seed)
        {
            SystemState s({4, 4, 4, 0, 1}, 4);
            Rng probe(seed);
            int used = 0, land = -1;
            for (int k = 0; k < 4 && land < 0; ++k)
            {
                int i = int(probe.index(5)), j = int(probe.index(5));
                ++used;
                if (!s.full(i) && !s.full(j))
                    land = i;
            }
            Rng rng(seed);
            auto out = handle_arrival(r, s, 1, rng);
            CHECK(out.tries == used);
            if (land >= 0)
            {
                CHECK(out.to == land);
                CHECK(out.kind == ArrivalOutcome::Kind::rerouted);
            }
            else
            {
                CHECK(out.kind == ArrivalOutcome::Kind::lost_reroute);
            }
            CHECK(s.counts_consistent());
        }
    }
}

TEST_CASE("discrete step")
{
    ModelParams p{0.8, 10, 3};
    SUBCASE("occupied slot empties")
    {
        auto seed = find_seed([](Rng& r) {
            bool b = r.uniform() < 1 / 2.6;
            int link = int(r.index(3));
            int slot = int(r.index(10));
            return b && link == 0 && slot < 5;
        });
        SystemState s({5, 0, 0}, 10);
        Rng rng(seed);
        discrete_step(p, s, rng);
        CHECK(s.load(0) == 4);
    }
    SUBCASE("full link ignores the call")
    {
        auto seed = find_seed([](Rng& r) {
            bool b = r.uniform() < 1 / 2.6;
            bool b2 = r.uniform() < 0.5 * (1 + 2 * (1.0 / 3) * (2.0 / 3));
            return !b && b2 && r.index(3) == 0;
        });
        SystemState s({10, 0, 0}, 10);
        Rng rng(seed);
        discrete_step(p, s, rng);
        CHECK(s == SystemState({10, 0, 0}, 10));
    }
    SUBCASE("no call when B' fails")
    {
        auto seed = find_seed([](Rng& r) {
            bool b = r.uniform() < 1 / 2.6;
            bool b2 = r.uniform() < 0.5;
            return !b && !b2;
        });
        SystemState s({3, 0, 0}, 10);
        Rng rng(seed);
        discrete_step(p, s, rng);
        CHECK(s == SystemState({3, 0, 0}, 10));
    }
    auto with_retries = [] {
        ModelParams q{0.8, 10, 3, 2, 0};
        SystemState s({0, 0, 0}, 10);
        Rng r(1);
        discrete_step(q, s, r);
    };
    CHECK_THROWS_AS(with_retries(), WrongVariant);
}

TEST_CASE("discrete chain matches the event-driven chain")
{
    ModelParams p{0.8, 10, 50};
    double const horizon = 200, burn = 20;
    double const rate = (2 * p.alpha + 1) * p.capacity * p.links;
    std::vector<double> disc, cont;
    for (std::uint64_t seed = 1; seed <= 12; ++seed)
    {
        Rng rng(1000 + seed);
        SystemState s = initial_state({InitialSpec::Kind::empty}, p);
        double t = 0, acc = 0;
        while (true)
        {
            double dt = rng.exponential(rate);
            double lo = std::max(t, burn), hi = std::min(t + dt, horizon);
            if (hi > lo)
                acc += (hi - lo) * s.full_count() / double(p.links);
            t += dt;
            if (t > horizon)
                break;
            discrete_step(p, s, rng);
        }
        disc.push_back(acc / (horizon - burn));

        SimConfig c;
        c.horizon = horizon;
        c.burn_in = burn;
        c.sample_interval = horizon;
        c.seed = seed;
        cont.push_back(run(p, initial_state({InitialSpec::Kind::empty}, p), c)
                           .mean_f);
    }
    auto a = summarize(disc), b = summarize(cont);
    CHECK(a.ci_low <= b.ci_high);
    CHECK(b.ci_low <= a.ci_high);
}

TEST_CASE("initial states")
{
    ModelParams p{0.8, 10, 3};
    CHECK(initial_state({InitialSpec::Kind::empty}, p)
          == SystemState({0, 0, 0}, 10));
    ModelParams q{0.8, 5, 2};
    CHECK(initial_state({InitialSpec::Kind::full}, q) == SystemState({5, 5}, 5));
    ModelParams r{0.8, 10, 4};
    CHECK(initial_state({InitialSpec::Kind::f_blocking, 0.25}, r)
          == SystemState({10, 8, 8, 8}, 10));
    ModelParams t{0.95, 10, 4, 1, 3};
    CHECK(default_fill(t) == 6);
    CHECK_THROWS_AS(initial_state({InitialSpec::Kind::f_blocking, 1.5}, r),
                    InvalidParameter);
}

TEST_CASE("rng")
{
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i)
        CHECK(a.bits() == b.bits());
    Rng c(3);
    for (int i = 0; i < 10000; ++i)
    {
        double u = c.uniform();
        CHECK(u >= 0);
        CHECK(u < 1);
        CHECK(c.index(7) < 7);
    }
    CHECK(Rng::stream(5, 0).bits() != Rng::stream(5, 1).bits());
}
}
