#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "darnet/analytics.hpp"
#include "darnet/coupling.hpp"
#include "darnet/engine.hpp"
#include "darnet/errors.hpp"
#include "darnet/io.hpp"
#include "darnet/stats.hpp"

using namespace darnet;
using io::json;

namespace
{
enum Exit
{
    ok = 0,
    failure = 1,
    invalid = 2,
    event_cap = 3
};

//---------------------------------------------------------------------------//
// Options resolved from flags, then the config file, then defaults
//---------------------------------------------------------------------------//

struct Binding
{
    std::string key;
    CLI::Option* option;
    std::function<void(json const&)> load;
    std::function<json()> save;
};

class Command
{
  public:
    Command(CLI::App& parent, std::string name, std::string help)
        : name_(std::move(name))
    {
        app_ = parent.add_subcommand(name_, std::move(help));
        app_->add_option("--out", out_, "Output file (default stdout)");
        app_->add_option("--config", config_,
                         "JSON config, or a previous output file");
    }

    template<class T>
    CLI::Option* add(std::string const& key, T& var, std::string help)
    {
        auto* opt = app_->add_option("--" + key, var, std::move(help))
                        ->capture_default_str();
        if constexpr (requires { var.push_back(var.front()); })
            opt->delimiter(',');
        bindings_.push_back({key, opt,
                             [&var, key](json const& j) {
                                 try
                                 {
                                     var = j.get<T>();
                                 }
                                 catch (json::exception const&)
                                 {
                                     throw InvalidParameter(
                                         "config value for '" + key
                                         + "' has the wrong type");
                                 }
                             },
                             [&var] { return json(var); }});
        return opt;
    }

    CLI::App* app() const { return app_; }
    std::string const& name() const { return name_; }

    //! Fill unset options from the config file and build the echo record.
    void resolve()
    {
        if (!config_.empty())
        {
            json file = io::load_config(config_);
            if (file.contains("command") && file["command"] != name_)
                throw InvalidParameter("config file is for command "
                                       + file["command"].dump());
            for (auto& b : bindings_)
            {
                if (b.option->count() == 0 && file.contains(b.key))
                    b.load(file[b.key]);
            }
        }
        resolved_ = json::object();
        resolved_["schema"] = io::schema_version;
        resolved_["command"] = name_;
        for (auto& b : bindings_)
            resolved_[b.key] = b.save();
    }

    json const& resolved() const { return resolved_; }

    std::ostream& out()
    {
        if (out_.empty())
            return std::cout;
        file_ = std::make_unique<std::ofstream>(out_, std::ios::binary);
        if (!*file_)
            throw InvalidParameter("cannot write '" + out_ + "'");
        return *file_;
    }

    std::function<int(Command&)> run;

  private:
    std::string name_;
    CLI::App* app_ = nullptr;
    std::string out_;
    std::string config_;
    std::vector<Binding> bindings_;
    json resolved_;
    std::unique_ptr<std::ofstream> file_;
};

//---------------------------------------------------------------------------//
// Shared parameter blocks
//---------------------------------------------------------------------------//

struct Model
{
    double alpha = 0.96;
    int K = 40;
    int n = 200;
    int rho = 1;
    int sigma = 0;

    void bind(Command& c, bool with_rho = true, bool with_sigma = true)
    {
        c.add("alpha", alpha, "Traffic intensity per circuit");
        c.add("K", K, "Circuits per link");
        c.add("n", n, "Number of links");
        if (with_rho)
            c.add("rho", rho, "Rerouting tries");
        if (with_sigma)
            c.add("sigma", sigma, "Reserved circuits");
    }

    ModelParams params(int links = -1) const
    {
        ModelParams p{alpha, K, links < 0 ? n : links, rho, sigma};
        p.validate();
        return p;
    }
};

struct Run
{
    double horizon = 200;
    double burn_in = 20;
    int replicas = 10;
    std::uint64_t seed = 1;
    long event_cap = 1'000'000'000L;

    void bind(Command& c, bool with_burn_in = true, bool with_horizon = true)
    {
        if (with_horizon)
            c.add("horizon", horizon, "Simulated time");
        if (with_burn_in)
            c.add("burn-in", burn_in, "Time discarded before averaging");
        c.add("replicas", replicas, "Independent replicas");
        c.add("seed", seed, "Base seed; replica i uses seed + i");
        c.add("event-cap", event_cap, "Abort after this many events");
    }

    SimConfig config(std::uint64_t s) const
    {
        SimConfig c;
        c.horizon = horizon;
        c.sample_interval = horizon;
        c.burn_in = burn_in;
        c.seed = s;
        c.replicas = replicas;
        c.event_cap = event_cap;
        c.validate();
        return c;
    }
};

void check_format(std::string const& f)
{
    if (f != "csv" && f != "json")
        throw InvalidParameter("format must be csv or json");
}

InitialSpec::Kind start_kind(std::string const& s)
{
    if (s == "empty")
        return InitialSpec::Kind::empty;
    if (s == "full")
        return InitialSpec::Kind::full;
    throw InvalidParameter("start must be empty or full");
}

json summary_json(Summary const& s)
{
    return {{"count", s.count}, {"mean", s.mean},       {"sd", s.sd},
            {"se", s.se},       {"ci_low", s.ci_low},   {"ci_high", s.ci_high},
            {"min", s.min},     {"q05", s.q05},         {"q50", s.q50},
            {"q95", s.q95},     {"max", s.max}};
}

std::string hex(std::uint64_t v)
{
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(v));
    return buf;
}

struct RunSummary
{
    double mean_f = 0;
    bool truncated = false;
};

RunSummary run_summary(ModelParams const& p, InitialSpec::Kind kind,
                       Run const& run, std::uint64_t seed)
{
    auto tr = darnet::run(p, initial_state({kind}, p), run.config(seed));
    return {tr.mean_f, tr.truncated};
}

struct TwoStart
{
    Summary empty;
    Summary full;
    bool truncated = false;

    double gap() const { return full.mean - empty.mean; }
};

//! Time-averaged f over replicas from the empty and from the full start.
TwoStart two_start(ModelParams const& p, Run const& run)
{
    TwoStart out;
    for (auto kind : {InitialSpec::Kind::empty, InitialSpec::Kind::full})
    {
        auto rs = replicate(std::size_t(run.replicas), run.seed,
                            [&](std::uint64_t s, std::size_t) {
                                return run_summary(p, kind, run, s);
                            });
        std::vector<double> means;
        for (auto const& r : rs)
        {
            means.push_back(r.mean_f);
            out.truncated = out.truncated || r.truncated;
        }
        (kind == InitialSpec::Kind::empty ? out.empty : out.full)
            = summarize(means);
    }
    return out;
}

//---------------------------------------------------------------------------//
// Commands
//---------------------------------------------------------------------------//

void add_thresholds(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds)
{
    auto& c = *cmds.emplace_back(std::make_unique<Command>(
        app, "thresholds", "Critical intensities alpha_c(rho) and friends"));
    static int rho_max = 6;
    static std::string format = "csv";
    c.add("rho-max", rho_max, "Largest number of tries (<= 10)");
    c.add("format", format, "csv or json");
    c.run = [](Command& c) {
        check_format(format);
        auto t = analytics::phase_thresholds(rho_max);
        auto& os = c.out();
        if (format == "json")
        {
            json rows = json::array();
            for (std::size_t i = 0; i < t.rho.size(); ++i)
                rows.push_back({{"rho", t.rho[i]},
                                {"alpha_c", t.alpha_c[i]},
                                {"varphi", t.varphi[i]},
                                {"f_sp", t.f_sp[i]}});
            io::write_json(os, c.resolved(), rows);
            return ok;
        }
        io::CsvWriter csv(os, c.resolved());
        csv.header({"rho", "alpha_c", "varphi", "f_sp"});
        for (std::size_t i = 0; i < t.rho.size(); ++i)
            csv.row(t.rho[i], t.alpha_c[i], t.varphi[i], t.f_sp[i]);
        return ok;
    };
}

void add_fixed_points(CLI::App& app,
                      std::vector<std::unique_ptr<Command>>& cmds)
{
    auto& c = *cmds.emplace_back(std::make_unique<Command>(
        app, "fixed-points",
        "Roots of h_rho, and finite-K Erlang or trunk fixed points"));
    static double alpha = 0.96;
    static int rho = 1;
    static int K = 0;
    static int sigma = 0;
    static std::string format = "csv";
    c.add("alpha", alpha, "Traffic intensity per circuit");
    c.add("rho", rho, "Rerouting tries");
    c.add("K", K, "Capacity for the finite-K equations (0 skips them)");
    c.add("sigma", sigma, "Reserved circuits (finite K only)");
    c.add("format", format, "csv or json");
    c.run = [](Command& c) {
        check_format(format);
        struct Row
        {
            std::string source;
            double f, g, residual;
            bool stable, double_root;
        };
        std::vector<Row> rows;
        for (auto const& r : analytics::h_roots(alpha, rho).roots)
            rows.push_back({"h", r.value, r.value, r.residual, r.stable,
                            r.double_root});
        if (K > 0 && sigma == 0)
        {
            for (auto const& r : analytics::erlang_fixed_points(alpha, K).roots)
                rows.push_back({"erlang", r.value, r.value, r.residual,
                                r.stable, r.double_root});
        }
        else if (K > 0)
        {
            for (auto const& p :
                 analytics::trunk_self_consistency(alpha, sigma, K).points)
                rows.push_back({"trunk", p.f, p.g, p.residual, true, false});
        }
        auto& os = c.out();
        if (format == "json")
        {
            json out = json::array();
            for (auto const& r : rows)
                out.push_back({{"source", r.source},
                               {"f", r.f},
                               {"g", r.g},
                               {"residual", r.residual},
                               {"stable", r.stable},
                               {"double_root", r.double_root}});
            io::write_json(os, c.resolved(), out);
            return ok;
        }
        io::CsvWriter csv(os, c.resolved());
        csv.header({"source", "f", "g", "stable", "double_root", "residual"});
        for (auto const& r : rows)
            csv.row(r.source, r.f, r.g, r.stable, r.double_root, r.residual);
        return ok;
    };
}

void add_simulate(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds)
{
    auto& c = *cmds.emplace_back(std::make_unique<Command>(
        app, "simulate", "Trajectories of a DAR system"));
    static Model m;
    static Run r;
    static double sample_interval = 1;
    static std::string start = "empty";
    static double start_f = 0;
    static int fill = -1;
    static std::string init_state;
    static std::string save_state;
    static std::string format = "csv";
    r.replicas = 1;
    r.burn_in = 0;
    m.bind(c);
    r.bind(c);
    c.add("sample-interval", sample_interval, "Time between samples");
    c.add("start", start, "empty, full or blocking");
    c.add("start-f", start_f, "Full fraction of a blocking start");
    c.add("fill", fill, "Load of non-full links in a blocking start");
    c.add("init-state", init_state, "JSON array of initial loads");
    c.add("save-state", save_state,
          "Write replica 0's final loads to this JSON file");
    c.add("format", format, "csv or json");
    c.run = [](Command& c) {
        check_format(format);
        auto p = m.params();
        SimConfig cfg = r.config(r.seed);
        cfg.sample_interval = sample_interval;
        cfg.validate();

        SystemState init;
        if (!init_state.empty())
        {
            std::ifstream in(init_state);
            if (!in)
                throw InvalidParameter("cannot open '" + init_state + "'");
            json loads;
            try
            {
                in >> loads;
            }
            catch (json::exception const& e)
            {
                throw InvalidParameter(e.what());
            }
            init = io::state_from_json(loads, p.capacity, p.sigma);
        }
        else
        {
            InitialSpec spec;
            if (start == "blocking")
            {
                spec.kind = InitialSpec::Kind::f_blocking;
                spec.f = start_f;
                spec.fill = fill;
            }
            else
            {
                spec.kind = start_kind(start);
            }
            init = initial_state(spec, p);
        }

        auto trs = replicate(std::size_t(r.replicas), r.seed,
                             [&](std::uint64_t s, std::size_t) {
                                 SimConfig local = cfg;
                                 local.seed = s;
                                 return run(p, init, local);
                             });
        bool truncated = false;
        for (auto const& tr : trs)
            truncated = truncated || tr.truncated;

        if (!save_state.empty())
        {
            std::ofstream so(save_state, std::ios::binary);
            if (!so)
                throw InvalidParameter("cannot write '" + save_state + "'");
            so << io::state_to_json(trs.front().final_state).dump() << '\n';
        }

        auto& os = c.out();
        if (format == "json")
        {
            json reps = json::array();
            std::vector<double> mf, mg, lost;
            for (std::size_t i = 0; i < trs.size(); ++i)
            {
                auto const& tr = trs[i];
                reps.push_back({{"replica", i},
                                {"seed", replica_seed(r.seed, i)},
                                {"mean_f", tr.mean_f},
                                {"mean_g", tr.mean_g},
                                {"events", tr.events},
                                {"accepted", tr.accepted},
                                {"lost", tr.lost},
                                {"end_time", tr.end_time},
                                {"truncated", tr.truncated},
                                {"digest", hex(tr.digest)}});
                mf.push_back(tr.mean_f);
                mg.push_back(tr.mean_g);
                lost.push_back(double(tr.lost));
            }
            io::write_json(os, c.resolved(),
                           {{"replicas", reps},
                            {"pooled",
                             {{"mean_f", summary_json(summarize(mf))},
                              {"mean_g", summary_json(summarize(mg))},
                              {"lost", summary_json(summarize(lost))}}}});
        }
        else
        {
            io::CsvWriter csv(os, c.resolved());
            std::vector<std::string> head{"time", "f", "g", "mean_load",
                                          "lost", "accepted"};
            if (trs.size() > 1)
                head.insert(head.begin(), "replica");
            csv.header(head);
            for (std::size_t i = 0; i < trs.size(); ++i)
                io::write_trajectory_rows(csv, trs[i],
                                          trs.size() > 1 ? int(i) : -1);
        }
        if (truncated)
        {
            std::cerr << "darnet: event cap reached before the horizon\n";
            return event_cap;
        }
        return ok;
    };
}

void add_hysteresis(CLI::App& app,
                    std::vector<std::unique_ptr<Command>>& cmds)
{
    auto& c = *cmds.emplace_back(std::make_unique<Command>(
        app, "hysteresis", "Time-averaged blocking from empty and full starts"));
    static Model m;
    static Run r;
    static std::vector<double> alphas{0.5, 0.9, 0.96, 1.0, 1.3};
    static double gap = 0.10;
    static std::string format = "csv";
    m.bind(c);
    r.bind(c);
    c.add("alphas", alphas, "Comma-separated intensities in (0, 2]");
    c.add("gap", gap, "Start gap that counts as bistable");
    c.add("format", format, "csv or json");
    c.run = [](Command& c) {
        check_format(format);
        for (double a : alphas)
        {
            if (!(a > 0 && a <= 2))
                throw InvalidParameter("alphas must lie in (0, 2]");
        }
        struct Row
        {
            double alpha;
            TwoStart res;
        };
        std::vector<Row> rows;
        bool truncated = false;
        for (double a : alphas)
        {
            Model local = m;
            local.alpha = a;
            auto res = two_start(local.params(), r);
            truncated = truncated || res.truncated;
            rows.push_back({a, res});
        }
        auto& os = c.out();
        if (format == "json")
        {
            json out = json::array();
            for (auto const& row : rows)
                out.push_back({{"alpha", row.alpha},
                               {"empty", summary_json(row.res.empty)},
                               {"full", summary_json(row.res.full)},
                               {"gap", row.res.gap()},
                               {"bistable", row.res.gap() >= gap}});
            io::write_json(os, c.resolved(), out);
        }
        else
        {
            io::CsvWriter csv(os, c.resolved());
            csv.header({"alpha", "f_empty", "ci_low_empty", "ci_high_empty",
                        "f_full", "ci_low_full", "ci_high_full", "gap",
                        "bistable"});
            for (auto const& row : rows)
            {
                auto const& e = row.res.empty;
                auto const& f = row.res.full;
                csv.row(row.alpha, e.mean, e.ci_low, e.ci_high, f.mean,
                        f.ci_low, f.ci_high, row.res.gap(),
                        row.res.gap() >= gap);
            }
        }
        return truncated ? event_cap : ok;
    };
}

void add_hitting(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds)
{
    auto& c = *cmds.emplace_back(std::make_unique<Command>(
        app, "hitting", "First time the blocking fraction crosses a level"));
    static Model m;
    static Run r;
    static std::string start = "full";
    static std::string quantity = "f";
    static std::string direction = "at-most";
    static double threshold = 0.15;
    static std::string format = "csv";
    r.replicas = 20;
    m.bind(c);
    r.bind(c, false);
    c.add("start", start, "empty or full");
    c.add("quantity", quantity, "f or g");
    c.add("direction", direction, "at-most or at-least");
    c.add("threshold", threshold, "Level to cross");
    c.add("format", format, "csv or json");
    c.run = [](Command& c) {
        check_format(format);
        auto p = m.params();
        HittingPredicate pred;
        if (quantity == "f")
            pred.quantity = HittingPredicate::Quantity::f;
        else if (quantity == "g")
            pred.quantity = HittingPredicate::Quantity::g;
        else
            throw InvalidParameter("quantity must be f or g");
        if (direction == "at-most")
            pred.direction = HittingPredicate::Direction::at_most;
        else if (direction == "at-least")
            pred.direction = HittingPredicate::Direction::at_least;
        else
            throw InvalidParameter("direction must be at-most or at-least");
        pred.threshold = threshold;
        auto init = initial_state({start_kind(start)}, p);
        auto res = replicate(std::size_t(r.replicas), r.seed,
                             [&](std::uint64_t s, std::size_t) {
                                 return hitting_time(p, init, pred, r.horizon,
                                                     s, r.event_cap);
                             });
        auto& os = c.out();
        int hits = 0;
        for (auto const& h : res)
            hits += h.hit;
        if (format == "json")
        {
            json reps = json::array();
            for (std::size_t i = 0; i < res.size(); ++i)
                reps.push_back({{"replica", i},
                                {"seed", replica_seed(r.seed, i)},
                                {"hit", res[i].hit},
                                {"time", res[i].time},
                                {"events", res[i].events}});
            io::write_json(os, c.resolved(),
                           {{"replicas", reps},
                            {"hit_fraction", double(hits) / res.size()}});
            return ok;
        }
        io::CsvWriter csv(os, c.resolved());
        csv.header({"replica", "seed", "hit", "time", "events"});
        for (std::size_t i = 0; i < res.size(); ++i)
            csv.row(i, std::to_string(replica_seed(r.seed, i)), res[i].hit,
                    res[i].time, res[i].events);
        return ok;
    };
}

void add_coalesce(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds)
{
    auto& c = *cmds.emplace_back(std::make_unique<Command>(
        app, "coalesce", "Coalescence times of coupled pairs"));
    static Model m;
    static Run r;
    static std::string variant = "base";
    static std::vector<int> ns;
    static std::string x_start = "full";
    static std::string y_start = "empty";
    static std::string format = "csv";
    m.alpha = 0.5;
    m.K = 20;
    r.horizon = 10000;
    r.replicas = 20;
    m.bind(c);
    r.bind(c, false);
    c.add("variant", variant, "base, retries, refined-retries or trunk");
    c.add("ns", ns, "Comma-separated link counts (default: --n)");
    c.add("x-start", x_start, "empty or full");
    c.add("y-start", y_start, "empty or full");
    c.add("format", format, "csv or json");
    c.run = [](Command& c) {
        check_format(format);
        auto v = coupling::variant_from_string(variant);
        std::vector<int> sizes = ns.empty() ? std::vector<int>{m.n} : ns;
        struct Row
        {
            int n;
            int hits;
            Summary times;
            std::vector<HittingResult> reps;
        };
        std::vector<Row> rows;
        for (int n : sizes)
        {
            auto p = m.params(n);
            coupling::check_variant(v, p);
            auto x = initial_state({start_kind(x_start)}, p);
            auto y = initial_state({start_kind(y_start)}, p);
            auto res = replicate(std::size_t(r.replicas), r.seed,
                                 [&](std::uint64_t s, std::size_t) {
                                     return coupling::coalescence_time(
                                         v, p, x, y, r.horizon, s,
                                         r.event_cap);
                                 });
            std::vector<double> t;
            int hits = 0;
            for (auto const& h : res)
            {
                t.push_back(h.time);
                hits += h.hit;
            }
            rows.push_back({n, hits, summarize(t), std::move(res)});
        }
        auto& os = c.out();
        if (format == "json")
        {
            json out = json::array();
            for (auto const& row : rows)
            {
                json times = json::array();
                for (auto const& h : row.reps)
                    times.push_back(h.time);
                out.push_back({{"n", row.n},
                               {"hits", row.hits},
                               {"times", times},
                               {"summary", summary_json(row.times)}});
            }
            io::write_json(os, c.resolved(), out);
            return ok;
        }
        io::CsvWriter csv(os, c.resolved());
        csv.header({"n", "replicas", "hits", "median", "q05", "q95", "mean"});
        for (auto const& row : rows)
            csv.row(row.n, row.times.count, row.hits, row.times.q50,
                    row.times.q05, row.times.q95, row.times.mean);
        return ok;
    };
}

void add_gamma(CLI::App& app, std::vector<std::unique_ptr<Command>>& cmds)
{
    auto& c = *cmds.emplace_back(std::make_unique<Command>(
        app, "gamma", "Stopping-time contraction estimate"));
    static Model m;
    static Run r;
    static std::string variant = "base";
    static std::string regime = "low";
    static double xi = -1;
    static double epsilon = 1e-3;
    static std::string start = "uniform";
    static double cap = 1000;
    static double t = -1;
    static std::string format = "json";
    m.alpha = 0.5;
    m.K = 200;
    m.n = 500;
    r.burn_in = 10;
    r.replicas = 100;
    m.bind(c);
    r.bind(c, true, false);
    c.add("variant", variant, "base, retries, refined-retries or trunk");
    c.add("regime", regime, "low or high");
    c.add("xi", xi, "Band parameter (default 0.9 low, 0.02 high)");
    c.add("epsilon", epsilon, "Low regime: bad-link fraction bound");
    c.add("start", start, "uniform or near-full extra call");
    c.add("cap", cap, "Time limit per replica");
    c.add("t", t, "Also report the mixing bound at this time");
    c.add("format", format, "csv or json");
    c.run = [](Command& c) {
        check_format(format);
        auto p = m.params();
        coupling::ContractionSpec spec;
        spec.variant = coupling::variant_from_string(variant);
        if (regime == "low")
            spec.regime = coupling::Regime::low;
        else if (regime == "high")
            spec.regime = coupling::Regime::high;
        else
            throw InvalidParameter("regime must be low or high");
        spec.xi = xi >= 0 ? xi : (spec.regime == coupling::Regime::low ? 0.9
                                                                       : 0.02);
        spec.epsilon = epsilon;
        if (start == "uniform")
            spec.start = coupling::ContractionSpec::Start::uniform;
        else if (start == "near-full")
            spec.start = coupling::ContractionSpec::Start::near_full;
        else
            throw InvalidParameter("start must be uniform or near-full");
        spec.burn_in = r.burn_in;
        spec.replicas = r.replicas;
        spec.seed = r.seed;
        spec.cap = cap;
        spec.event_cap = r.event_cap;
        auto e = coupling::estimate_contraction(p, spec);

        std::map<std::string, int> reasons;
        for (auto const& s : e.samples)
            ++reasons[s.reason];
        json out = {{"gamma0_hat", e.gamma0_hat}, {"ci_low", e.ci_low},
                    {"ci_high", e.ci_high},       {"W", e.max_distance},
                    {"tau_q50", e.tau_q50},       {"tau_q95", e.tau_q95},
                    {"replicas", e.replicas},     {"good_fraction", e.good_fraction},
                    {"stop_reasons", reasons}};
        if (t >= 0 && e.gamma0_hat < 1 && e.tau_q95 > 0)
        {
            auto b = analytics::vlpc_bound(e.gamma0_hat, double(e.max_distance),
                                           e.tau_q95, t,
                                           double(p.capacity) * p.links);
            out["bound"] = {{"gamma", b.gamma},
                            {"M", e.tau_q95},
                            {"t", t},
                            {"value", b.bound},
                            {"tail_threshold", b.tail_threshold}};
        }
        auto& os = c.out();
        if (format == "json")
        {
            io::write_json(os, c.resolved(), out);
            return ok;
        }
        io::CsvWriter csv(os, c.resolved());
        csv.header({"gamma0_hat", "ci_low", "ci_high", "W", "tau_q50",
                    "tau_q95", "replicas", "good_fraction"});
        csv.row(e.gamma0_hat, e.ci_low, e.ci_high, e.max_distance, e.tau_q50,
                e.tau_q95, e.replicas, e.good_fraction);
        return ok;
    };
}

void add_trunk_scan(CLI::App& app,
                    std::vector<std::unique_ptr<Command>>& cmds)
{
    auto& c = *cmds.emplace_back(std::make_unique<Command>(
        app, "trunk-scan", "Fixed points and two-start runs across sigma"));
    static Model m;
    static Run r;
    static std::vector<int> sigmas{0, 2, 4, 6, 8, 10, 12, 16};
    static double gap = 0.10;
    static std::string format = "csv";
    m.bind(c, false, false);
    r.bind(c);
    c.add("sigmas", sigmas, "Comma-separated reserve levels");
    c.add("gap", gap, "Start gap that counts as bistable");
    c.add("format", format, "csv or json");
    c.run = [](Command& c) {
        check_format(format);
        struct Row
        {
            int sigma;
            analytics::TrunkReport fp;
            TwoStart sim;
        };
        std::vector<Row> rows;
        bool truncated = false;
        for (int s : sigmas)
        {
            Model local = m;
            local.sigma = s;
            local.rho = 1;
            auto p = local.params();
            auto fp = analytics::trunk_self_consistency(m.alpha, s, m.K);
            auto sim = two_start(p, r);
            truncated = truncated || sim.truncated;
            rows.push_back({s, std::move(fp), sim});
        }
        auto verdict = [](TwoStart const& t) {
            return t.gap() >= gap ? "bistable" : "monostable";
        };
        auto& os = c.out();
        if (format == "json")
        {
            json out = json::array();
            for (auto const& row : rows)
            {
                json pts = json::array();
                for (auto const& q : row.fp.points)
                    pts.push_back({{"f", q.f}, {"g", q.g}});
                out.push_back({{"sigma", row.sigma},
                               {"fixed_points", pts},
                               {"nonconverged", row.fp.nonconverged},
                               {"empty", summary_json(row.sim.empty)},
                               {"full", summary_json(row.sim.full)},
                               {"gap", row.sim.gap()},
                               {"verdict", verdict(row.sim)}});
            }
            io::write_json(os, c.resolved(), out);
        }
        else
        {
            io::CsvWriter csv(os, c.resolved());
            csv.header({"sigma", "fixed_points", "f_fp_low", "f_fp_high",
                        "f_empty", "f_full", "gap", "verdict"});
            for (auto const& row : rows)
            {
                double lo = row.fp.points.empty() ? NAN : row.fp.points.front().f;
                double hi = row.fp.points.empty() ? NAN : row.fp.points.back().f;
                csv.row(row.sigma, row.fp.points.size(), lo, hi,
                        row.sim.empty.mean, row.sim.full.mean, row.sim.gap(),
                        verdict(row.sim));
            }
        }
        return truncated ? event_cap : ok;
    };
}

//! Exit code for an exception escaping a command.
int exit_code(std::exception_ptr ep)
{
    try
    {
        std::rethrow_exception(ep);
    }
    catch (ReplicaError const& e)
    {
        if (e.cause())
        {
            int code = exit_code(e.cause());
            if (code != failure)
            {
                std::cerr << "darnet: " << e.what() << '\n';
                return code;
            }
        }
        std::cerr << "darnet: " << e.what() << '\n';
        return failure;
    }
    catch (InvalidParameter const& e)
    {
        std::cerr << "darnet: invalid parameter: " << e.what() << '\n';
        return invalid;
    }
    catch (WrongVariant const& e)
    {
        std::cerr << "darnet: " << e.what() << '\n';
        return invalid;
    }
    catch (PreconditionViolated const& e)
    {
        std::cerr << "darnet: " << e.what() << '\n';
        return invalid;
    }
    catch (EventCapExceeded const& e)
    {
        std::cerr << "darnet: " << e.what() << '\n';
        return event_cap;
    }
    catch (std::exception const& e)
    {
        std::cerr << "darnet: " << e.what() << '\n';
        return failure;
    }
}
}  // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Dynamic alternative routing: analytics and simulation"};
    app.require_subcommand(1);
    std::vector<std::unique_ptr<Command>> cmds;
    add_thresholds(app, cmds);
    add_fixed_points(app, cmds);
    add_simulate(app, cmds);
    add_hysteresis(app, cmds);
    add_hitting(app, cmds);
    add_coalesce(app, cmds);
    add_gamma(app, cmds);
    add_trunk_scan(app, cmds);

    try
    {
        app.parse(argc, argv);
    }
    catch (CLI::CallForHelp const& e)
    {
        return app.exit(e);
    }
    catch (CLI::ParseError const& e)
    {
        app.exit(e);
        return invalid;
    }

    for (auto& c : cmds)
    {
        if (!c->app()->parsed())
            continue;
        try
        {
            c->resolve();
            return c->run(*c);
        }
        catch (...)
        {
            return exit_code(std::current_exception());
        }
    }
    return failure;
}
