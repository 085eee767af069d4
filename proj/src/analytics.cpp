#include "darnet/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>

#include "darnet/errors.hpp"

namespace darnet::analytics
{
namespace
{
constexpr double kGridStep = 1e-4;
constexpr double kBisectTol = 1e-10;
constexpr double kSlopeStep = 1e-6;

void require(bool cond, char const* what)
{
    if (!cond)
        throw InvalidParameter(what);
}

// Normalised distribution from log-weights lw_l via the up-rate recurrence.
LinkDistribution from_up_rates(int capacity, auto&& up_rate)
{
    std::vector<double> lw(capacity + 1, 0.0);
    for (int l = 0; l < capacity; ++l)
        lw[l + 1] = lw[l] + std::log(up_rate(l)) - std::log(double(l + 1));
    double top = *std::max_element(lw.begin(), lw.end());
    LinkDistribution d;
    d.capacity = capacity;
    d.probs.resize(capacity + 1);
    double total = 0;
    for (int l = 0; l <= capacity; ++l)
        total += d.probs[l] = std::exp(lw[l] - top);
    for (auto& p : d.probs)
        p /= total;
    return d;
}

double bisect(std::function<double(double)> const& fn, double lo, double hi,
              double tol)
{
    double flo = fn(lo);
    while (hi - lo > tol)
    {
        double mid = 0.5 * (lo + hi);
        double fm = fn(mid);
        if (fm == 0)
            return mid;
        if ((fm < 0) == (flo < 0))
        {
            lo = mid;
            flo = fm;
        }
        else
        {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Maximiser of a unimodal function on [lo, hi].
double golden_max(std::function<double(double)> const& fn, double lo,
                  double hi, double tol)
{
    double const inv_phi = (std::sqrt(5.0) - 1) / 2;
    double a = hi - inv_phi * (hi - lo);
    double b = lo + inv_phi * (hi - lo);
    double fa = fn(a), fb = fn(b);
    while (hi - lo > tol)
    {
        if (fa < fb)
        {
            lo = a;
            a = b;
            fa = fb;
            b = lo + inv_phi * (hi - lo);
            fb = fn(b);
        }
        else
        {
            hi = b;
            b = a;
            fb = fa;
            a = hi - inv_phi * (hi - lo);
            fa = fn(a);
        }
    }
    return 0.5 * (lo + hi);
}

// Sign-change scan of fn on a uniform grid over [0,1] plus bisection.
// Grid-resolution tangencies (a local extremum touching zero without a sign
// change) are reported as double roots.
std::vector<FixedPoint> scan_roots(std::function<double(double)> const& fn)
{
    auto const steps = static_cast<int>(std::lround(1.0 / kGridStep));
    std::vector<double> val(steps + 1);
    for (int i = 0; i <= steps; ++i)
        val[i] = fn(i * kGridStep);

    std::vector<FixedPoint> roots;
    for (int i = 0; i <= steps; ++i)
    {
        double x = i * kGridStep;
        if (val[i] == 0)
        {
            roots.push_back({x, 0.0, false, false});
            continue;
        }
        if (i < steps && val[i + 1] != 0 && (val[i] < 0) != (val[i + 1] < 0))
        {
            double r = bisect(fn, x, x + kGridStep, kBisectTol);
            roots.push_back({r, fn(r), false, false});
            continue;
        }
        // touching extremum
        if (i > 0 && i < steps)
        {
            bool local_max = val[i] >= val[i - 1] && val[i] >= val[i + 1];
            bool local_min = val[i] <= val[i - 1] && val[i] <= val[i + 1];
            if ((local_max && val[i] < 0) || (local_min && val[i] > 0))
            {
                double sign = local_max ? 1.0 : -1.0;
                double peak = golden_max(
                    [&](double y) { return sign * fn(y); }, x - kGridStep,
                    x + kGridStep, kBisectTol);
                double fp = fn(peak);
                if (std::abs(fp) <= kBisectTol)
                    roots.push_back({peak, fp, false, true});
            }
        }
    }
    return roots;
}
}  // namespace

//---------------------------------------------------------------------------//

double LinkDistribution::tail_from(int level) const
{
    level = std::clamp(level, 0, capacity + 1);
    return std::accumulate(probs.begin() + level, probs.end(), 0.0);
}

void EtParams::validate() const
{
    require(capacity >= 1, "ET link: capacity must be >= 1");
    require(sigma >= 0 && sigma <= capacity, "ET link: need 0 <= sigma <= K");
    require(alpha > 0 && alpha <= beta, "ET link: need 0 < alpha <= beta");
}

double EtParams::up_rate(int load) const
{
    // beta below the reserved band, alpha inside it
    return (load < capacity - sigma ? beta : alpha) * capacity;
}

LinkDistribution erlang_stationary(double beta, int capacity)
{
    require(beta > 0, "erlang_stationary: beta must be positive");
    require(capacity >= 1, "erlang_stationary: K must be >= 1");
    double nu = beta * capacity;
    return from_up_rates(capacity, [nu](int) { return nu; });
}

double erlang_b(double beta, int capacity)
{
    require(beta > 0, "erlang_b: beta must be positive");
    require(capacity >= 1, "erlang_b: K must be >= 1");
    double nu = beta * capacity;
    // 1/E(k) = 1 + (k/nu) / E(k-1)
    double inv = 1.0;
    for (int k = 1; k <= capacity; ++k)
        inv = 1.0 + inv * k / nu;
    return 1.0 / inv;
}

LinkDistribution et_stationary(EtParams const& p)
{
    p.validate();
    return from_up_rates(p.capacity, [&p](int l) { return p.up_rate(l); });
}

double detailed_balance_residual(LinkDistribution const& dist,
                                 std::vector<double> const& up_rates)
{
    double worst = 0;
    for (int l = 0; l < dist.capacity; ++l)
    {
        double flow_up = dist.probs[l] * up_rates[l];
        double flow_down = dist.probs[l + 1] * (l + 1);
        double scale = std::max(flow_up, flow_down);
        // subnormal flows carry too few bits for a relative comparison
        if (scale >= std::numeric_limits<double>::min())
            worst = std::max(worst, std::abs(flow_up - flow_down) / scale);
    }
    return worst;
}

//---------------------------------------------------------------------------//

double reroute_rate(int rho, double f)
{
    require(rho >= 1, "reroute_rate: rho must be >= 1");
    require(f >= 0 && f <= 1, "reroute_rate: f must lie in [0,1]");
    if (f == 0 || f == 1)
        return 0;
    double eps = 1 - f;
    // 1 - (1 - eps^2)^rho without cancellation for f near 1
    double accept = -std::expm1(rho * std::log1p(-eps * eps));
    return 2 * f * accept / eps;
}

double effective_intensity(double alpha, int rho, double f,
                           std::optional<double> g)
{
    require(alpha > 0, "effective_intensity: alpha must be positive");
    require(f >= 0 && f <= 1, "effective_intensity: f must lie in [0,1]");
    if (!g)
        return alpha * (1 + reroute_rate(rho, f));
    require(rho == 1, "effective_intensity: trunk form takes a single try");
    require(*g >= f && *g <= 1, "effective_intensity: need f <= g <= 1");
    return alpha * (1 + 2 * f * (1 - *g));
}

double h_poly(double alpha, int rho, double f)
{
    double busy = 1 - (1 - f) * (1 - f);
    return f * (1 - 2 * std::pow(busy, rho)) + 1 - 1 / alpha;
}

//---------------------------------------------------------------------------//

FixedPointReport h_roots(double alpha, int rho)
{
    require(alpha > 0, "h_roots: alpha must be positive");
    require(rho >= 1, "h_roots: rho must be >= 1");
    auto h = [=](double f) { return h_poly(alpha, rho, f); };
    FixedPointReport rep;
    rep.grid_step = kGridStep;
    rep.tolerance = kBisectTol;
    rep.method = "grid-scan+bisection";
    rep.roots = scan_roots(h);
    for (auto& r : rep.roots)
    {
        double lo = std::max(0.0, r.value - kSlopeStep);
        double hi = std::min(1.0, r.value + kSlopeStep);
        // blocking relaxes toward the root when h falls through it
        r.stable = (h(hi) - h(lo)) / (hi - lo) < 0;
    }
    return rep;
}

namespace
{
// max over f in [0,1] of f(1 - 2(1-(1-f)^2)^rho), i.e. h_rho + 1/alpha - 1.
double max_reroute_gain(int rho)
{
    auto gain = [rho](double f) { return h_poly(1.0, rho, f); };
    auto const steps = static_cast<int>(std::lround(1.0 / kGridStep));
    int best = 0;
    double best_val = gain(0);
    for (int i = 1; i <= steps; ++i)
    {
        double v = gain(i * kGridStep);
        if (v > best_val)
        {
            best_val = v;
            best = i;
        }
    }
    double lo = std::max(0.0, (best - 1) * kGridStep);
    double hi = std::min(1.0, (best + 1) * kGridStep);
    return std::max(best_val, gain(golden_max(gain, lo, hi, 1e-13)));
}
}  // namespace

double alpha_c(int rho)
{
    require(rho >= 1, "alpha_c: rho must be >= 1");
    double gain = max_reroute_gain(rho);
    auto has_root = [gain](double alpha) { return gain + 1 - 1 / alpha > 0; };
    double lo = 0.5, hi = 1.0;
    if (has_root(lo) || !has_root(hi))
        throw std::logic_error("alpha_c: threshold outside [0.5, 1]");
    while (hi - lo > 1e-13)
    {
        double mid = 0.5 * (lo + hi);
        (has_root(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

double stationary_point(int rho)
{
    require(rho >= 1, "stationary_point: rho must be >= 1");
    return golden_max([rho](double f) { return reroute_rate(rho, f); }, 0.0,
                      1.0, 1e-10);
}

double varphi_rho(int rho)
{
    require(rho >= 1, "varphi_rho: rho must be >= 1");
    return 1 - std::sqrt(1 - std::ldexp(1.0, -rho));
}

double sigma_star(double alpha)
{
    require(alpha > 0, "sigma_star: alpha must be positive");
    require(alpha != 1, "sigma_star: undefined at alpha = 1");
    if (alpha < 1)
    {
        double inv = 1 / (1 - alpha);
        return inv * (2 * std::log(inv) + 14);
    }
    return std::log(4.0) / std::log(alpha);
}

FixedPointReport erlang_fixed_points(double alpha, int capacity)
{
    require(alpha > 0, "erlang_fixed_points: alpha must be positive");
    require(capacity >= 1, "erlang_fixed_points: K must be >= 1");
    auto map = [=](double b) {
        return erlang_b(alpha * (1 + 2 * b * (1 - b)), capacity);
    };
    auto gap = [&](double b) { return b - map(b); };

    FixedPointReport rep;
    rep.grid_step = kGridStep;
    rep.tolerance = kBisectTol;
    rep.method = "grid-scan+bisection";
    rep.roots = scan_roots(gap);
    for (auto& r : rep.roots)
    {
        double slope = (map(r.value + kSlopeStep) - map(r.value - kSlopeStep))
                       / (2 * kSlopeStep);
        r.stable = slope < 1;
    }
    return rep;
}

TrunkReport trunk_self_consistency(double alpha, int sigma, int capacity)
{
    require(alpha > 0, "trunk_self_consistency: alpha must be positive");
    require(capacity >= 1 && sigma >= 0 && sigma <= capacity,
            "trunk_self_consistency: need 0 <= sigma <= K, K >= 1");

    auto image = [&](double f, double g) {
        EtParams et{alpha, alpha * (1 + 2 * f * (1 - g)), sigma, capacity};
        auto pi = et_stationary(et);
        return std::pair{pi.full(), pi.tail_from(capacity - sigma)};
    };

    constexpr double kDamping = 0.5;
    constexpr double kConverged = 1e-13;
    constexpr int kMaxIter = 20000;
    constexpr double kDedup = 1e-4;

    TrunkReport rep;
    for (int i = 0; i <= 10; ++i)
    {
        double f0 = 0.1 * i;
        for (double g0 : {f0, 0.5 * (1 + f0), 1.0})
        {
            ++rep.starts;
            double f = f0, g = g0;
            bool done = false;
            for (int it = 0; it < kMaxIter && !done; ++it)
            {
                auto [nf, ng] = image(f, g);
                double step = std::max(std::abs(nf - f), std::abs(ng - g));
                f += kDamping * (nf - f);
                g += kDamping * (ng - g);
                done = step < kConverged;
            }
            if (!done)
            {
                ++rep.nonconverged;
                continue;
            }
            auto [nf, ng] = image(f, g);
            double res = std::max(std::abs(nf - f), std::abs(ng - g));
            bool seen = std::any_of(
                rep.points.begin(), rep.points.end(), [&](auto const& p) {
                    return std::abs(p.f - f) < kDedup
                           && std::abs(p.g - g) < kDedup;
                });
            if (!seen)
                rep.points.push_back({f, g, res});
        }
    }
    std::sort(rep.points.begin(), rep.points.end(),
              [](auto const& a, auto const& b) { return a.f < b.f; });
    return rep;
}

PhaseThresholds phase_thresholds(int rho_max)
{
    require(rho_max >= 1 && rho_max <= 10, "thresholds: need 1 <= rho <= 10");
    PhaseThresholds t;
    for (int rho = 1; rho <= rho_max; ++rho)
    {
        t.rho.push_back(rho);
        t.alpha_c.push_back(alpha_c(rho));
        t.varphi.push_back(varphi_rho(rho));
        t.f_sp.push_back(stationary_point(rho));
    }
    return t;
}

VlpcBound vlpc_bound(double gamma0, double max_distance, double m_time,
                     double t, double diameter)
{
    require(gamma0 >= 0 && gamma0 < 1, "vlpc_bound: need 0 <= gamma0 < 1");
    require(max_distance >= 1, "vlpc_bound: W must be >= 1");
    require(m_time > 0, "vlpc_bound: M must be positive");
    require(t >= 0, "vlpc_bound: t must be nonnegative");
    require(diameter >= 1, "vlpc_bound: diameter must be >= 1");
    VlpcBound b;
    b.gamma = 0.5 * (1 + gamma0);
    b.bound = std::clamp(diameter * std::pow(b.gamma, t / m_time - 1), 0.0,
                         1.0);
    b.tail_threshold = 0.5 * (1 - gamma0) / max_distance;
    return b;
}
}  // namespace darnet::analytics
