#pragma once

#include <optional>
#include <string>
#include <vector>

namespace darnet::analytics
{
//---------------------------------------------------------------------------//
// Single-link equilibria
//---------------------------------------------------------------------------//

//! Equilibrium distribution of one link over loads {0, ..., K}.
struct LinkDistribution
{
    std::vector<double> probs;
    int capacity = 0;

    double full() const { return probs.back(); }
    //! Mass on loads >= \c level.
    double tail_from(int level) const;
};

/*!
 * Trunk-reserved Erlang link ET(alpha, beta, sigma, K).
 *
 * Calls arrive at rate beta*K while the load is below K - sigma, at rate
 * alpha*K on loads in [K - sigma, K) and not at all when full.
 */
struct EtParams
{
    double alpha = 0;
    double beta = 0;
    int sigma = 0;
    int capacity = 1;

    void validate() const;
    //! Up-rate out of load \c load.
    double up_rate(int load) const;
};

LinkDistribution erlang_stationary(double beta, int capacity);
double erlang_b(double beta, int capacity);
LinkDistribution et_stationary(EtParams const& p);

//! Largest relative mismatch |pi_l up_l - pi_{l+1} (l+1)| / (pi_l up_l).
double detailed_balance_residual(LinkDistribution const& dist,
                                 std::vector<double> const& up_rates);

//---------------------------------------------------------------------------//
// Rate functions
//---------------------------------------------------------------------------//

//! Extra intensity factor from rerouting with \c rho tries at blocking \c f.
double reroute_rate(int rho, double f);

//! beta_rho(f), or the trunk form alpha(1 + 2f(1-g)) when \c g is given.
double effective_intensity(double alpha,
                           int rho,
                           double f,
                           std::optional<double> g = std::nullopt);

//! h_rho(f); positive exactly where the mean-field blocking map exceeds f.
double h_poly(double alpha, int rho, double f);

//---------------------------------------------------------------------------//
// Fixed points and thresholds
//---------------------------------------------------------------------------//

struct FixedPoint
{
    double value = 0;
    double residual = 0;
    bool stable = false;
    bool double_root = false;
};

struct FixedPointReport
{
    std::vector<FixedPoint> roots;
    double grid_step = 0;
    double tolerance = 0;
    std::string method;

    std::size_t size() const { return roots.size(); }
};

FixedPointReport h_roots(double alpha, int rho);
double alpha_c(int rho);
double stationary_point(int rho);
double varphi_rho(int rho);
double sigma_star(double alpha);

FixedPointReport erlang_fixed_points(double alpha, int capacity);

struct TrunkFixedPoint
{
    double f = 0;
    double g = 0;
    double residual = 0;
};

struct TrunkReport
{
    std::vector<TrunkFixedPoint> points;
    int starts = 0;
    int nonconverged = 0;
};

TrunkReport trunk_self_consistency(double alpha, int sigma, int capacity);

//! Table of critical quantities for rho = 1..rho_max.
struct PhaseThresholds
{
    std::vector<int> rho;
    std::vector<double> alpha_c;
    std::vector<double> varphi;
    std::vector<double> f_sp;
};

PhaseThresholds phase_thresholds(int rho_max);

//---------------------------------------------------------------------------//
// Variable-length path coupling bound
//---------------------------------------------------------------------------//

struct VlpcBound
{
    double gamma = 0;
    double bound = 0;
    double tail_threshold = 0;
};

VlpcBound vlpc_bound(double gamma0, double max_distance, double m_time,
                     double t, double diameter);
}  // namespace darnet::analytics
