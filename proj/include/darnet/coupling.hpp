#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "darnet/engine.hpp"
#include "darnet/load_index.hpp"
#include "darnet/model.hpp"

namespace darnet::coupling
{
//---------------------------------------------------------------------------//
enum class Variant
{
    base,             //!< shared coin and shared single pair
    retries,          //!< shared coin, shared list of rho pairs
    refined_retries,  //!< retries with mismatch-aware landing at distance 1
    trunk             //!< base with the reserved-band admissibility test
};

char const* to_string(Variant v);
Variant variant_from_string(std::string const& name);

//! Throws PreconditionViolated when \c v cannot drive \c params.
void check_variant(Variant v, ModelParams const& params);

enum class Side
{
    x,
    y
};

//---------------------------------------------------------------------------//
/*!
 * Two systems evolved jointly, with the L1 distance and the set of
 * mismatched links maintained incrementally.
 */
class CoupledPair
{
  public:
    CoupledPair(SystemState x, SystemState y);

    SystemState const& x() const { return x_; }
    SystemState const& y() const { return y_; }
    SystemState const& get(Side s) const { return s == Side::x ? x_ : y_; }

    int size() const { return x_.size(); }
    long distance() const { return distance_; }
    bool coalesced() const { return distance_ == 0; }
    //! Links where the loads differ, in no particular order.
    std::vector<int> const& mismatched() const { return mismatched_; }

    void add(Side s, int link);
    void remove(Side s, int link);

    //! Total departure weight: sum over links of max(x_j, y_j).
    long departure_weight() const { return max_index_.total(); }
    int departure_link(long unit) const;

    //! Number of links with load strictly above \c level in each system.
    void set_watch_level(int level);
    int above_watch(Side s) const
    {
        return s == Side::x ? above_x_ : above_y_;
    }

  private:
    SystemState x_, y_;
    long distance_ = 0;
    LoadIndex max_index_;
    std::vector<int> mismatched_;
    std::vector<int> position_;  // index into mismatched_, or -1
    int watch_level_ = -1;
    int above_x_ = 0, above_y_ = 0;

    void change(Side s, int link, int delta);
};

//! Distance sum_j |x_j - y_j|.
long pair_distance(SystemState const& x, SystemState const& y);

//---------------------------------------------------------------------------//
struct CoupledEvent
{
    enum class Type
    {
        arrival,
        departure
    };
    enum class Departed
    {
        none,
        both,
        x_only,
        y_only
    };

    Type type = Type::arrival;
    int link = -1;
    ArrivalOutcome x_out;
    ArrivalOutcome y_out;
    Departed departed = Departed::none;
    //! A reroute landed in only one system, or on different links.
    bool divergent_reroute = false;
    //! The refined coupling's mismatch-aware rule was used.
    bool refined = false;
    long distance_before = 0;
    long distance_after = 0;

    ArrivalOutcome const& out(Side s) const
    {
        return s == Side::x ? x_out : y_out;
    }
};

//! Total event rate 2 lambda n + sum_j max(x_j, y_j).
double coupled_rate(ModelParams const& params, CoupledPair const& pair);

/*!
 * Apply one joint event.
 *
 * Draw order: one uniform selects arrival vs departure. Arrivals draw the
 * link index, then (when the link is open in either system) one coin, then
 * rerouting pairs as two indices each. When the link is full in both
 * systems the whole list of pairs is drawn before either system uses it.
 * Departures draw a call unit and a uniform deciding shared vs extra clock.
 */
CoupledEvent coupled_event(Variant variant, ModelParams const& params,
                           CoupledPair& pair, Rng& rng);

HittingResult coalescence_time(Variant variant, ModelParams const& params,
                               SystemState x, SystemState y, double cap,
                               std::uint64_t seed,
                               long event_cap = 1'000'000'000L);

//---------------------------------------------------------------------------//
// Stochastic domination
//---------------------------------------------------------------------------//

/*!
 * Region in which an Erlang product system bounds the DAR system.
 *
 * - sandwich: Er(alpha)^n <= X <= Er(3 alpha / 2)^n everywhere;
 * - between(f): X >= Er(beta(f))^n while phi(X) in [f, 1 - f], f <= 1/2;
 * - below(f): X <= Er(beta(f))^n while phi(X) <= f, f <= 1/2;
 * - above(f): X <= Er(beta(f))^n while phi(X) >= f, f >= 1/2, since beta
 *   decreases on [1/2, 1].
 */
struct DominationBand
{
    enum class Shape
    {
        sandwich,
        between,
        below,
        above
    };

    Shape shape = Shape::sandwich;
    double f = 0;

    void validate() const;
    bool contains(double phi) const;
};

struct DominationViolation
{
    double time = 0;
    long event = 0;
    int link = -1;
    std::string relation;
};

struct DominationSample
{
    double time = 0;
    double f_lower = -1;  //!< -1 when the system is absent
    double f_x = 0;
    double f_upper = -1;
};

struct DominationReport
{
    std::vector<DominationSample> samples;
    std::vector<DominationViolation> violations;
    bool exited = false;
    double exit_time = 0;  //!< tau_A, or the end time when never exited
    long events = 0;
    long checks = 0;
};

DominationReport domination_run(ModelParams const& params,
                                DominationBand const& band, SystemState init,
                                SimConfig const& config);

//---------------------------------------------------------------------------//
// Stopping-time contraction estimates
//---------------------------------------------------------------------------//

enum class Regime
{
    low,
    high
};

struct ContractionSpec
{
    Variant variant = Variant::base;
    Regime regime = Regime::low;
    //! low: links above xi K count as "bad"; high: band starts at
    //! varphi_rho + 2 xi.
    double xi = 0.9;
    //! low: at most 2 epsilon n bad links.
    double epsilon = 1e-3;
    enum class Start
    {
        uniform,   //!< extra call on a uniform non-full link
        near_full  //!< extra call on a link one below capacity
    };
    Start start = Start::uniform;
    double burn_in = 10;
    int replicas = 100;
    std::uint64_t seed = 1;
    double cap = 1000;  //!< time limit per replica
    long event_cap = 1'000'000'000L;
    int threads = 0;
};

struct ContractionSample
{
    long distance_at_stop = 0;
    bool good = false;
    double tau = 0;
    long max_distance = 1;  //!< max distance strictly before tau
    std::string reason;
};

struct ContractionEstimate
{
    double gamma0_hat = 0;
    double ci_low = 0;
    double ci_high = 0;
    long max_distance = 1;  //!< W
    double tau_q50 = 0;
    double tau_q95 = 0;
    int replicas = 0;
    double good_fraction = 0;
    std::vector<ContractionSample> samples;
};

//! One replica: run until the regime's stopping rule fires.
ContractionSample contraction_sample(ModelParams const& params,
                                     ContractionSpec const& spec,
                                     CoupledPair pair, Rng& rng);

ContractionEstimate estimate_contraction(ModelParams const& params,
                                         ContractionSpec const& spec);
}  // namespace darnet::coupling
