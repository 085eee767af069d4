#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "darnet/rng.hpp"

namespace darnet
{
//---------------------------------------------------------------------------//
/*!
 * Parameters of a DAR_n(alpha, K) system and its two extensions.
 *
 * rho > 1 selects the retries model and sigma > 0 trunk reservation; the two
 * extensions are never combined.
 */
struct ModelParams
{
    enum class Variant
    {
        base,
        retries,
        trunk
    };

    double alpha = 0;
    int capacity = 1;
    int links = 2;
    int rho = 1;
    int sigma = 0;

    void validate() const;
    Variant variant() const;
    //! Per-link direct arrival rate lambda = alpha K.
    double lambda() const { return alpha * capacity; }
    //! Lowest load that refuses rerouted calls (K - sigma).
    int reserve_level() const { return capacity - sigma; }
};

char const* to_string(ModelParams::Variant v);

//---------------------------------------------------------------------------//
/*!
 * Load vector with cached occupancy counts.
 *
 * Counts track full links (load K), links at or above the reserve level
 * (load >= K - sigma) and the total load.
 */
class SystemState
{
  public:
    SystemState() = default;
    SystemState(std::vector<int> loads, int capacity, int sigma = 0);

    int size() const { return static_cast<int>(loads_.size()); }
    int capacity() const { return capacity_; }
    int sigma() const { return sigma_; }
    int load(int link) const { return loads_[link]; }
    std::span<int const> loads() const { return loads_; }

    bool full(int link) const { return loads_[link] == capacity_; }
    //! Load at or above K - sigma (refuses rerouted calls).
    bool reserved(int link) const { return loads_[link] >= capacity_ - sigma_; }

    int full_count() const { return full_count_; }
    int reserved_count() const { return reserved_count_; }
    long total_load() const { return total_; }

    void add(int link);
    void remove(int link);

    //! Recompute counts from scratch and compare with the cached values.
    bool counts_consistent() const;

    //! FNV-1a hash of the load vector.
    std::uint64_t digest() const;

    friend bool operator==(SystemState const& a, SystemState const& b)
    {
        return a.loads_ == b.loads_;
    }

  private:
    std::vector<int> loads_;
    int capacity_ = 1;
    int sigma_ = 0;
    int full_count_ = 0;
    int reserved_count_ = 0;
    long total_ = 0;

    void account(int load, int sign);
};

//! Fractions of full (f) and reserved-band-or-full (g) links.
struct BlockingProfile
{
    double f = 0;
    double g = 0;
};

struct ArrivalOutcome
{
    enum class Kind
    {
        accepted_direct,
        rejected_coin,
        rerouted,
        lost_reroute,
        no_op_full
    };

    Kind kind = Kind::rejected_coin;
    int from = -1;  //!< link the call arrived to
    int to = -1;    //!< link that received the call, or -1
    int tries = 0;  //!< rerouting pairs examined

    bool accepted() const
    {
        return kind == Kind::accepted_direct || kind == Kind::rerouted;
    }
};

char const* to_string(ArrivalOutcome::Kind k);

//---------------------------------------------------------------------------//
// Operations
//---------------------------------------------------------------------------//

BlockingProfile blocking_profile(SystemState const& state,
                                 ModelParams const& params);

//! nu(x) = alpha K (1 + 2 f (1 - f)) for the base model.
double generator_rate(ModelParams const& params, SystemState const& state);

//! Per-link rate at which calls are accepted, implied by handle_arrival.
std::vector<double> acceptance_rate_vector(ModelParams const& params,
                                           SystemState const& state);

//! Whether a rerouted call may use the pair (i, j); the call lands on i.
bool reroute_admissible(ModelParams const& params, SystemState const& state,
                        int i, int j);

/*!
 * Apply one arrival of the rate-2 lambda stream at \c link.
 *
 * Draw order: a non-full target consumes one coin (heads accepts); a full
 * target consumes two indices (i, j) per try, up to rho tries, stopping at
 * the first admissible pair and placing the call on i.
 */
ArrivalOutcome handle_arrival(ModelParams const& params, SystemState& state,
                              int link, Rng& rng);

/*!
 * One step of the discretised base chain.
 *
 * Draw order: B (uniform < 1/(2 alpha + 1)); if B, a link index then a slot
 * index in [0, K) (the slot is occupied when slot < load); else B' (uniform
 * < (1 + 2f(1-f))/2) and, if B', a link index.
 */
void discrete_step(ModelParams const& params, SystemState& state, Rng& rng);

struct InitialSpec
{
    enum class Kind
    {
        empty,
        full,
        f_blocking
    };

    Kind kind = Kind::empty;
    double f = 0;
    //! Load of non-full links; negative selects floor(alpha K) clamped to
    //! [0, K - sigma - 1].
    int fill = -1;
};

SystemState initial_state(InitialSpec const& spec, ModelParams const& params);

//! Default load for non-full links of an f-blocking start.
int default_fill(ModelParams const& params);
}  // namespace darnet
