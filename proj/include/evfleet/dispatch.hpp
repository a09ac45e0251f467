#pragma once

#include <optional>
#include <span>
#include <vector>

#include "evfleet/fleet.hpp"
#include "evfleet/rng.hpp"

namespace evfleet::dispatch {

// Matching is a two-stage decision: an availability filter picks which
// vehicle states are even eligible, then a selection policy picks one of the
// eligible vehicles or drops the trip.

enum class FilterKind : std::uint8_t {
    only_idle,
    idle_charging_waiting,
    idle_charging_waiting_driving, // also admits driving_to_charger
    min_charge_time,               // idle, plus charging for at least a stipulated time
};

struct AvailabilityFilter {
    FilterKind kind = FilterKind::idle_charging_waiting;
    double min_charge_minutes = 10.0; // used by min_charge_time
};

/// Ids of vehicles whose state passes the filter, in ascending id order.
std::vector<VehicleId> available_vehicles(std::span<const Vehicle> fleet,
                                          const AvailabilityFilter& filter, double now);

/// A vehicle is feasible for a trip iff it can run the pickup leg plus the
/// trip leg and still end at or above the reserve floor.
struct FeasibilityRule {
    double min_end_soc = 0.0;
};

/// One eligible vehicle as seen by the selection stage: its id, the corrected
/// pickup distance from its current position, and its current SoC (both
/// evaluated as if any charging activity were interrupted right now).
struct Candidate {
    VehicleId id;
    double pickup_distance_mi;
    double soc;
};

struct Outcome {
    std::optional<VehicleId> vehicle;
    int considered = 0; // nearest candidates examined by the policy
};

/// Power-of-d selection: among the effective-d nearest candidates, take the
/// highest-SoC one; serve if it is feasible, drop otherwise. Non-integer d
/// evaluates floor(d) candidates with probability ceil(d)-d, else ceil(d);
/// the coin consumes one draw from the world stream per arrival.
Outcome power_of_d_dispatch(const TripRequest& trip, std::span<const Candidate> candidates,
                            double d, const FeasibilityRule& rule, const geo::EnergyParams& ev,
                            Rng& rng);

/// Closest-available selection: the feasible candidate with the shortest
/// pickup distance (ties: higher SoC, then lower id), or drop when none is
/// feasible.
Outcome closest_available_dispatch(const TripRequest& trip, std::span<const Candidate> candidates,
                                   const FeasibilityRule& rule, const geo::EnergyParams& ev);

bool is_feasible(const Candidate& c, const TripRequest& trip, const FeasibilityRule& rule,
                 const geo::EnergyParams& ev);

/// Number of nearest candidates to examine for this arrival.
int draw_effective_d(double d, Rng& rng);

/// Controller that nudges d by +-1 at fixed review boundaries based on how
/// many idle high-SoC vehicles were around while trips were being dropped.
class AdaptiveDController {
public:
    AdaptiveDController(int initial_d, int review_period_trips, double threshold_fraction,
                        double high_soc_level)
        : d_(initial_d),
          period_(review_period_trips),
          threshold_fraction_(threshold_fraction),
          high_soc_level_(high_soc_level) {}

    int d() const { return d_; }
    double high_soc_level() const { return high_soc_level_; }
    int review_period() const { return period_; }

    /// Accumulates one per-arrival sample of the idle high-SoC count.
    void observe_arrival(int idle_high_soc_count) {
        ++arrivals_in_window_;
        idle_high_soc_sum_ += idle_high_soc_count;
    }
    void observe_drop() { ++drops_in_window_; }

    bool at_review_boundary() const { return arrivals_in_window_ >= period_; }

    struct WindowStats {
        double avg_idle_high_soc = 0.0;
        std::int64_t drops = 0;
    };
    WindowStats window_stats() const;

    /// Applies the review rule, resets the window, and returns the new d.
    int review(int fleet_size);

private:
    int d_;
    int period_;
    double threshold_fraction_;
    double high_soc_level_;
    std::int64_t arrivals_in_window_ = 0;
    std::int64_t idle_high_soc_sum_ = 0;
    std::int64_t drops_in_window_ = 0;
};

/// The pure review rule: increment d when the average idle high-SoC count
/// exceeds the threshold fraction of the fleet while trips were dropped in
/// the same window; decrement (never below 1) when the average is zero.
int adaptive_review_rule(int d_current, double avg_idle_high_soc, std::int64_t drops_in_window,
                         int fleet_size, double threshold_fraction);

} // namespace evfleet::dispatch
