#include "evfleet/dispatch.hpp"

#include <algorithm>
#include <cmath>

namespace evfleet::dispatch {

namespace {

bool passes(const Vehicle& v, const AvailabilityFilter& f, double now) {
    using V = VehicleState;
    switch (f.kind) {
        case FilterKind::only_idle:
            return v.state == V::idle;
        case FilterKind::idle_charging_waiting:
            return v.state == V::idle || v.state == V::charging || v.state == V::waiting_for_charger;
        case FilterKind::idle_charging_waiting_driving:
            return v.state == V::idle || v.state == V::charging ||
                   v.state == V::waiting_for_charger || v.state == V::driving_to_charger;
        case FilterKind::min_charge_time:
            if (v.state == V::idle) return true;
            return v.state == V::charging && v.charging_since &&
                   now - *v.charging_since >= f.min_charge_minutes;
    }
    return false;
}

// Candidate ordering for "closest": distance, then SoC descending, then id.
bool nearer(const Candidate& a, const Candidate& b) {
    if (a.pickup_distance_mi != b.pickup_distance_mi)
        return a.pickup_distance_mi < b.pickup_distance_mi;
    if (a.soc != b.soc) return a.soc > b.soc;
    return a.id < b.id;
}

} // namespace

std::vector<VehicleId> available_vehicles(std::span<const Vehicle> fleet,
                                          const AvailabilityFilter& filter, double now) {
    std::vector<VehicleId> out;
    for (const Vehicle& v : fleet) {
        if (passes(v, filter, now)) out.push_back(v.id);
    }
    return out;
}

bool is_feasible(const Candidate& c, const TripRequest& trip, const FeasibilityRule& rule,
                 const geo::EnergyParams& ev) {
    const double need = geo::soc_drop(c.pickup_distance_mi, ev) +
                        geo::soc_drop(trip.trip_distance, ev);
    return c.soc - need >= rule.min_end_soc;
}

int draw_effective_d(double d, Rng& rng) {
    const double lo = std::floor(d);
    const double hi = std::ceil(d);
    if (lo == hi) return static_cast<int>(lo);
    // floor(d) with probability ceil(d) - d, ceil(d) otherwise
    return rng.uniform01() < hi - d ? static_cast<int>(lo) : static_cast<int>(hi);
}

Outcome power_of_d_dispatch(const TripRequest& trip, std::span<const Candidate> candidates,
                            double d, const FeasibilityRule& rule, const geo::EnergyParams& ev,
                            Rng& rng) {
    if (candidates.empty()) return {};
    const int effective_d = draw_effective_d(d, rng);
    const std::size_t k = std::min<std::size_t>(effective_d, candidates.size());

    std::vector<Candidate> pool(candidates.begin(), candidates.end());
    std::nth_element(pool.begin(), pool.begin() + (k - 1), pool.end(), nearer);

    // highest SoC among the k nearest (ties: nearer, then lower id)
    const Candidate* best = &pool[0];
    for (std::size_t i = 1; i < k; ++i) {
        const Candidate& c = pool[i];
        if (c.soc > best->soc ||
            (c.soc == best->soc && nearer(c, *best))) {
            best = &c;
        }
    }
    Outcome out;
    out.considered = static_cast<int>(k);
    if (is_feasible(*best, trip, rule, ev)) {
        out.vehicle = best->id;
    }
    return out;
}

Outcome closest_available_dispatch(const TripRequest& trip, std::span<const Candidate> candidates,
                                   const FeasibilityRule& rule, const geo::EnergyParams& ev) {
    Outcome out;
    out.considered = static_cast<int>(candidates.size());
    const Candidate* best = nullptr;
    for (const Candidate& c : candidates) {
        if (!is_feasible(c, trip, rule, ev)) continue;
        if (!best || nearer(c, *best)) best = &c;
    }
    if (best) out.vehicle = best->id;
    return out;
}

AdaptiveDController::WindowStats AdaptiveDController::window_stats() const {
    WindowStats s;
    s.drops = drops_in_window_;
    if (arrivals_in_window_ > 0) {
        s.avg_idle_high_soc =
            static_cast<double>(idle_high_soc_sum_) / static_cast<double>(arrivals_in_window_);
    }
    return s;
}

int AdaptiveDController::review(int fleet_size) {
    const WindowStats s = window_stats();
    d_ = adaptive_review_rule(d_, s.avg_idle_high_soc, s.drops, fleet_size, threshold_fraction_);
    arrivals_in_window_ = 0;
    idle_high_soc_sum_ = 0;
    drops_in_window_ = 0;
    return d_;
}

int adaptive_review_rule(int d_current, double avg_idle_high_soc, std::int64_t drops_in_window,
                         int fleet_size, double threshold_fraction) {
    if (avg_idle_high_soc > threshold_fraction * fleet_size && drops_in_window > 0) {
        return d_current + 1;
    }
    if (avg_idle_high_soc == 0.0 && d_current > 1) {
        return d_current - 1;
    }
    return d_current;
}

} // namespace evfleet::dispatch
