#pragma once

#include <optional>

#include "evfleet/rng.hpp"

namespace evfleet::geo {

/// Mean Earth radius in statute miles, fixed as a constant for reproducibility.
inline constexpr double kEarthRadiusMiles = 3958.8;

inline constexpr double kPi = 3.141592653589793238462643383279502884;

inline double deg2rad(double deg) { return deg * (kPi / 180.0); }
inline double rad2deg(double rad) { return rad * (180.0 / kPi); }

struct GeoPoint {
    double lat = 0.0; ///< degrees in [-90, 90]
    double lon = 0.0; ///< degrees in [-180, 180]

    bool operator==(const GeoPoint&) const = default;
};

struct BoundingBox {
    double lat_min, lat_max;
    double lon_min, lon_max;

    bool contains(const GeoPoint& p) const {
        return p.lat >= lat_min && p.lat <= lat_max && p.lon >= lon_min && p.lon <= lon_max;
    }
};

enum class DistanceMode { haversine, manhattan };

/// Distance arithmetic over the sphere plus the regression-derived correction
/// factor that maps great-circle miles onto street miles.
struct DistanceModel {
    DistanceMode mode = DistanceMode::haversine;
    double correction_factor = 1.0;
};

/// Great-circle distance in miles between two points.
double haversine_miles(const GeoPoint& a, const GeoPoint& b);

/// Axis-aligned L1 arc distance: |lat arc| + |lon arc at the mean latitude|.
double manhattan_miles(const GeoPoint& a, const GeoPoint& b);

/// Base-mode distance scaled by the model's correction factor.
double corrected_distance(const GeoPoint& a, const GeoPoint& b, const DistanceModel& model);

/// Minutes needed to cover `distance` miles at `velocity` mph. Throws
/// ConfigError when velocity is not positive.
double travel_time_minutes(double distance_miles, double velocity_mph);

/// Energy parameters shared by every vehicle in a scenario.
struct EnergyParams {
    double battery_kwh = 51.25;
    double consumption_wh_per_mile = 230.0;
    double charge_rate_kw = 20.0;
};

/// SoC fraction spent driving `distance` miles.
double soc_drop(double distance_miles, const EnergyParams& ev);

/// Minutes to charge from one SoC to another at constant power. Throws on
/// to_soc < from_soc.
double charge_duration_minutes(double from_soc, double to_soc, const EnergyParams& ev);

/// SoC gained by charging for `minutes` at constant power.
double soc_gain(double minutes, const EnergyParams& ev);

/// Point drawn area-uniformly on the whole sphere.
GeoPoint uniform_sphere_point(Rng& rng);

/// Point drawn area-uniformly within a bounding box (same law as restricting
/// the sphere-uniform draw to the box).
GeoPoint uniform_sphere_point(Rng& rng, const BoundingBox& box);

/// Straight-line interpolation in lat/lon at fraction f of the way from a to b.
GeoPoint lerp(const GeoPoint& a, const GeoPoint& b, double f);

} // namespace evfleet::geo
