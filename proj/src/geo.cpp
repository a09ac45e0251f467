#include "evfleet/geo.hpp"

#include <algorithm>
#include <cmath>

#include "evfleet/errors.hpp"

namespace evfleet::geo {

double haversine_miles(const GeoPoint& a, const GeoPoint& b) {
    const double lat1 = deg2rad(a.lat);
    const double lat2 = deg2rad(b.lat);
    const double dlat = deg2rad(b.lat - a.lat);
    const double dlon = deg2rad(b.lon - a.lon);

    const double s_lat = std::sin(dlat * 0.5);
    const double s_lon = std::sin(dlon * 0.5);
    const double h = s_lat * s_lat + std::cos(lat1) * std::cos(lat2) * s_lon * s_lon;
    return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, std::sqrt(h)));
}

double manhattan_miles(const GeoPoint& a, const GeoPoint& b) {
    const double dlat = std::fabs(deg2rad(b.lat - a.lat));
    double dlon = deg2rad(b.lon - a.lon);
    // wrap the lon difference into [-pi, pi]
    dlon -= 2.0 * kPi * std::round(dlon / (2.0 * kPi));
    const double mid_lat = deg2rad((a.lat + b.lat) * 0.5);
    return kEarthRadiusMiles * (dlat + std::cos(mid_lat) * std::fabs(dlon));
}

double corrected_distance(const GeoPoint& a, const GeoPoint& b, const DistanceModel& model) {
    const double base =
        model.mode == DistanceMode::haversine ? haversine_miles(a, b) : manhattan_miles(a, b);
    return base * model.correction_factor;
}

double travel_time_minutes(double distance_miles, double velocity_mph) {
    if (!(velocity_mph > 0.0)) {
        throw ConfigError("velocity must be positive (got " + std::to_string(velocity_mph) + ")");
    }
    return 60.0 * distance_miles / velocity_mph;
}

double soc_drop(double distance_miles, const EnergyParams& ev) {
    return distance_miles * ev.consumption_wh_per_mile / (ev.battery_kwh * 1000.0);
}

double charge_duration_minutes(double from_soc, double to_soc, const EnergyParams& ev) {
    if (to_soc < from_soc) {
        throw ConfigError("charge target below current SoC");
    }
    return 60.0 * (to_soc - from_soc) * ev.battery_kwh / ev.charge_rate_kw;
}

double soc_gain(double minutes, const EnergyParams& ev) {
    return minutes * ev.charge_rate_kw / (60.0 * ev.battery_kwh);
}

GeoPoint uniform_sphere_point(Rng& rng) {
    const double lon = rng.uniform(-180.0, 180.0);
    const double lat = rad2deg(std::asin(2.0 * rng.uniform01() - 1.0));
    return {lat, lon};
}

GeoPoint uniform_sphere_point(Rng& rng, const BoundingBox& box) {
    // Inverse-CDF restriction: lon uniform over the box, sin(lat) uniform over
    // [sin(lat_min), sin(lat_max)]. Same law as rejection from the full-sphere
    // draw, without the rejection loop (city-scale boxes would reject nearly
    // every global sample).
    const double lon = rng.uniform(box.lon_min, box.lon_max);
    const double s0 = std::sin(deg2rad(box.lat_min));
    const double s1 = std::sin(deg2rad(box.lat_max));
    const double lat = rad2deg(std::asin(rng.uniform(s0, s1)));
    return {lat, lon};
}

GeoPoint lerp(const GeoPoint& a, const GeoPoint& b, double f) {
    return {a.lat + (b.lat - a.lat) * f, a.lon + (b.lon - a.lon) * f};
}

} // namespace evfleet::geo
