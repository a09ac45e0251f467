#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evfleet/fleet.hpp"
#include "evfleet/geo.hpp"
#include "evfleet/rng.hpp"

namespace evfleet::ingest {

struct TripRecord {
    double arrival_time = 0.0; // minutes since scenario start
    geo::GeoPoint origin;
    geo::GeoPoint destination;
    double recorded_distance = 0.0; // miles
    bool has_distance = false;
};

/// Arrival records sorted by arrival time (stable, so equal stamps keep file order).
struct TripTable {
    std::vector<TripRecord> rows;
};

/// Column names for the delimited trip file. Datetimes are ISO-8601; the
/// dropoff timestamp is optional.
struct SchemaMap {
    std::string pickup_datetime = "pickup_datetime";
    std::string pickup_lat = "pickup_lat";
    std::string pickup_lon = "pickup_lon";
    std::string dropoff_lat = "dropoff_lat";
    std::string dropoff_lon = "dropoff_lon";
    std::string trip_distance = "trip_distance";
    std::string dropoff_datetime; // optional
};

struct CleaningFilter {
    double lower_percentile = 0.5;
    double upper_percentile = 99.5;
    std::optional<std::string> window_start; // ISO-8601
    std::optional<std::string> window_end;
    double max_distance_miles = 100.0;
    bool require_positive_distance = true;
};

/// Percentile bounds resolved against a concrete table. Cleaning against a
/// fixed set of bounds is idempotent; the bounds are resolved once, before
/// the first pass.
struct CoordinateBounds {
    double lat_lo, lat_hi;
    double lon_lo, lon_hi;
};

CoordinateBounds resolve_bounds(const TripTable& table, double lower_percentile,
                                double upper_percentile);

struct LoadReport {
    std::size_t rows_in = 0;
    std::size_t rows_kept = 0;
    std::size_t rows_unparseable = 0;
    double day_origin_minute = 0.0;    // minute-of-day at scenario t = 0
    double epoch_start_minute = 0.0;   // t = 0 in minutes since the unix epoch
    std::optional<CoordinateBounds> bounds;
};

/// Loads and cleans a delimited trip file: rows outside the time window or
/// the coordinate percentile bounds are removed, as are non-positive or
/// oversized distances. Unparseable rows are skipped and counted. Missing
/// columns raise SchemaError naming the column.
TripTable load_trip_records(const std::string& path, const SchemaMap& schema,
                            const CleaningFilter& filter, LoadReport* report = nullptr);

/// Removes rows outside the given coordinate bounds and rows whose recorded
/// distance is non-positive or above the filter cap, then sorts by arrival
/// time (stable). Idempotent for fixed bounds.
TripTable clean_table(const TripTable& table, const CleaningFilter& filter,
                      const CoordinateBounds& bounds);

/// Convenience form: resolves the filter's percentile bounds against the
/// table, then cleans.
TripTable clean_table(const TripTable& table, const CleaningFilter& filter);

struct RegressionReport {
    double slope = 0.0; // the distance correction factor
    double intercept = 0.0;
    double r_squared = 0.0;
    double test_mse = 0.0;
    double train_fraction = 0.8;
    std::size_t n_train = 0;
    std::size_t n_test = 0;
};

/// Ordinary least squares of recorded distance against great-circle distance
/// on a seeded random train split; the slope is the correction factor, the
/// MSE is evaluated on the held-out split.
RegressionReport fit_correction_factor(const TripTable& table, double train_fraction, Rng& rng);

/// Synthetic arrivals: exponential inter-arrival gaps at `rate_per_min`,
/// origins and destinations area-uniform in the region, recorded distance set
/// to the model-corrected great-circle distance.
TripTable generate_poisson_trips(double rate_per_min, double horizon_min,
                                 const geo::BoundingBox& region, const geo::DistanceModel& model,
                                 Rng& rng);

/// Materializes the table as TripRequests in arrival order, all WAITING.
std::vector<TripRequest> arrival_stream(const TripTable& table);

/// Minutes since the unix epoch for "YYYY-MM-DD[ T]HH:MM:SS[.fff]", or
/// nullopt when malformed.
std::optional<double> parse_iso_minutes(std::string_view text);

/// Inverse of parse_iso_minutes (fractional seconds kept to microseconds).
std::string format_iso_minutes(double epoch_minutes);

} // namespace evfleet::ingest
