#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "evfleet/charging.hpp"
#include "evfleet/dispatch.hpp"
#include "evfleet/geo.hpp"
#include "evfleet/trips.hpp"

namespace evfleet {

struct MatchingConfig {
    enum class Kind : std::uint8_t { closest, closest_available, power_of_d };
    Kind kind = Kind::power_of_d;
    double d = 10.0;
    dispatch::AvailabilityFilter filter;
    double min_end_soc = 0.0;
    struct Adaptive {
        bool enabled = false;
        int initial_d = 5;
        int period = 1000;
        double threshold = 0.05;
        double high_soc = 0.8;
    } adaptive;
};

struct ChargingConfig {
    enum class Schedule : std::uint8_t { always, night, custom };
    Schedule schedule = Schedule::always;
    std::vector<std::pair<double, double>> custom_table;
    double alpha = 0.0;
    charging::AssignmentRule assignment;
    bool interrupt = true;
};

struct DatasetConfig {
    enum class Kind : std::uint8_t { synthetic, csv };
    Kind kind = Kind::synthetic;
    // synthetic
    double rate_per_min = 1.0;
    std::optional<geo::BoundingBox> region;
    // csv
    std::string path;
    ingest::SchemaMap schema;
    ingest::CleaningFilter cleaning;
};

struct DistanceConfig {
    geo::DistanceMode mode = geo::DistanceMode::haversine;
    double correction_factor = 1.0;
    bool fit_from_dataset = false; // replace the factor with the regression slope
    double train_fraction = 0.8;
};

enum class ChargerPlacement : std::uint8_t { uniform_in_bounding_box, sample_from_origins };

struct PlacementConfig {
    ChargerPlacement chargers = ChargerPlacement::sample_from_origins;
    double percentile_low = 0.5;
    double percentile_high = 99.5;
};

struct MetricsConfig {
    double timeseries_resolution_min = 1.0;
    double pickup_bin_minutes = 1.0;
};

/// Everything a run needs; a run is a pure function of this struct.
struct ScenarioConfig {
    std::uint64_t seed = 1;
    double horizon_minutes = 1440.0;
    std::optional<double> day_origin_minute; // derived from the dataset when absent

    int fleet_size = 100;
    double initial_soc = 1.0;
    geo::EnergyParams energy;
    double velocity_mph = 11.21;

    int charger_count = 20;
    int posts_per_charger = 4;

    MatchingConfig matching;
    ChargingConfig charging;
    DistanceConfig distance;
    DatasetConfig dataset;
    PlacementConfig placement;
    MetricsConfig metrics;
};

/// Parses and validates a JSON config document. Unknown keys are rejected so
/// typos fail loudly.
ScenarioConfig parse_config(const std::string& json_text);
ScenarioConfig load_config_file(const std::string& path);

/// Semantic validation (counts positive, fractions in range, schedules
/// covering the day). Throws ConfigError on the first violation.
void validate_config(const ScenarioConfig& cfg);

/// Canonical JSON echo of a config, used by the run manifest.
std::string config_to_json(const ScenarioConfig& cfg);

/// The effective threshold schedule for a config.
charging::ThresholdSchedule schedule_from_config(const ChargingConfig& cfg);

} // namespace evfleet
