#include "evfleet/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "evfleet/errors.hpp"

namespace evfleet {

using json = nlohmann::ordered_json;

namespace {

[[noreturn]] void bad(const std::string& msg) { throw ConfigError("config: " + msg); }

void expect_keys(const json& obj, const std::string& where,
                 std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        (void)value;
        bool ok = false;
        for (const char* a : allowed) {
            if (key == a) {
                ok = true;
                break;
            }
        }
        if (!ok) bad("unknown key '" + key + "' in " + where);
    }
}

template <typename T>
T get_or(const json& obj, const char* key, T fallback) {
    if (!obj.contains(key)) return fallback;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        bad(std::string("bad value for '") + key + "'");
    }
}

geo::BoundingBox parse_region(const json& r) {
    expect_keys(r, "region", {"lat_min", "lat_max", "lon_min", "lon_max"});
    geo::BoundingBox box{};
    box.lat_min = get_or(r, "lat_min", -90.0);
    box.lat_max = get_or(r, "lat_max", 90.0);
    box.lon_min = get_or(r, "lon_min", -180.0);
    box.lon_max = get_or(r, "lon_max", 180.0);
    return box;
}

} // namespace

ScenarioConfig parse_config(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& e) {
        bad(std::string("not valid JSON: ") + e.what());
    }
    expect_keys(doc, "top level",
                {"seed", "horizon_minutes", "horizon_days", "day_origin_minute", "fleet",
                 "chargers", "matching", "charging", "distance", "dataset", "placement",
                 "metrics"});

    ScenarioConfig cfg;
    cfg.seed = get_or<std::uint64_t>(doc, "seed", 1);
    if (doc.contains("horizon_days")) {
        cfg.horizon_minutes = get_or(doc, "horizon_days", 1.0) * 1440.0;
    }
    cfg.horizon_minutes = get_or(doc, "horizon_minutes", cfg.horizon_minutes);
    if (doc.contains("day_origin_minute")) {
        cfg.day_origin_minute = get_or(doc, "day_origin_minute", 0.0);
    }

    if (doc.contains("fleet")) {
        const json& f = doc["fleet"];
        expect_keys(f, "fleet",
                    {"size", "initial_soc", "battery_kwh", "consumption_wh_per_mile",
                     "charge_rate_kw", "velocity_mph"});
        cfg.fleet_size = get_or(f, "size", cfg.fleet_size);
        cfg.initial_soc = get_or(f, "initial_soc", cfg.initial_soc);
        cfg.energy.battery_kwh = get_or(f, "battery_kwh", cfg.energy.battery_kwh);
        cfg.energy.consumption_wh_per_mile =
            get_or(f, "consumption_wh_per_mile", cfg.energy.consumption_wh_per_mile);
        cfg.energy.charge_rate_kw = get_or(f, "charge_rate_kw", cfg.energy.charge_rate_kw);
        cfg.velocity_mph = get_or(f, "velocity_mph", cfg.velocity_mph);
    }

    if (doc.contains("chargers")) {
        const json& c = doc["chargers"];
        expect_keys(c, "chargers", {"count", "posts"});
        cfg.charger_count = get_or(c, "count", cfg.charger_count);
        cfg.posts_per_charger = get_or(c, "posts", cfg.posts_per_charger);
    }

    if (doc.contains("matching")) {
        const json& m = doc["matching"];
        expect_keys(m, "matching",
                    {"kind", "d", "filter", "min_charge_minutes", "min_end_soc", "adaptive"});
        const std::string kind = get_or<std::string>(m, "kind", "power_of_d");
        if (kind == "closest") {
            cfg.matching.kind = MatchingConfig::Kind::closest;
        } else if (kind == "closest_available") {
            cfg.matching.kind = MatchingConfig::Kind::closest_available;
        } else if (kind == "power_of_d") {
            cfg.matching.kind = MatchingConfig::Kind::power_of_d;
        } else {
            bad("matching.kind must be closest | closest_available | power_of_d");
        }
        cfg.matching.d = get_or(m, "d", cfg.matching.d);
        const std::string filter = get_or<std::string>(m, "filter", "idle_charging_waiting");
        if (filter == "only_idle") {
            cfg.matching.filter.kind = dispatch::FilterKind::only_idle;
        } else if (filter == "idle_charging_waiting") {
            cfg.matching.filter.kind = dispatch::FilterKind::idle_charging_waiting;
        } else if (filter == "idle_charging_waiting_driving") {
            cfg.matching.filter.kind = dispatch::FilterKind::idle_charging_waiting_driving;
        } else if (filter == "min_charge_time") {
            cfg.matching.filter.kind = dispatch::FilterKind::min_charge_time;
        } else {
            bad("matching.filter must be only_idle | idle_charging_waiting | "
                "idle_charging_waiting_driving | min_charge_time");
        }
        cfg.matching.filter.min_charge_minutes =
            get_or(m, "min_charge_minutes", cfg.matching.filter.min_charge_minutes);
        cfg.matching.min_end_soc = get_or(m, "min_end_soc", cfg.matching.min_end_soc);
        if (m.contains("adaptive")) {
            const json& a = m["adaptive"];
            expect_keys(a, "matching.adaptive",
                        {"enabled", "initial_d", "period", "threshold", "high_soc"});
            cfg.matching.adaptive.enabled = get_or(a, "enabled", false);
            cfg.matching.adaptive.initial_d = get_or(a, "initial_d", cfg.matching.adaptive.initial_d);
            cfg.matching.adaptive.period = get_or(a, "period", cfg.matching.adaptive.period);
            cfg.matching.adaptive.threshold =
                get_or(a, "threshold", cfg.matching.adaptive.threshold);
            cfg.matching.adaptive.high_soc = get_or(a, "high_soc", cfg.matching.adaptive.high_soc);
        }
    }

    if (doc.contains("charging")) {
        const json& c = doc["charging"];
        expect_keys(c, "charging",
                    {"schedule", "custom_table", "alpha", "assignment", "d", "interrupt"});
        const std::string sched = get_or<std::string>(c, "schedule", "always");
        if (sched == "always") {
            cfg.charging.schedule = ChargingConfig::Schedule::always;
        } else if (sched == "night") {
            cfg.charging.schedule = ChargingConfig::Schedule::night;
        } else if (sched == "custom") {
            cfg.charging.schedule = ChargingConfig::Schedule::custom;
        } else {
            bad("charging.schedule must be always | night | custom");
        }
        if (c.contains("custom_table")) {
            for (const auto& row : c["custom_table"]) {
                if (!row.is_array() || row.size() != 2) bad("custom_table rows must be [minute, C]");
                cfg.charging.custom_table.emplace_back(row[0].get<double>(), row[1].get<double>());
            }
        }
        cfg.charging.alpha = get_or(c, "alpha", cfg.charging.alpha);
        const std::string assign = get_or<std::string>(c, "assignment", "closest_available");
        if (assign == "closest_available") {
            cfg.charging.assignment.kind = charging::AssignmentRule::Kind::closest_available;
        } else if (assign == "power_of_d") {
            cfg.charging.assignment.kind = charging::AssignmentRule::Kind::power_of_d;
        } else {
            bad("charging.assignment must be closest_available | power_of_d");
        }
        cfg.charging.assignment.d = get_or(c, "d", cfg.charging.assignment.d);
        cfg.charging.interrupt = get_or(c, "interrupt", cfg.charging.interrupt);
    }

    if (doc.contains("distance")) {
        const json& d = doc["distance"];
        expect_keys(d, "distance", {"mode", "correction_factor", "fit_from_dataset", "train_fraction"});
        const std::string mode = get_or<std::string>(d, "mode", "haversine");
        if (mode == "haversine") {
            cfg.distance.mode = geo::DistanceMode::haversine;
        } else if (mode == "manhattan") {
            cfg.distance.mode = geo::DistanceMode::manhattan;
        } else {
            bad("distance.mode must be haversine | manhattan");
        }
        cfg.distance.correction_factor =
            get_or(d, "correction_factor", cfg.distance.correction_factor);
        cfg.distance.fit_from_dataset = get_or(d, "fit_from_dataset", false);
        cfg.distance.train_fraction = get_or(d, "train_fraction", cfg.distance.train_fraction);
    }

    if (doc.contains("dataset")) {
        const json& d = doc["dataset"];
        expect_keys(d, "dataset",
                    {"kind", "rate_per_min", "region", "path", "schema", "cleaning"});
        const std::string kind = get_or<std::string>(d, "kind", "synthetic");
        if (kind == "synthetic") {
            cfg.dataset.kind = DatasetConfig::Kind::synthetic;
        } else if (kind == "csv") {
            cfg.dataset.kind = DatasetConfig::Kind::csv;
        } else {
            bad("dataset.kind must be synthetic | csv");
        }
        cfg.dataset.rate_per_min = get_or(d, "rate_per_min", cfg.dataset.rate_per_min);
        if (d.contains("region")) cfg.dataset.region = parse_region(d["region"]);
        cfg.dataset.path = get_or<std::string>(d, "path", "");
        if (d.contains("schema")) {
            const json& s = d["schema"];
            expect_keys(s, "dataset.schema",
                        {"pickup_datetime", "pickup_lat", "pickup_lon", "dropoff_lat",
                         "dropoff_lon", "trip_distance", "dropoff_datetime"});
            auto& sm = cfg.dataset.schema;
            sm.pickup_datetime = get_or<std::string>(s, "pickup_datetime", sm.pickup_datetime);
            sm.pickup_lat = get_or<std::string>(s, "pickup_lat", sm.pickup_lat);
            sm.pickup_lon = get_or<std::string>(s, "pickup_lon", sm.pickup_lon);
            sm.dropoff_lat = get_or<std::string>(s, "dropoff_lat", sm.dropoff_lat);
            sm.dropoff_lon = get_or<std::string>(s, "dropoff_lon", sm.dropoff_lon);
            sm.trip_distance = get_or<std::string>(s, "trip_distance", sm.trip_distance);
            sm.dropoff_datetime = get_or<std::string>(s, "dropoff_datetime", sm.dropoff_datetime);
        }
        if (d.contains("cleaning")) {
            const json& f = d["cleaning"];
            expect_keys(f, "dataset.cleaning",
                        {"lower_percentile", "upper_percentile", "window_start", "window_end",
                         "max_distance_miles", "require_positive_distance"});
            auto& cf = cfg.dataset.cleaning;
            cf.lower_percentile = get_or(f, "lower_percentile", cf.lower_percentile);
            cf.upper_percentile = get_or(f, "upper_percentile", cf.upper_percentile);
            if (f.contains("window_start"))
                cf.window_start = get_or<std::string>(f, "window_start", "");
            if (f.contains("window_end")) cf.window_end = get_or<std::string>(f, "window_end", "");
            cf.max_distance_miles = get_or(f, "max_distance_miles", cf.max_distance_miles);
            cf.require_positive_distance =
                get_or(f, "require_positive_distance", cf.require_positive_distance);
        }
    }

    if (doc.contains("placement")) {
        const json& p = doc["placement"];
        expect_keys(p, "placement", {"chargers", "percentile_low", "percentile_high"});
        const std::string rule = get_or<std::string>(p, "chargers", "sample_from_origins");
        if (rule == "uniform_in_bounding_box") {
            cfg.placement.chargers = ChargerPlacement::uniform_in_bounding_box;
        } else if (rule == "sample_from_origins") {
            cfg.placement.chargers = ChargerPlacement::sample_from_origins;
        } else {
            bad("placement.chargers must be uniform_in_bounding_box | sample_from_origins");
        }
        cfg.placement.percentile_low = get_or(p, "percentile_low", cfg.placement.percentile_low);
        cfg.placement.percentile_high = get_or(p, "percentile_high", cfg.placement.percentile_high);
    }

    if (doc.contains("metrics")) {
        const json& m = doc["metrics"];
        expect_keys(m, "metrics", {"timeseries_resolution_min", "pickup_bin_minutes"});
        cfg.metrics.timeseries_resolution_min =
            get_or(m, "timeseries_resolution_min", cfg.metrics.timeseries_resolution_min);
        cfg.metrics.pickup_bin_minutes =
            get_or(m, "pickup_bin_minutes", cfg.metrics.pickup_bin_minutes);
    }

    validate_config(cfg);
    return cfg;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate_config(const ScenarioConfig& cfg) {
    if (cfg.fleet_size <= 0) bad("fleet.size must be positive");
    if (cfg.charger_count <= 0) bad("chargers.count must be positive");
    if (cfg.posts_per_charger <= 0) bad("chargers.posts must be positive");
    if (!(cfg.horizon_minutes > 0.0)) bad("horizon must be positive");
    if (cfg.initial_soc < 0.0 || cfg.initial_soc > 1.0) bad("fleet.initial_soc must lie in [0,1]");
    if (!(cfg.energy.battery_kwh > 0.0)) bad("fleet.battery_kwh must be positive");
    if (!(cfg.energy.consumption_wh_per_mile > 0.0))
        bad("fleet.consumption_wh_per_mile must be positive");
    if (!(cfg.energy.charge_rate_kw > 0.0)) bad("fleet.charge_rate_kw must be positive");
    if (!(cfg.velocity_mph > 0.0)) bad("fleet.velocity_mph must be positive");
    if (cfg.matching.d < 1.0) bad("matching.d must be at least 1");
    if (cfg.matching.adaptive.initial_d < 1) bad("matching.adaptive.initial_d must be at least 1");
    if (cfg.matching.adaptive.period <= 0) bad("matching.adaptive.period must be positive");
    if (cfg.matching.adaptive.high_soc < 0.0 || cfg.matching.adaptive.high_soc > 1.0)
        bad("matching.adaptive.high_soc must lie in [0,1]");
    if (cfg.charging.alpha < 0.0 || cfg.charging.alpha > 1.0)
        bad("charging.alpha must lie in [0,1]");
    if (cfg.charging.assignment.d < 1) bad("charging.d must be at least 1");
    if (!(cfg.distance.correction_factor > 0.0)) bad("distance.correction_factor must be positive");
    if (cfg.dataset.kind == DatasetConfig::Kind::synthetic) {
        if (!(cfg.dataset.rate_per_min > 0.0)) bad("dataset.rate_per_min must be positive");
        if (!cfg.dataset.region) bad("synthetic dataset needs a region");
        if (cfg.dataset.region->lat_min >= cfg.dataset.region->lat_max ||
            cfg.dataset.region->lon_min >= cfg.dataset.region->lon_max) {
            bad("region bounds are inverted or empty");
        }
    } else if (cfg.dataset.path.empty()) {
        bad("csv dataset needs a path");
    }
    schedule_from_config(cfg.charging); // validates custom tables
    if (!(cfg.metrics.timeseries_resolution_min > 0.0)) bad("metrics resolution must be positive");
    if (!(cfg.metrics.pickup_bin_minutes > 0.0)) bad("pickup bin width must be positive");
}

charging::ThresholdSchedule schedule_from_config(const ChargingConfig& cfg) {
    switch (cfg.schedule) {
        case ChargingConfig::Schedule::always: return charging::ThresholdSchedule::always();
        case ChargingConfig::Schedule::night: return charging::ThresholdSchedule::night();
        case ChargingConfig::Schedule::custom:
            return charging::ThresholdSchedule::custom(cfg.custom_table);
    }
    return charging::ThresholdSchedule::always();
}

std::string config_to_json(const ScenarioConfig& cfg) {
    json doc;
    doc["seed"] = cfg.seed;
    doc["horizon_minutes"] = cfg.horizon_minutes;
    if (cfg.day_origin_minute) doc["day_origin_minute"] = *cfg.day_origin_minute;
    doc["fleet"] = {{"size", cfg.fleet_size},
                    {"initial_soc", cfg.initial_soc},
                    {"battery_kwh", cfg.energy.battery_kwh},
                    {"consumption_wh_per_mile", cfg.energy.consumption_wh_per_mile},
                    {"charge_rate_kw", cfg.energy.charge_rate_kw},
                    {"velocity_mph", cfg.velocity_mph}};
    doc["chargers"] = {{"count", cfg.charger_count}, {"posts", cfg.posts_per_charger}};

    const char* kind = cfg.matching.kind == MatchingConfig::Kind::closest ? "closest"
                       : cfg.matching.kind == MatchingConfig::Kind::closest_available
                           ? "closest_available"
                           : "power_of_d";
    const char* filter = "idle_charging_waiting";
    switch (cfg.matching.filter.kind) {
        case dispatch::FilterKind::only_idle: filter = "only_idle"; break;
        case dispatch::FilterKind::idle_charging_waiting: break;
        case dispatch::FilterKind::idle_charging_waiting_driving:
            filter = "idle_charging_waiting_driving";
            break;
        case dispatch::FilterKind::min_charge_time: filter = "min_charge_time"; break;
    }
    doc["matching"] = {{"kind", kind},
                       {"d", cfg.matching.d},
                       {"filter", filter},
                       {"min_charge_minutes", cfg.matching.filter.min_charge_minutes},
                       {"min_end_soc", cfg.matching.min_end_soc},
                       {"adaptive",
                        {{"enabled", cfg.matching.adaptive.enabled},
                         {"initial_d", cfg.matching.adaptive.initial_d},
                         {"period", cfg.matching.adaptive.period},
                         {"threshold", cfg.matching.adaptive.threshold},
                         {"high_soc", cfg.matching.adaptive.high_soc}}}};

    const char* sched = cfg.charging.schedule == ChargingConfig::Schedule::always  ? "always"
                        : cfg.charging.schedule == ChargingConfig::Schedule::night ? "night"
                                                                                   : "custom";
    json table = json::array();
    for (const auto& [start, c] : cfg.charging.custom_table) table.push_back({start, c});
    doc["charging"] = {{"schedule", sched},
                       {"custom_table", table},
                       {"alpha", cfg.charging.alpha},
                       {"assignment",
                        cfg.charging.assignment.kind ==
                                charging::AssignmentRule::Kind::closest_available
                            ? "closest_available"
                            : "power_of_d"},
                       {"d", cfg.charging.assignment.d},
                       {"interrupt", cfg.charging.interrupt}};

    doc["distance"] = {{"mode", cfg.distance.mode == geo::DistanceMode::haversine ? "haversine"
                                                                                  : "manhattan"},
                       {"correction_factor", cfg.distance.correction_factor},
                       {"fit_from_dataset", cfg.distance.fit_from_dataset},
                       {"train_fraction", cfg.distance.train_fraction}};

    json ds;
    ds["kind"] = cfg.dataset.kind == DatasetConfig::Kind::synthetic ? "synthetic" : "csv";
    if (cfg.dataset.kind == DatasetConfig::Kind::synthetic) {
        ds["rate_per_min"] = cfg.dataset.rate_per_min;
        if (cfg.dataset.region) {
            ds["region"] = {{"lat_min", cfg.dataset.region->lat_min},
                            {"lat_max", cfg.dataset.region->lat_max},
                            {"lon_min", cfg.dataset.region->lon_min},
                            {"lon_max", cfg.dataset.region->lon_max}};
        }
    } else {
        ds["path"] = cfg.dataset.path;
    }
    doc["dataset"] = ds;
    doc["placement"] = {{"chargers", cfg.placement.chargers == ChargerPlacement::sample_from_origins
                                         ? "sample_from_origins"
                                         : "uniform_in_bounding_box"},
                        {"percentile_low", cfg.placement.percentile_low},
                        {"percentile_high", cfg.placement.percentile_high}};
    doc["metrics"] = {{"timeseries_resolution_min", cfg.metrics.timeseries_resolution_min},
                      {"pickup_bin_minutes", cfg.metrics.pickup_bin_minutes}};
    return doc.dump(2);
}

} // namespace evfleet
