#include "evfleet/trips.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "evfleet/errors.hpp"

namespace evfleet::ingest {

namespace {

// Howard Hinnant's days-from-civil algorithm.
std::int64_t days_from_civil(int y, int m, int d) {
    y -= m <= 2;
    const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
    const unsigned yoe = static_cast<unsigned>(y - era * 400);
    const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2u) / 5u + d - 1u;
    const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
    return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, unsigned& m, unsigned& d) {
    z += 719468;
    const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
    const unsigned doe = static_cast<unsigned>(z - era * 146097);
    const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
    const std::int64_t yr = static_cast<std::int64_t>(yoe) + era * 400;
    const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    const unsigned mp = (5 * doy + 2) / 153;
    d = doy - (153 * mp + 2) / 5 + 1;
    m = mp + (mp < 10 ? 3 : -9);
    y = static_cast<int>(yr + (m <= 2));
}

bool parse_int(std::string_view s, int& out) {
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && p == end;
}

std::vector<std::string_view> split_line(std::string_view line, std::vector<std::string_view>& out) {
    out.clear();
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

bool parse_double(std::string_view s, double& out) {
    s = trim(s);
    const auto* begin = s.data();
    const auto* end = s.data() + s.size();
    auto [p, ec] = std::from_chars(begin, end, out);
    return ec == std::errc{} && p == end;
}

double percentile(std::vector<double> values, double pct) {
    // linear interpolation between closest ranks
    std::sort(values.begin(), values.end());
    if (values.empty()) return 0.0;
    const double rank = pct / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = static_cast<std::size_t>(std::ceil(rank));
    const double frac = rank - static_cast<double>(lo);
    return values[lo] + (values[hi] - values[lo]) * frac;
}

} // namespace

std::optional<double> parse_iso_minutes(std::string_view text) {
    text = trim(text);
    // YYYY-MM-DD[ T]HH:MM:SS[.fff]
    if (text.size() < 19) return std::nullopt;
    if (text[4] != '-' || text[7] != '-' || (text[10] != ' ' && text[10] != 'T') ||
        text[13] != ':' || text[16] != ':') {
        return std::nullopt;
    }
    int y, mo, d, h, mi, s;
    if (!parse_int(text.substr(0, 4), y) || !parse_int(text.substr(5, 2), mo) ||
        !parse_int(text.substr(8, 2), d) || !parse_int(text.substr(11, 2), h) ||
        !parse_int(text.substr(14, 2), mi) || !parse_int(text.substr(17, 2), s)) {
        return std::nullopt;
    }
    if (mo < 1 || mo > 12 || d < 1 || d > 31 || h > 23 || mi > 59 || s > 60) return std::nullopt;
    double frac = 0.0;
    if (text.size() > 19) {
        if (text[19] != '.') return std::nullopt;
        double parsed = 0.0;
        if (!parse_double(text.substr(19), parsed)) return std::nullopt;
        frac = parsed;
    }
    const double seconds =
        static_cast<double>(days_from_civil(y, mo, d)) * 86400.0 + h * 3600.0 + mi * 60.0 + s + frac;
    return seconds / 60.0;
}

std::string format_iso_minutes(double epoch_minutes) {
    const double total_seconds = epoch_minutes * 60.0;
    double whole = std::floor(total_seconds);
    double frac = total_seconds - whole;
    // keep microsecond resolution; carry any rounding into the whole part
    double micros = std::round(frac * 1e6);
    if (micros >= 1e6) {
        micros -= 1e6;
        whole += 1.0;
    }
    const auto secs = static_cast<std::int64_t>(whole);
    std::int64_t days = secs / 86400;
    std::int64_t rem = secs % 86400;
    if (rem < 0) {
        rem += 86400;
        days -= 1;
    }
    int y;
    unsigned mo, d;
    civil_from_days(days, y, mo, d);
    const int h = static_cast<int>(rem / 3600);
    const int mi = static_cast<int>(rem % 3600 / 60);
    const int s = static_cast<int>(rem % 60);
    char buf[40];
    if (micros > 0.0) {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d.%06d", y, mo, d, h, mi, s,
                      static_cast<int>(micros));
    } else {
        std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02d", y, mo, d, h, mi, s);
    }
    return buf;
}

CoordinateBounds resolve_bounds(const TripTable& table, double lower_percentile,
                                double upper_percentile) {
    if (lower_percentile < 0.0 || upper_percentile > 100.0 ||
        lower_percentile >= upper_percentile) {
        throw ConfigError("percentile bounds must satisfy 0 <= lower < upper <= 100");
    }
    std::vector<double> lats, lons;
    lats.reserve(table.rows.size() * 2);
    lons.reserve(table.rows.size() * 2);
    for (const TripRecord& r : table.rows) {
        lats.push_back(r.origin.lat);
        lats.push_back(r.destination.lat);
        lons.push_back(r.origin.lon);
        lons.push_back(r.destination.lon);
    }
    if (lats.empty()) {
        return CoordinateBounds{-90.0, 90.0, -180.0, 180.0};
    }
    return CoordinateBounds{
        percentile(lats, lower_percentile),
        percentile(lats, upper_percentile),
        percentile(lons, lower_percentile),
        percentile(lons, upper_percentile),
    };
}

TripTable clean_table(const TripTable& table, const CleaningFilter& filter,
                      const CoordinateBounds& bounds) {
    TripTable out;
    auto in_bounds = [&](const geo::GeoPoint& p) {
        return p.lat >= bounds.lat_lo && p.lat <= bounds.lat_hi && p.lon >= bounds.lon_lo &&
               p.lon <= bounds.lon_hi && p.lat >= -90.0 && p.lat <= 90.0 && p.lon >= -180.0 &&
               p.lon <= 180.0;
    };
    for (const TripRecord& r : table.rows) {
        if (!in_bounds(r.origin) || !in_bounds(r.destination)) continue;
        if (r.has_distance) {
            if (filter.require_positive_distance && !(r.recorded_distance > 0.0)) continue;
            if (r.recorded_distance > filter.max_distance_miles) continue;
        }
        out.rows.push_back(r);
    }
    std::stable_sort(out.rows.begin(), out.rows.end(),
                     [](const TripRecord& a, const TripRecord& b) {
                         return a.arrival_time < b.arrival_time;
                     });
    return out;
}

TripTable clean_table(const TripTable& table, const CleaningFilter& filter) {
    return clean_table(table, filter,
                       resolve_bounds(table, filter.lower_percentile, filter.upper_percentile));
}

TripTable load_trip_records(const std::string& path, const SchemaMap& schema,
                            const CleaningFilter& filter, LoadReport* report) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open trip file: " + path);
    }
    std::string header;
    if (!std::getline(in, header)) {
        if (report) *report = LoadReport{};
        return {};
    }

    std::vector<std::string_view> cols;
    split_line(header, cols);
    auto column_index = [&](const std::string& name, bool required) -> int {
        if (name.empty()) return -1;
        for (std::size_t i = 0; i < cols.size(); ++i) {
            if (trim(cols[i]) == name) return static_cast<int>(i);
        }
        if (required) throw SchemaError("missing column '" + name + "' in " + path);
        return -1;
    };
    const int c_time = column_index(schema.pickup_datetime, true);
    const int c_plat = column_index(schema.pickup_lat, true);
    const int c_plon = column_index(schema.pickup_lon, true);
    const int c_dlat = column_index(schema.dropoff_lat, true);
    const int c_dlon = column_index(schema.dropoff_lon, true);
    const int c_dist = column_index(schema.trip_distance, true);

    std::optional<double> window_start, window_end;
    if (filter.window_start) {
        window_start = parse_iso_minutes(*filter.window_start);
        if (!window_start) throw ConfigError("bad window_start datetime: " + *filter.window_start);
    }
    if (filter.window_end) {
        window_end = parse_iso_minutes(*filter.window_end);
        if (!window_end) throw ConfigError("bad window_end datetime: " + *filter.window_end);
    }

    struct RawRow {
        double epoch_min;
        TripRecord rec;
    };
    std::vector<RawRow> raw;
    LoadReport rep;
    std::string line;
    std::vector<std::string_view> fields;
    const std::size_t need =
        static_cast<std::size_t>(std::max({c_time, c_plat, c_plon, c_dlat, c_dlon, c_dist})) + 1;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++rep.rows_in;
        split_line(line, fields);
        if (fields.size() < need) {
            ++rep.rows_unparseable;
            continue;
        }
        RawRow row;
        const auto t = parse_iso_minutes(fields[c_time]);
        if (!t || !parse_double(fields[c_plat], row.rec.origin.lat) ||
            !parse_double(fields[c_plon], row.rec.origin.lon) ||
            !parse_double(fields[c_dlat], row.rec.destination.lat) ||
            !parse_double(fields[c_dlon], row.rec.destination.lon) ||
            !parse_double(fields[c_dist], row.rec.recorded_distance)) {
            ++rep.rows_unparseable;
            continue;
        }
        row.epoch_min = *t;
        row.rec.has_distance = true;
        if (window_start && row.epoch_min < *window_start) continue;
        if (window_end && row.epoch_min >= *window_end) continue;
        raw.push_back(row);
    }

    TripTable table;
    if (!raw.empty()) {
        double t0;
        if (window_start) {
            t0 = *window_start;
        } else {
            // midnight of the earliest row's day, so minute 0 is a day boundary
            double earliest = raw.front().epoch_min;
            for (const RawRow& r : raw) earliest = std::min(earliest, r.epoch_min);
            t0 = std::floor(earliest / 1440.0) * 1440.0;
        }
        rep.epoch_start_minute = t0;
        rep.day_origin_minute = t0 - std::floor(t0 / 1440.0) * 1440.0;
        table.rows.reserve(raw.size());
        for (RawRow& r : raw) {
            r.rec.arrival_time = r.epoch_min - t0;
            table.rows.push_back(r.rec);
        }
        const CoordinateBounds bounds =
            resolve_bounds(table, filter.lower_percentile, filter.upper_percentile);
        rep.bounds = bounds;
        table = clean_table(table, filter, bounds);
    }
    rep.rows_kept = table.rows.size();
    if (report) *report = rep;
    return table;
}

RegressionReport fit_correction_factor(const TripTable& table, double train_fraction, Rng& rng) {
    std::vector<std::size_t> with_distance;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        if (table.rows[i].has_distance) with_distance.push_back(i);
    }
    if (with_distance.size() < 2) {
        throw ConfigError("regression needs at least 2 rows with a recorded distance");
    }
    if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
        throw ConfigError("train_fraction must lie in (0, 1]");
    }
    shuffle(with_distance, rng);
    std::size_t n_train = static_cast<std::size_t>(
        std::floor(train_fraction * static_cast<double>(with_distance.size())));
    n_train = std::clamp<std::size_t>(n_train, 2, with_distance.size());

    auto xy = [&](std::size_t idx) {
        const TripRecord& r = table.rows[with_distance[idx]];
        return std::pair<double, double>{geo::haversine_miles(r.origin, r.destination),
                                         r.recorded_distance};
    };

    double sx = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) {
        const auto [x, y] = xy(i);
        sx += x;
        sy += y;
    }
    const double mx = sx / static_cast<double>(n_train);
    const double my = sy / static_cast<double>(n_train);
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) {
        const auto [x, y] = xy(i);
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    if (sxx == 0.0) {
        throw ConfigError("degenerate regression: great-circle distances have zero variance");
    }

    RegressionReport rep;
    rep.train_fraction = train_fraction;
    rep.n_train = n_train;
    rep.n_test = with_distance.size() - n_train;
    rep.slope = sxy / sxx;
    rep.intercept = my - rep.slope * mx;
    double sse = 0.0;
    for (std::size_t i = 0; i < n_train; ++i) {
        const auto [x, y] = xy(i);
        const double e = y - (rep.slope * x + rep.intercept);
        sse += e * e;
    }
    rep.r_squared = syy == 0.0 ? 1.0 : 1.0 - sse / syy;
    double test_sse = 0.0;
    for (std::size_t i = n_train; i < with_distance.size(); ++i) {
        const auto [x, y] = xy(i);
        const double e = y - (rep.slope * x + rep.intercept);
        test_sse += e * e;
    }
    rep.test_mse = rep.n_test == 0 ? 0.0 : test_sse / static_cast<double>(rep.n_test);
    return rep;
}

TripTable generate_poisson_trips(double rate_per_min, double horizon_min,
                                 const geo::BoundingBox& region, const geo::DistanceModel& model,
                                 Rng& rng) {
    if (!(rate_per_min > 0.0)) {
        throw ConfigError("arrival rate must be positive");
    }
    TripTable table;
    double t = rng.exponential(rate_per_min);
    while (t <= horizon_min) {
        TripRecord r;
        r.arrival_time = t;
        r.origin = geo::uniform_sphere_point(rng, region);
        r.destination = geo::uniform_sphere_point(rng, region);
        r.recorded_distance = geo::corrected_distance(r.origin, r.destination, model);
        r.has_distance = true;
        table.rows.push_back(r);
        t += rng.exponential(rate_per_min);
    }
    return table;
}

std::vector<TripRequest> arrival_stream(const TripTable& table) {
    std::vector<TripRequest> out;
    out.reserve(table.rows.size());
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const TripRecord& r = table.rows[i];
        TripRequest t;
        t.id = static_cast<TripId>(i);
        t.origin = r.origin;
        t.destination = r.destination;
        t.arrival_time = r.arrival_time;
        t.trip_distance = r.recorded_distance;
        t.state = TripState::waiting;
        out.push_back(t);
    }
    return out;
}

} // namespace evfleet::ingest
