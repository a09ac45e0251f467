#include "evfleet/geo_kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <cstring>

namespace evfleet::geo {

PointTrig make_point_trig(const GeoPoint& p) {
    const double lat = deg2rad(p.lat);
    const double lon = deg2rad(p.lon);
    return PointTrig{
        std::sin(lat * 0.5), std::cos(lat * 0.5),
        std::sin(lon * 0.5), std::cos(lon * 0.5),
        std::cos(lat),       lat, lon,
    };
}

void TrigTable::resize(std::size_t n) {
    sin_half_lat_.resize(n);
    cos_half_lat_.resize(n);
    sin_half_lon_.resize(n);
    cos_half_lon_.resize(n);
    cos_lat_.resize(n);
    lat_rad_.resize(n);
    lon_rad_.resize(n);
}

void TrigTable::set(std::size_t i, const GeoPoint& p) {
    const PointTrig t = make_point_trig(p);
    sin_half_lat_[i] = t.sin_half_lat;
    cos_half_lat_[i] = t.cos_half_lat;
    sin_half_lon_[i] = t.sin_half_lon;
    cos_half_lon_[i] = t.cos_half_lon;
    cos_lat_[i] = t.cos_lat;
    lat_rad_[i] = t.lat_rad;
    lon_rad_[i] = t.lon_rad;
}

void haversine_h_batch_scalar(const PointTrig& o, const TrigTable& pts, double* out,
                              std::size_t n) {
    const double* shl = pts.sin_half_lat();
    const double* chl = pts.cos_half_lat();
    const double* shn = pts.sin_half_lon();
    const double* chn = pts.cos_half_lon();
    const double* cl = pts.cos_lat();
    for (std::size_t i = 0; i < n; ++i) {
        // sin((a-b)/2) expanded over the cached half-angle terms
        const double sdlat = shl[i] * o.cos_half_lat - chl[i] * o.sin_half_lat;
        const double sdlon = shn[i] * o.cos_half_lon - chn[i] * o.sin_half_lon;
        out[i] = sdlat * sdlat + cl[i] * o.cos_lat * (sdlon * sdlon);
    }
}

void manhattan_angle_batch_scalar(const PointTrig& o, const TrigTable& pts, double* out,
                                  std::size_t n) {
    const double* lat = pts.lat_rad();
    const double* lon = pts.lon_rad();
    const double* shl = pts.sin_half_lat();
    const double* chl = pts.cos_half_lat();
    constexpr double two_pi = 2.0 * kPi;
    for (std::size_t i = 0; i < n; ++i) {
        const double dlat = std::fabs(lat[i] - o.lat_rad);
        double dlon = lon[i] - o.lon_rad;
        dlon -= two_pi * std::round(dlon / two_pi);
        // cos of the mean latitude via the cached half-angle terms
        const double cos_mid = chl[i] * o.cos_half_lat - shl[i] * o.sin_half_lat;
        out[i] = dlat + cos_mid * std::fabs(dlon);
    }
}

namespace {

SimdLevel resolve_simd_level() {
#if defined(EVFLEET_HAVE_AVX2)
    if (const char* env = std::getenv("EVFLEET_SIMD")) {
        if (std::strcmp(env, "scalar") == 0) return SimdLevel::scalar;
        if (std::strcmp(env, "avx2") == 0) return SimdLevel::avx2;
    }
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
        return SimdLevel::avx2;
    }
#endif
    return SimdLevel::scalar;
}

} // namespace

SimdLevel active_simd_level() {
    static const SimdLevel level = resolve_simd_level();
    return level;
}

std::string to_string(SimdLevel level) {
    return level == SimdLevel::avx2 ? "avx2" : "scalar";
}

void haversine_h_batch(const PointTrig& origin, const TrigTable& pts, double* out,
                       std::size_t n) {
#if defined(EVFLEET_HAVE_AVX2)
    if (active_simd_level() == SimdLevel::avx2) {
        haversine_h_batch_avx2(origin, pts, out, n);
        return;
    }
#endif
    haversine_h_batch_scalar(origin, pts, out, n);
}

void manhattan_angle_batch(const PointTrig& origin, const TrigTable& pts, double* out,
                           std::size_t n) {
#if defined(EVFLEET_HAVE_AVX2)
    if (active_simd_level() == SimdLevel::avx2) {
        manhattan_angle_batch_avx2(origin, pts, out, n);
        return;
    }
#endif
    manhattan_angle_batch_scalar(origin, pts, out, n);
}

void batch_rank(const DistanceModel& model, const PointTrig& origin, const TrigTable& pts,
                double* out, std::size_t n) {
    if (model.mode == DistanceMode::haversine) {
        haversine_h_batch(origin, pts, out, n);
    } else {
        manhattan_angle_batch(origin, pts, out, n);
    }
}

double rank_to_miles(const DistanceModel& model, double rank) {
    if (model.mode == DistanceMode::haversine) {
        const double root = std::sqrt(std::max(0.0, rank));
        return 2.0 * kEarthRadiusMiles * std::asin(std::min(1.0, root)) * model.correction_factor;
    }
    return kEarthRadiusMiles * rank * model.correction_factor;
}

} // namespace evfleet::geo
