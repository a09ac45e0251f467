#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "evfleet/geo.hpp"

namespace evfleet::geo {

// Batch distance kernels for the dispatch inner loop: one query point against
// the whole fleet (or all stations) per customer arrival. Trigonometry per
// entity is precomputed once per location commit, so the scan itself is pure
// multiply/add and vectorizes. Kernels come in a scalar reference flavor and
// an AVX2 flavor selected at runtime; both evaluate the same expressions and
// are equivalence-tested against each other.
//
// The haversine kernel emits the intermediate h = sin^2(dlat/2) +
// cos(lat1) cos(lat2) sin^2(dlon/2); miles = 2R asin(sqrt(h)). h is monotone
// in distance, so rankings may be done on either form. The half-angle sines
// are formed as exact angle differences of cached half-angle terms, avoiding
// the cancellation of the 1-cos formulation at city scale.

/// Cached trigonometry for one query point.
struct PointTrig {
    double sin_half_lat, cos_half_lat;
    double sin_half_lon, cos_half_lon;
    double cos_lat;
    double lat_rad, lon_rad;
};

PointTrig make_point_trig(const GeoPoint& p);

/// Structure-of-arrays trig cache for a set of movable points. Entries are
/// refreshed individually whenever the owning entity commits a new location.
class TrigTable {
public:
    void resize(std::size_t n);
    void set(std::size_t i, const GeoPoint& p);
    std::size_t size() const { return sin_half_lat_.size(); }

    const double* sin_half_lat() const { return sin_half_lat_.data(); }
    const double* cos_half_lat() const { return cos_half_lat_.data(); }
    const double* sin_half_lon() const { return sin_half_lon_.data(); }
    const double* cos_half_lon() const { return cos_half_lon_.data(); }
    const double* cos_lat() const { return cos_lat_.data(); }
    const double* lat_rad() const { return lat_rad_.data(); }
    const double* lon_rad() const { return lon_rad_.data(); }

private:
    std::vector<double> sin_half_lat_, cos_half_lat_;
    std::vector<double> sin_half_lon_, cos_half_lon_;
    std::vector<double> cos_lat_, lat_rad_, lon_rad_;
};

using BatchKernelFn = void (*)(const PointTrig& origin, const TrigTable& pts,
                               double* out, std::size_t n);

// Scalar reference kernels.
void haversine_h_batch_scalar(const PointTrig& origin, const TrigTable& pts,
                              double* out, std::size_t n);
void manhattan_angle_batch_scalar(const PointTrig& origin, const TrigTable& pts,
                                  double* out, std::size_t n);

#if defined(EVFLEET_HAVE_AVX2)
// AVX2 variants, compiled in their own TU with -mavx2 -mfma.
void haversine_h_batch_avx2(const PointTrig& origin, const TrigTable& pts,
                            double* out, std::size_t n);
void manhattan_angle_batch_avx2(const PointTrig& origin, const TrigTable& pts,
                                double* out, std::size_t n);
#endif

enum class SimdLevel { scalar, avx2 };

/// The kernel flavor in use: best the CPU supports, overridable with
/// EVFLEET_SIMD=scalar|avx2. Resolved once per process.
SimdLevel active_simd_level();
std::string to_string(SimdLevel level);

/// Dispatching entry points used by the simulator.
void haversine_h_batch(const PointTrig& origin, const TrigTable& pts, double* out, std::size_t n);
void manhattan_angle_batch(const PointTrig& origin, const TrigTable& pts, double* out,
                           std::size_t n);

/// Mode-aware facade: fills out[i] with a rank value monotone in distance.
void batch_rank(const DistanceModel& model, const PointTrig& origin, const TrigTable& pts,
                double* out, std::size_t n);

/// Converts one rank value back to corrected miles.
double rank_to_miles(const DistanceModel& model, double rank);

} // namespace evfleet::geo
