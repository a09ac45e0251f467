// AVX2 flavor of the batch distance kernels. Same expressions as the scalar
// reference in geo_kernels.cpp, four lanes at a time; the remainder tail runs
// through the scalar kernel.

#include "evfleet/geo_kernels.hpp"

#if defined(EVFLEET_HAVE_AVX2)

#include <immintrin.h>

#include <cmath>

namespace evfleet::geo {

namespace {

// Scalar kernels over pts[offset..offset+n) writing out[0..n).
void haversine_tail(const PointTrig& o, const TrigTable& pts, std::size_t offset, double* out,
                    std::size_t n) {
    const double* shl = pts.sin_half_lat() + offset;
    const double* chl = pts.cos_half_lat() + offset;
    const double* shn = pts.sin_half_lon() + offset;
    const double* chn = pts.cos_half_lon() + offset;
    const double* cl = pts.cos_lat() + offset;
    for (std::size_t i = 0; i < n; ++i) {
        const double sdlat = shl[i] * o.cos_half_lat - chl[i] * o.sin_half_lat;
        const double sdlon = shn[i] * o.cos_half_lon - chn[i] * o.sin_half_lon;
        out[i] = sdlat * sdlat + cl[i] * o.cos_lat * (sdlon * sdlon);
    }
}

void manhattan_tail(const PointTrig& o, const TrigTable& pts, std::size_t offset, double* out,
                    std::size_t n) {
    const double* lat = pts.lat_rad() + offset;
    const double* lon = pts.lon_rad() + offset;
    const double* shl = pts.sin_half_lat() + offset;
    const double* chl = pts.cos_half_lat() + offset;
    constexpr double two_pi = 2.0 * kPi;
    for (std::size_t i = 0; i < n; ++i) {
        const double dlat = std::fabs(lat[i] - o.lat_rad);
        double dlon = lon[i] - o.lon_rad;
        dlon -= two_pi * std::round(dlon / two_pi);
        const double cos_mid = chl[i] * o.cos_half_lat - shl[i] * o.sin_half_lat;
        out[i] = dlat + cos_mid * std::fabs(dlon);
    }
}

inline __m256d abs_pd(__m256d x) {
    const __m256d mask = _mm256_castsi256_pd(_mm256_set1_epi64x(0x7fffffffffffffffLL));
    return _mm256_and_pd(x, mask);
}

} // namespace

void haversine_h_batch_avx2(const PointTrig& o, const TrigTable& pts, double* out,
                            std::size_t n) {
    const double* shl = pts.sin_half_lat();
    const double* chl = pts.cos_half_lat();
    const double* shn = pts.sin_half_lon();
    const double* chn = pts.cos_half_lon();
    const double* cl = pts.cos_lat();

    const __m256d o_shl = _mm256_set1_pd(o.sin_half_lat);
    const __m256d o_chl = _mm256_set1_pd(o.cos_half_lat);
    const __m256d o_shn = _mm256_set1_pd(o.sin_half_lon);
    const __m256d o_chn = _mm256_set1_pd(o.cos_half_lon);
    const __m256d o_cl = _mm256_set1_pd(o.cos_lat);

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d sdlat = _mm256_fmsub_pd(_mm256_loadu_pd(shl + i), o_chl,
                                              _mm256_mul_pd(_mm256_loadu_pd(chl + i), o_shl));
        const __m256d sdlon = _mm256_fmsub_pd(_mm256_loadu_pd(shn + i), o_chn,
                                              _mm256_mul_pd(_mm256_loadu_pd(chn + i), o_shn));
        const __m256d coslats = _mm256_mul_pd(_mm256_loadu_pd(cl + i), o_cl);
        const __m256d lon_term = _mm256_mul_pd(coslats, _mm256_mul_pd(sdlon, sdlon));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(sdlat, sdlat, lon_term));
    }
    haversine_tail(o, pts, i, out + i, n - i);
}

void manhattan_angle_batch_avx2(const PointTrig& o, const TrigTable& pts, double* out,
                                std::size_t n) {
    const double* lat = pts.lat_rad();
    const double* lon = pts.lon_rad();
    const double* shl = pts.sin_half_lat();
    const double* chl = pts.cos_half_lat();

    const __m256d o_lat = _mm256_set1_pd(o.lat_rad);
    const __m256d o_lon = _mm256_set1_pd(o.lon_rad);
    const __m256d o_shl = _mm256_set1_pd(o.sin_half_lat);
    const __m256d o_chl = _mm256_set1_pd(o.cos_half_lat);
    const __m256d two_pi = _mm256_set1_pd(2.0 * kPi);
    const __m256d inv_two_pi = _mm256_set1_pd(1.0 / (2.0 * kPi));

    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d dlat = abs_pd(_mm256_sub_pd(_mm256_loadu_pd(lat + i), o_lat));
        __m256d dlon = _mm256_sub_pd(_mm256_loadu_pd(lon + i), o_lon);
        const __m256d wraps = _mm256_round_pd(_mm256_mul_pd(dlon, inv_two_pi),
                                              _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
        dlon = _mm256_fnmadd_pd(wraps, two_pi, dlon);
        const __m256d cos_mid = _mm256_fmsub_pd(_mm256_loadu_pd(chl + i), o_chl,
                                                _mm256_mul_pd(_mm256_loadu_pd(shl + i), o_shl));
        _mm256_storeu_pd(out + i, _mm256_fmadd_pd(cos_mid, abs_pd(dlon), dlat));
    }
    manhattan_tail(o, pts, i, out + i, n - i);
}

} // namespace evfleet::geo

#endif // EVFLEET_HAVE_AVX2
