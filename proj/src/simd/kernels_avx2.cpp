#include "nrds/simd/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)
#define NRDS_HAVE_AVX2_BUILD 1
#include <immintrin.h>
#else
#define NRDS_HAVE_AVX2_BUILD 0
#endif

namespace nrds::simd {

#if NRDS_HAVE_AVX2_BUILD
namespace {

void axpy_avx2(std::size_t n, double a, const double* x, double* y) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += a * x[i];
}

void stage_avx2(std::size_t n, const double* x, double a, const double* k,
                double* out) {
    const __m256d va = _mm256_set1_pd(a);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_fmadd_pd(va, _mm256_loadu_pd(k + i),
                                    _mm256_loadu_pd(x + i));
        _mm256_storeu_pd(out + i, v);
    }
    for (; i < n; ++i) out[i] = x[i] + a * k[i];
}

void combine4_avx2(std::size_t n, double* y, double w1, const double* k1,
                   double w2, const double* k2, double w3, const double* k3,
                   double w4, const double* k4) {
    const __m256d v1 = _mm256_set1_pd(w1), v2 = _mm256_set1_pd(w2);
    const __m256d v3 = _mm256_set1_pd(w3), v4 = _mm256_set1_pd(w4);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d acc = _mm256_loadu_pd(y + i);
        acc = _mm256_fmadd_pd(v1, _mm256_loadu_pd(k1 + i), acc);
        acc = _mm256_fmadd_pd(v2, _mm256_loadu_pd(k2 + i), acc);
        acc = _mm256_fmadd_pd(v3, _mm256_loadu_pd(k3 + i), acc);
        acc = _mm256_fmadd_pd(v4, _mm256_loadu_pd(k4 + i), acc);
        _mm256_storeu_pd(y + i, acc);
    }
    for (; i < n; ++i)
        y[i] += w1 * k1[i] + w2 * k2[i] + w3 * k3[i] + w4 * k4[i];
}

double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

double dot_avx2(std::size_t n, const double* w, const double* x) {
    __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
    __m256d a2 = _mm256_setzero_pd(), a3 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 16 <= n; i += 16) {
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i),
                             _mm256_loadu_pd(x + i), a0);
        a1 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i + 4),
                             _mm256_loadu_pd(x + i + 4), a1);
        a2 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i + 8),
                             _mm256_loadu_pd(x + i + 8), a2);
        a3 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i + 12),
                             _mm256_loadu_pd(x + i + 12), a3);
    }
    for (; i + 4 <= n; i += 4)
        a0 = _mm256_fmadd_pd(_mm256_loadu_pd(w + i),
                             _mm256_loadu_pd(x + i), a0);
    double s = hsum(_mm256_add_pd(_mm256_add_pd(a0, a1),
                                  _mm256_add_pd(a2, a3)));
    for (; i < n; ++i) s += w[i] * x[i];
    return s;
}

void poly13_avx2(std::size_t n, double c1, double c3, const double* x,
                 double* y) {
    const __m256d v1 = _mm256_set1_pd(c1), v3 = _mm256_set1_pd(c3);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(x + i);
        __m256d v2 = _mm256_mul_pd(v, v);
        __m256d r = _mm256_mul_pd(v, _mm256_fmadd_pd(v3, v2, v1));
        _mm256_storeu_pd(y + i, r);
    }
    for (; i < n; ++i) {
        const double v = x[i];
        y[i] = c1 * v + c3 * v * v * v;
    }
}

double min_sqdist_avx2(std::size_t n, std::size_t dim, const double* pts,
                       const double* p) {
    double best = 1e300;
    std::size_t i = 0;
    if (dim == 1) {
        const __m256d vp = _mm256_set1_pd(p[0]);
        __m256d vbest = _mm256_set1_pd(best);
        for (; i + 4 <= n; i += 4) {
            __m256d d = _mm256_sub_pd(_mm256_loadu_pd(pts + i), vp);
            vbest = _mm256_min_pd(vbest, _mm256_mul_pd(d, d));
        }
        alignas(32) double lane[4];
        _mm256_store_pd(lane, vbest);
        for (double v : lane)
            if (v < best) best = v;
        for (; i < n; ++i) {
            const double e = pts[i] - p[0];
            if (e * e < best) best = e * e;
        }
        return best;
    }
    if (dim == 2) {
        // interleaved (x0,y0,x1,y1): two loads give 4 points per pass
        const __m256d px = _mm256_set1_pd(p[0]);
        const __m256d py = _mm256_set1_pd(p[1]);
        __m256d vbest = _mm256_set1_pd(best);
        for (; i + 4 <= n; i += 4) {
            __m256d lo = _mm256_loadu_pd(pts + 2 * i);       // x0 y0 x1 y1
            __m256d hi = _mm256_loadu_pd(pts + 2 * i + 4);   // x2 y2 x3 y3
            __m256d xs = _mm256_unpacklo_pd(lo, hi);         // x0 x2 x1 x3
            __m256d ys = _mm256_unpackhi_pd(lo, hi);         // y0 y2 y1 y3
            __m256d dx = _mm256_sub_pd(xs, px);
            __m256d dy = _mm256_sub_pd(ys, py);
            __m256d d = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
            vbest = _mm256_min_pd(vbest, d);
        }
        alignas(32) double lane[4];
        _mm256_store_pd(lane, vbest);
        for (double v : lane)
            if (v < best) best = v;
        for (; i < n; ++i) {
            const double ex = pts[2 * i] - p[0];
            const double ey = pts[2 * i + 1] - p[1];
            const double d = ex * ex + ey * ey;
            if (d < best) best = d;
        }
        return best;
    }
    for (; i < n; ++i) {
        double d = 0.0;
        const double* q = pts + i * dim;
        for (std::size_t c = 0; c < dim; ++c) {
            const double e = q[c] - p[c];
            d += e * e;
        }
        if (d < best) best = d;
    }
    return best;
}

const Ops avx2_table = {
    "avx2",    axpy_avx2,   stage_avx2, combine4_avx2,
    dot_avx2,  poly13_avx2, min_sqdist_avx2,
};

}  // namespace

const Ops* avx2_ops_build() { return &avx2_table; }
#else
const Ops* avx2_ops_build() { return nullptr; }
#endif

}  // namespace nrds::simd
