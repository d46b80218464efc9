#include "nrds/simd/kernels.hpp"

namespace nrds::simd {
namespace {

void axpy_scalar(std::size_t n, double a, const double* x, double* y) {
    for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

void stage_scalar(std::size_t n, const double* x, double a, const double* k,
                  double* out) {
    for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + a * k[i];
}

void combine4_scalar(std::size_t n, double* y, double w1, const double* k1,
                     double w2, const double* k2, double w3, const double* k3,
                     double w4, const double* k4) {
    for (std::size_t i = 0; i < n; ++i)
        y[i] += w1 * k1[i] + w2 * k2[i] + w3 * k3[i] + w4 * k4[i];
}

double dot_scalar(std::size_t n, const double* w, const double* x) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i];
    return s;
}

void poly13_scalar(std::size_t n, double c1, double c3, const double* x,
                   double* y) {
    for (std::size_t i = 0; i < n; ++i) {
        const double v = x[i];
        y[i] = c1 * v + c3 * v * v * v;
    }
}

double min_sqdist_scalar(std::size_t n, std::size_t dim, const double* pts,
                         const double* p) {
    double best = 1e300;
    for (std::size_t i = 0; i < n; ++i) {
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

}  // namespace

const Ops& scalar_ops() {
    static const Ops ops = {
        "scalar",        axpy_scalar,   stage_scalar, combine4_scalar,
        dot_scalar,      poly13_scalar, min_sqdist_scalar,
    };
    return ops;
}

}  // namespace nrds::simd
