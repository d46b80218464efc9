#pragma once
// Data-parallel inner-loop kernels: scalar reference implementations plus
// AVX2 variants selected at runtime. Everything above this layer is
// kernel-agnostic; the two implementations are equivalence-tested.

#include <cstddef>

namespace nrds::simd {

struct Ops {
    const char* name;

    // y[i] += a * x[i]
    void (*axpy)(std::size_t n, double a, const double* x, double* y);

    // out[i] = x[i] + a * k[i]   (Runge-Kutta stage state)
    void (*stage)(std::size_t n, const double* x, double a, const double* k,
                  double* out);

    // y[i] += w1*k1[i] + w2*k2[i] + w3*k3[i] + w4*k4[i]
    void (*combine4)(std::size_t n, double* y, double w1, const double* k1,
                     double w2, const double* k2, double w3, const double* k3,
                     double w4, const double* k4);

    // sum_i w[i] * x[i]
    double (*dot)(std::size_t n, const double* w, const double* x);

    // y[i] = c1*x[i] + c3*x[i]^3
    void (*poly13)(std::size_t n, double c1, double c3, const double* x,
                   double* y);

    // min over points of squared Euclidean distance to p; pts holds n points
    // of dimension dim, interleaved
    double (*min_sqdist)(std::size_t n, std::size_t dim, const double* pts,
                         const double* p);
};

// Active implementation. Picks AVX2 when the CPU supports it; the
// NRDS_SIMD environment variable ("scalar" or "avx2") overrides.
const Ops& ops();

const Ops& scalar_ops();
const Ops* avx2_ops();  // nullptr when unsupported at build or run time

}  // namespace nrds::simd
