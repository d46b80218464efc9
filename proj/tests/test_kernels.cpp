#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nrds/rng.hpp"
#include "nrds/simd/kernels.hpp"

using namespace nrds;

namespace {

std::vector<double> random_vec(GaussianRng& rng, std::size_t n) {
    std::vector<double> v(n);
    for (auto& x : v) x = rng.normal();
    return v;
}

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)});
}

}  // namespace

TEST_CASE("scalar and simd kernels agree on random inputs") {
    const simd::Ops& ref = simd::scalar_ops();
    const simd::Ops* fast = simd::avx2_ops();
    if (fast == nullptr) {
        MESSAGE("no simd variant on this host; dispatch falls back to scalar");
        CHECK(std::string(simd::ops().name) == "scalar");
        return;
    }

    GaussianRng rng(2024);
    for (std::size_t n : {0ul, 1ul, 3ul, 4ul, 7ul, 16ul, 33ul, 129ul, 1000ul}) {
        const auto x = random_vec(rng, n);
        const auto k1 = random_vec(rng, n);
        const auto k2 = random_vec(rng, n);
        const auto k3 = random_vec(rng, n);
        const auto k4 = random_vec(rng, n);

        auto ya = random_vec(rng, n);
        auto yb = ya;
        ref.axpy(n, 0.37, x.data(), ya.data());
        fast->axpy(n, 0.37, x.data(), yb.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(rel_err(ya[i], yb[i]) < 1e-13);

        std::vector<double> oa(n), ob(n);
        ref.stage(n, x.data(), -1.7, k1.data(), oa.data());
        fast->stage(n, x.data(), -1.7, k1.data(), ob.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(rel_err(oa[i], ob[i]) < 1e-13);

        auto ca = random_vec(rng, n);
        auto cb = ca;
        ref.combine4(n, ca.data(), 0.1, k1.data(), 0.2, k2.data(), 0.3,
                     k3.data(), 0.4, k4.data());
        fast->combine4(n, cb.data(), 0.1, k1.data(), 0.2, k2.data(), 0.3,
                       k3.data(), 0.4, k4.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(rel_err(ca[i], cb[i]) < 1e-13);

        const double da = ref.dot(n, x.data(), k1.data());
        const double db = fast->dot(n, x.data(), k1.data());
        CHECK(rel_err(da, db) < 1e-12 * std::max<double>(1, n));

        ref.poly13(n, 1.0, -1.0, x.data(), oa.data());
        fast->poly13(n, 1.0, -1.0, x.data(), ob.data());
        for (std::size_t i = 0; i < n; ++i)
            CHECK(rel_err(oa[i], ob[i]) < 1e-13);
    }
}

TEST_CASE("min_sqdist matches a brute-force double loop in dims 1..4") {
    GaussianRng rng(7);
    const simd::Ops& ref = simd::scalar_ops();
    const simd::Ops* fast = simd::avx2_ops();
    for (std::size_t dim : {1ul, 2ul, 3ul, 4ul}) {
        for (std::size_t n : {1ul, 5ul, 64ul, 257ul}) {
            const auto pts = random_vec(rng, n * dim);
            const auto p = random_vec(rng, dim);
            double want = 1e300;
            for (std::size_t i = 0; i < n; ++i) {
                double d = 0;
                for (std::size_t c = 0; c < dim; ++c) {
                    const double e = pts[i * dim + c] - p[c];
                    d += e * e;
                }
                want = std::min(want, d);
            }
            CHECK(ref.min_sqdist(n, dim, pts.data(), p.data()) ==
                  doctest::Approx(want).epsilon(1e-14));
            if (fast)
                CHECK(fast->min_sqdist(n, dim, pts.data(), p.data()) ==
                      doctest::Approx(want).epsilon(1e-12));
        }
    }
}

TEST_CASE("dispatch honors the NRDS_SIMD override at startup") {
    // the active table is one of the two known implementations
    const std::string name = simd::ops().name;
    CHECK((name == "scalar" || name == "avx2"));
}
