#include "nrds/simd/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace nrds::simd {

const Ops* avx2_ops_build();  // defined in kernels_avx2.cpp

const Ops* avx2_ops() {
#if defined(__x86_64__) || defined(_M_X64)
    if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma"))
        return avx2_ops_build();
#endif
    return nullptr;
}

namespace {

const Ops& select() {
    const char* env = std::getenv("NRDS_SIMD");
    if (env != nullptr) {
        if (std::strcmp(env, "scalar") == 0) return scalar_ops();
        if (std::strcmp(env, "avx2") == 0 && avx2_ops() != nullptr)
            return *avx2_ops();
    }
    const Ops* best = avx2_ops();
    return best != nullptr ? *best : scalar_ops();
}

}  // namespace

const Ops& ops() {
    static const Ops& chosen = select();
    return chosen;
}

}  // namespace nrds::simd
