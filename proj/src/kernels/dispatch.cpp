#include <cstdlib>
#include <stdexcept>
#include <string>

#include "lanekit/kernels.hpp"

namespace lanekit::kernels {

#ifdef LANEKIT_HAVE_AVX2
const Ops* avx2_ops_impl();
#endif

const Ops* avx2_ops() {
#ifdef LANEKIT_HAVE_AVX2
    if (__builtin_cpu_supports("avx2")) return avx2_ops_impl();
#endif
    return nullptr;
}

namespace {

Backend backend_from_env() {
    const char* env = std::getenv("LANEKIT_KERNELS");
    if (env == nullptr) return Backend::Auto;
    std::string v(env);
    if (v == "scalar") return Backend::Scalar;
    if (v == "avx2") return Backend::Avx2;
    return Backend::Auto;
}

Backend& backend_state() {
    static Backend b = backend_from_env();
    return b;
}

}  // namespace

const Ops& ops() {
    switch (backend_state()) {
        case Backend::Scalar:
            return scalar_ops();
        case Backend::Avx2: {
            const Ops* a = avx2_ops();
            if (a == nullptr) throw std::runtime_error("avx2 kernels unavailable on this CPU/build");
            return *a;
        }
        case Backend::Auto:
        default: {
            const Ops* a = avx2_ops();
            return a != nullptr ? *a : scalar_ops();
        }
    }
}

void set_backend(Backend b) {
    if (b == Backend::Avx2 && avx2_ops() == nullptr)
        throw std::runtime_error("avx2 kernels unavailable on this CPU/build");
    backend_state() = b;
}

std::string backend_name() { return ops().name; }

}  // namespace lanekit::kernels
