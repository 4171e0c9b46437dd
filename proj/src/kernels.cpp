// Runtime backend selection for the dense kernels.

#include "semcom/kernels.hpp"

#include "semcom/errors.hpp"

namespace semcom::kern {

namespace {

bool detect_avx2() {
#if SEMCOM_HAVE_AVX2_KERNELS && (defined(__GNUC__) || defined(__clang__))
    __builtin_cpu_init();
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

Backend& backend_slot() {
    static Backend b = detect_avx2() ? Backend::Avx2 : Backend::Scalar;
    return b;
}

} // namespace

bool avx2_supported() {
    static const bool supported = detect_avx2();
    return supported;
}

Backend active_backend() { return backend_slot(); }

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_supported())
        throw ValidationError("kernels: AVX2 backend not supported on this CPU");
    backend_slot() = b;
}

const char* backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

#if SEMCOM_HAVE_AVX2_KERNELS
#define SEMCOM_DISPATCH(fn, ...) \
    return backend_slot() == Backend::Avx2 ? avx2::fn(__VA_ARGS__) : scalar::fn(__VA_ARGS__)
#else
#define SEMCOM_DISPATCH(fn, ...) return scalar::fn(__VA_ARGS__)
#endif

double dot(std::span<const double> a, std::span<const double> b) { SEMCOM_DISPATCH(dot, a, b); }
double sum(std::span<const double> a) { SEMCOM_DISPATCH(sum, a); }
double sumsq(std::span<const double> a) { SEMCOM_DISPATCH(sumsq, a); }
double sqdist(std::span<const double> a, std::span<const double> b) {
    SEMCOM_DISPATCH(sqdist, a, b);
}
void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    SEMCOM_DISPATCH(axpy, alpha, x, y);
}
void lincomb(double alpha, std::span<const double> x, double beta, std::span<const double> y,
             std::span<double> out) {
    SEMCOM_DISPATCH(lincomb, alpha, x, beta, y, out);
}
void scale(double alpha, std::span<double> x) { SEMCOM_DISPATCH(scale, alpha, x); }
void matvec(const double* w, size_t rows, size_t cols, std::span<const double> x,
            std::span<double> out) {
    SEMCOM_DISPATCH(matvec, w, rows, cols, x, out);
}
void matvec_t(const double* w, size_t rows, size_t cols, std::span<const double> y,
              std::span<double> out) {
    SEMCOM_DISPATCH(matvec_t, w, rows, cols, y, out);
}
void ger(double* w, size_t rows, size_t cols, double alpha, std::span<const double> u,
         std::span<const double> v) {
    SEMCOM_DISPATCH(ger, w, rows, cols, alpha, u, v);
}

#undef SEMCOM_DISPATCH

} // namespace semcom::kern
