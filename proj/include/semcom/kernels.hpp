#pragma once

// Dense double-precision kernels backing the denoiser, the federated
// aggregation and the channel statistics. A scalar reference implementation
// always exists; an AVX2/FMA variant is selected at runtime when the CPU
// supports it. The two are equivalence-tested against each other.

#include <cstddef>
#include <span>

namespace semcom::kern {

enum class Backend { Scalar, Avx2 };

// Backend chosen at startup (AVX2 when available, scalar otherwise).
Backend active_backend();

// Pin the backend, e.g. to compare implementations. Throws ValidationError
// if the requested backend is not supported on this CPU.
void set_backend(Backend b);

bool avx2_supported();
const char* backend_name(Backend b);

// --- dispatched entry points -------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double sumsq(std::span<const double> a);
// Σ (a[i] - b[i])²
double sqdist(std::span<const double> a, std::span<const double> b);
// y += alpha * x
void axpy(double alpha, std::span<const double> x, std::span<double> y);
// out = alpha * x + beta * y
void lincomb(double alpha, std::span<const double> x, double beta, std::span<const double> y,
             std::span<double> out);
void scale(double alpha, std::span<double> x);
// out = W x, W row-major rows×cols
void matvec(const double* w, size_t rows, size_t cols, std::span<const double> x,
            std::span<double> out);
// out = Wᵀ y, W row-major rows×cols, y has rows elements, out has cols
void matvec_t(const double* w, size_t rows, size_t cols, std::span<const double> y,
              std::span<double> out);
// W += alpha * u vᵀ (rank-1 update), u has rows elements, v has cols
void ger(double* w, size_t rows, size_t cols, double alpha, std::span<const double> u,
         std::span<const double> v);

// --- reference implementations (always built) ---------------------------

namespace scalar {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double sumsq(std::span<const double> a);
double sqdist(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void lincomb(double alpha, std::span<const double> x, double beta, std::span<const double> y,
             std::span<double> out);
void scale(double alpha, std::span<double> x);
void matvec(const double* w, size_t rows, size_t cols, std::span<const double> x,
            std::span<double> out);
void matvec_t(const double* w, size_t rows, size_t cols, std::span<const double> y,
              std::span<double> out);
void ger(double* w, size_t rows, size_t cols, double alpha, std::span<const double> u,
         std::span<const double> v);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SEMCOM_HAVE_AVX2_KERNELS 1
namespace avx2 {
double dot(std::span<const double> a, std::span<const double> b);
double sum(std::span<const double> a);
double sumsq(std::span<const double> a);
double sqdist(std::span<const double> a, std::span<const double> b);
void axpy(double alpha, std::span<const double> x, std::span<double> y);
void lincomb(double alpha, std::span<const double> x, double beta, std::span<const double> y,
             std::span<double> out);
void scale(double alpha, std::span<double> x);
void matvec(const double* w, size_t rows, size_t cols, std::span<const double> x,
            std::span<double> out);
void matvec_t(const double* w, size_t rows, size_t cols, std::span<const double> y,
              std::span<double> out);
void ger(double* w, size_t rows, size_t cols, double alpha, std::span<const double> u,
         std::span<const double> v);
} // namespace avx2
#else
#define SEMCOM_HAVE_AVX2_KERNELS 0
#endif

} // namespace semcom::kern
