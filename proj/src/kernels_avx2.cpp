// AVX2/FMA kernels. This translation unit is compiled with -mavx2 -mfma and
// only ever entered after the runtime CPU check in kernels.cpp.

#include "semcom/kernels.hpp"

#if SEMCOM_HAVE_AVX2_KERNELS

#include <immintrin.h>

#include <cassert>

namespace semcom::kern::avx2 {

namespace {

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d shuf = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, shuf));
}

} // namespace

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    const size_t n = a.size();
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d va = _mm256_loadu_pd(a.data() + i);
        __m256d vb = _mm256_loadu_pd(b.data() + i);
        acc = _mm256_fmadd_pd(va, vb, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i] * b[i];
    return r;
}

double sum(std::span<const double> a) {
    const size_t n = a.size();
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(a.data() + i));
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i];
    return r;
}

double sumsq(std::span<const double> a) {
    const size_t n = a.size();
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(a.data() + i);
        acc = _mm256_fmadd_pd(v, v, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) r += a[i] * a[i];
    return r;
}

double sqdist(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    const size_t n = a.size();
    __m256d acc = _mm256_setzero_pd();
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d d = _mm256_sub_pd(_mm256_loadu_pd(a.data() + i), _mm256_loadu_pd(b.data() + i));
        acc = _mm256_fmadd_pd(d, d, acc);
    }
    double r = hsum(acc);
    for (; i < n; ++i) {
        const double d = a[i] - b[i];
        r += d * d;
    }
    return r;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    const size_t n = x.size();
    const __m256d va = _mm256_set1_pd(alpha);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y.data() + i);
        __m256d vx = _mm256_loadu_pd(x.data() + i);
        _mm256_storeu_pd(y.data() + i, _mm256_fmadd_pd(va, vx, vy));
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

void lincomb(double alpha, std::span<const double> x, double beta, std::span<const double> y,
             std::span<double> out) {
    assert(x.size() == y.size() && x.size() == out.size());
    const size_t n = x.size();
    const __m256d va = _mm256_set1_pd(alpha);
    const __m256d vb = _mm256_set1_pd(beta);
    size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vx = _mm256_loadu_pd(x.data() + i);
        __m256d vy = _mm256_loadu_pd(y.data() + i);
        _mm256_storeu_pd(out.data() + i, _mm256_fmadd_pd(va, vx, _mm256_mul_pd(vb, vy)));
    }
    for (; i < n; ++i) out[i] = alpha * x[i] + beta * y[i];
}

void scale(double alpha, std::span<double> x) {
    const size_t n = x.size();
    const __m256d va = _mm256_set1_pd(alpha);
    size_t i = 0;
    for (; i + 4 <= n; i += 4)
        _mm256_storeu_pd(x.data() + i, _mm256_mul_pd(va, _mm256_loadu_pd(x.data() + i)));
    for (; i < n; ++i) x[i] *= alpha;
}

void matvec(const double* w, size_t rows, size_t cols, std::span<const double> x,
            std::span<double> out) {
    assert(x.size() == cols && out.size() == rows);
    for (size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        __m256d acc = _mm256_setzero_pd();
        size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            acc = _mm256_fmadd_pd(_mm256_loadu_pd(row + c), _mm256_loadu_pd(x.data() + c), acc);
        }
        double v = hsum(acc);
        for (; c < cols; ++c) v += row[c] * x[c];
        out[r] = v;
    }
}

void matvec_t(const double* w, size_t rows, size_t cols, std::span<const double> y,
              std::span<double> out) {
    assert(y.size() == rows && out.size() == cols);
    for (size_t c = 0; c < cols; ++c) out[c] = 0.0;
    for (size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        const __m256d vy = _mm256_set1_pd(y[r]);
        size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            __m256d vo = _mm256_loadu_pd(out.data() + c);
            _mm256_storeu_pd(out.data() + c, _mm256_fmadd_pd(vy, _mm256_loadu_pd(row + c), vo));
        }
        const double yr = y[r];
        for (; c < cols; ++c) out[c] += yr * row[c];
    }
}

void ger(double* w, size_t rows, size_t cols, double alpha, std::span<const double> u,
         std::span<const double> v) {
    assert(u.size() == rows && v.size() == cols);
    for (size_t r = 0; r < rows; ++r) {
        double* row = w + r * cols;
        const double au = alpha * u[r];
        const __m256d vau = _mm256_set1_pd(au);
        size_t c = 0;
        for (; c + 4 <= cols; c += 4) {
            __m256d vr = _mm256_loadu_pd(row + c);
            _mm256_storeu_pd(row + c, _mm256_fmadd_pd(vau, _mm256_loadu_pd(v.data() + c), vr));
        }
        for (; c < cols; ++c) row[c] += au * v[c];
    }
}

} // namespace semcom::kern::avx2

#endif // SEMCOM_HAVE_AVX2_KERNELS
