// Scalar reference kernels. These define the semantics the SIMD variants
// are tested against.

#include "semcom/kernels.hpp"

#include <cassert>

namespace semcom::kern::scalar {

double dot(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

double sum(std::span<const double> a) {
    double acc = 0.0;
    for (double v : a) acc += v;
    return acc;
}

double sumsq(std::span<const double> a) {
    double acc = 0.0;
    for (double v : a) acc += v * v;
    return acc;
}

double sqdist(std::span<const double> a, std::span<const double> b) {
    assert(a.size() == b.size());
    double acc = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        acc += d * d;
    }
    return acc;
}

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    assert(x.size() == y.size());
    for (size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

void lincomb(double alpha, std::span<const double> x, double beta, std::span<const double> y,
             std::span<double> out) {
    assert(x.size() == y.size() && x.size() == out.size());
    for (size_t i = 0; i < x.size(); ++i) out[i] = alpha * x[i] + beta * y[i];
}

void scale(double alpha, std::span<double> x) {
    for (double& v : x) v *= alpha;
}

void matvec(const double* w, size_t rows, size_t cols, std::span<const double> x,
            std::span<double> out) {
    assert(x.size() == cols && out.size() == rows);
    for (size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        double acc = 0.0;
        for (size_t c = 0; c < cols; ++c) acc += row[c] * x[c];
        out[r] = acc;
    }
}

void matvec_t(const double* w, size_t rows, size_t cols, std::span<const double> y,
              std::span<double> out) {
    assert(y.size() == rows && out.size() == cols);
    for (size_t c = 0; c < cols; ++c) out[c] = 0.0;
    for (size_t r = 0; r < rows; ++r) {
        const double* row = w + r * cols;
        const double yr = y[r];
        for (size_t c = 0; c < cols; ++c) out[c] += yr * row[c];
    }
}

void ger(double* w, size_t rows, size_t cols, double alpha, std::span<const double> u,
         std::span<const double> v) {
    assert(u.size() == rows && v.size() == cols);
    for (size_t r = 0; r < rows; ++r) {
        double* row = w + r * cols;
        const double au = alpha * u[r];
        for (size_t c = 0; c < cols; ++c) row[c] += au * v[c];
    }
}

} // namespace semcom::kern::scalar
