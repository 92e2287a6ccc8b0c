#include "cogen/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace cogen::kernels {

namespace {

bool use_threads(std::int64_t work) {
#ifdef _OPENMP
    return work >= 1 << 15 && !omp_in_parallel();
#else
    (void)work;
    return false;
#endif
}

constexpr std::int64_t kChunk = 4096;
constexpr std::int64_t kKBlock = 256;

}  // namespace

void matmul(const double* a, const double* b, double* c,
            std::int64_t m, std::int64_t k, std::int64_t n, bool accumulate) {
    const bool par = use_threads(m * k * n);
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        if (!accumulate) std::memset(ci, 0, sizeof(double) * static_cast<std::size_t>(n));
        const double* ai = a + i * k;
        for (std::int64_t k0 = 0; k0 < k; k0 += kKBlock) {
            const std::int64_t k1 = std::min(k0 + kKBlock, k);
            for (std::int64_t kk = k0; kk < k1; ++kk) {
                const double av = ai[kk];
                const double* bk = b + kk * n;
                for (std::int64_t j = 0; j < n; ++j) ci[j] += av * bk[j];
            }
        }
    }
}

void matmul_bt(const double* a, const double* bt, double* c,
               std::int64_t m, std::int64_t k, std::int64_t n, bool accumulate) {
    const bool par = use_threads(m * k * n);
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < m; ++i) {
        const double* ai = a + i * k;
        double* ci = c + i * n;
        for (std::int64_t j = 0; j < n; ++j) {
            const double* bj = bt + j * k;
            double acc = 0.0;
            for (std::int64_t kk = 0; kk < k; ++kk) acc += ai[kk] * bj[kk];
            ci[j] = accumulate ? ci[j] + acc : acc;
        }
    }
}

void matmul_at(const double* at, const double* b, double* c,
               std::int64_t m, std::int64_t k, std::int64_t n, bool accumulate) {
    const bool par = use_threads(m * k * n);
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < m; ++i) {
        double* ci = c + i * n;
        if (!accumulate) std::memset(ci, 0, sizeof(double) * static_cast<std::size_t>(n));
        for (std::int64_t kk = 0; kk < k; ++kk) {
            const double av = at[kk * m + i];
            const double* bk = b + kk * n;
            for (std::int64_t j = 0; j < n; ++j) ci[j] += av * bk[j];
        }
    }
}

void axpy(double alpha, const double* x, double* y, std::int64_t n) {
    const bool par = use_threads(n);
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void softmax_rows(const double* x, double* y, std::int64_t rows, std::int64_t cols) {
    const bool par = use_threads(rows * cols);
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* xr = x + r * cols;
        double* yr = y + r * cols;
        double mx = xr[0];
        for (std::int64_t j = 1; j < cols; ++j) mx = std::max(mx, xr[j]);
        double denom = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) {
            yr[j] = std::exp(xr[j] - mx);
            denom += yr[j];
        }
        const double inv = 1.0 / denom;
        for (std::int64_t j = 0; j < cols; ++j) yr[j] *= inv;
    }
}

void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double* y, double* xhat, double* inv_std,
                     std::int64_t rows, std::int64_t cols, double eps) {
    const bool par = use_threads(rows * cols);
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t r = 0; r < rows; ++r) {
        const double* xr = x + r * cols;
        double mean = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) mean += xr[j];
        mean /= static_cast<double>(cols);
        double var = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) {
            const double d = xr[j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        const double is = 1.0 / std::sqrt(var + eps);
        if (inv_std) inv_std[r] = is;
        double* yr = y + r * cols;
        for (std::int64_t j = 0; j < cols; ++j) {
            const double h = (xr[j] - mean) * is;
            if (xhat) xhat[r * cols + j] = h;
            yr[j] = h * gain[j] + bias[j];
        }
    }
}

double reduce_sum(const double* x, std::int64_t n) {
    const std::int64_t nchunks = (n + kChunk - 1) / kChunk;
    if (nchunks <= 1) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < n; ++i) acc += x[i];
        return acc;
    }
    std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
    const bool par = use_threads(n);
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t cidx = 0; cidx < nchunks; ++cidx) {
        const std::int64_t lo = cidx * kChunk;
        const std::int64_t hi = std::min(lo + kChunk, n);
        double acc = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) acc += x[i];
        partial[static_cast<std::size_t>(cidx)] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

double reduce_sqdiff(const double* a, const double* b, std::int64_t n) {
    const std::int64_t nchunks = (n + kChunk - 1) / kChunk;
    if (nchunks <= 1) {
        double acc = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            const double d = a[i] - b[i];
            acc += d * d;
        }
        return acc;
    }
    std::vector<double> partial(static_cast<std::size_t>(nchunks), 0.0);
    const bool par = use_threads(n);
#pragma omp parallel for schedule(static) if (par)
    for (std::int64_t cidx = 0; cidx < nchunks; ++cidx) {
        const std::int64_t lo = cidx * kChunk;
        const std::int64_t hi = std::min(lo + kChunk, n);
        double acc = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) {
            const double d = a[i] - b[i];
            acc += d * d;
        }
        partial[static_cast<std::size_t>(cidx)] = acc;
    }
    double total = 0.0;
    for (double p : partial) total += p;
    return total;
}

bool has_nonfinite(const double* x, std::int64_t n) {
    for (std::int64_t i = 0; i < n; ++i) {
        if (!std::isfinite(x[i])) return true;
    }
    return false;
}

}  // namespace cogen::kernels

namespace cogen::reference {

void matmul(const double* a, const double* b, double* c,
            std::int64_t m, std::int64_t k, std::int64_t n) {
    for (std::int64_t i = 0; i < m; ++i) {
        for (std::int64_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::int64_t kk = 0; kk < k; ++kk) acc += a[i * k + kk] * b[kk * n + j];
            c[i * n + j] = acc;
        }
    }
}

void softmax_rows(const double* x, double* y, std::int64_t rows, std::int64_t cols) {
    for (std::int64_t r = 0; r < rows; ++r) {
        double mx = x[r * cols];
        for (std::int64_t j = 1; j < cols; ++j) mx = std::max(mx, x[r * cols + j]);
        double denom = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) denom += std::exp(x[r * cols + j] - mx);
        for (std::int64_t j = 0; j < cols; ++j) y[r * cols + j] = std::exp(x[r * cols + j] - mx) / denom;
    }
}

void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double* y, std::int64_t rows, std::int64_t cols, double eps) {
    for (std::int64_t r = 0; r < rows; ++r) {
        double mean = 0.0, var = 0.0;
        for (std::int64_t j = 0; j < cols; ++j) mean += x[r * cols + j];
        mean /= static_cast<double>(cols);
        for (std::int64_t j = 0; j < cols; ++j) {
            const double d = x[r * cols + j] - mean;
            var += d * d;
        }
        var /= static_cast<double>(cols);
        for (std::int64_t j = 0; j < cols; ++j)
            y[r * cols + j] = (x[r * cols + j] - mean) / std::sqrt(var + eps) * gain[j] + bias[j];
    }
}

double reduce_sum(const double* x, std::int64_t n) {
    double acc = 0.0;
    for (std::int64_t i = 0; i < n; ++i) acc += x[i];
    return acc;
}

}  // namespace cogen::reference
