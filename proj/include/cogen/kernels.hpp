#pragma once

#include <cstdint>
#include <cstddef>

namespace cogen::kernels {

// OpenMP kernels backing the tensor primitives. All of them are
// deterministic for a fixed input regardless of thread count: every output
// element is owned by exactly one thread and reductions combine fixed-size
// chunk partials in chunk order. Inside an active parallel region they run
// serially, so batch-level parallelism composes with them.

// C[m x n] (+)= A[m x k] * B[k x n], row-major. accumulate=false zeroes C first.
void matmul(const double* a, const double* b, double* c,
            std::int64_t m, std::int64_t k, std::int64_t n, bool accumulate);

// B-transposed product: C[m x n] (+)= A[m x k] * B^T where B is [n x k].
void matmul_bt(const double* a, const double* bt, double* c,
               std::int64_t m, std::int64_t k, std::int64_t n, bool accumulate);

// A-transposed product: C[m x n] (+)= A^T * B where A is [k x m], B is [k x n].
void matmul_at(const double* at, const double* b, double* c,
               std::int64_t m, std::int64_t k, std::int64_t n, bool accumulate);

// y[i] += alpha * x[i]
void axpy(double alpha, const double* x, double* y, std::int64_t n);

// Row-wise softmax over the last axis: rows x cols, numerically shifted.
void softmax_rows(const double* x, double* y, std::int64_t rows, std::int64_t cols);

// Row-wise layer norm: y = (x - mean) / sqrt(var + eps) * gain + bias.
// xhat (optional, may be null) receives the pre-affine normalized values.
void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double* y, double* xhat, double* inv_std,
                     std::int64_t rows, std::int64_t cols, double eps);

// Deterministic sum: fixed 4096-element chunks, partials combined in order.
double reduce_sum(const double* x, std::int64_t n);

// Deterministic sum of squared differences.
double reduce_sqdiff(const double* a, const double* b, std::int64_t n);

bool has_nonfinite(const double* x, std::int64_t n);

}  // namespace cogen::kernels

namespace cogen::reference {

// Naive serial implementations kept as oracles for the OpenMP kernels.
void matmul(const double* a, const double* b, double* c,
            std::int64_t m, std::int64_t k, std::int64_t n);
void softmax_rows(const double* x, double* y, std::int64_t rows, std::int64_t cols);
void layer_norm_rows(const double* x, const double* gain, const double* bias,
                     double* y, std::int64_t rows, std::int64_t cols, double eps);
double reduce_sum(const double* x, std::int64_t n);

}  // namespace cogen::reference
