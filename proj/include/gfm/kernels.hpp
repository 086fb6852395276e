#ifndef GFM_KERNELS_HPP
#define GFM_KERNELS_HPP

#include <cstdint>

namespace gfm::kernels {

// Dense kernels behind every tensor operation. Each kernel exists twice:
// the OpenMP version used by the library and a serial reference in
// kernels::serial with identical arithmetic. Both orders of summation are
// fixed (per output element, or per fixed-size chunk for reductions), so
// results are bit-identical between the two variants and independent of
// the number of threads.

// Worker cap for the OpenMP variants (<= 0 means the OpenMP default).
void set_max_threads(int n);
int max_threads();

// Reduction chunk length. Partial sums are formed over consecutive chunks
// of this size and combined in chunk order.
inline constexpr int64_t kReduceChunk = 4096;

namespace serial {

// C[n,m] = A[n,k] * B[m,k]^T  (dot products of contiguous rows)
void gemm_nt(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m);
// C[n,m] = A[n,k] * B[k,m]
void gemm_nn(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m);
// C[n,m] = A[k,n]^T * B[k,m]
void gemm_tn(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m);

double reduce_sum(const double* x, int64_t n);
double reduce_sq_diff(const double* a, const double* b, int64_t n);

void map_sin(const double* x, double* y, int64_t n);
void map_cos(const double* x, double* y, int64_t n);
void axpy(double alpha, const double* x, double* y, int64_t n);  // y += alpha*x
void scale(const double* x, double* y, double alpha, int64_t n); // y = alpha*x
void mul(const double* a, const double* b, double* c, int64_t n);
void add(const double* a, const double* b, double* c, int64_t n);
void sub(const double* a, const double* b, double* c, int64_t n);

}  // namespace serial

void gemm_nt(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m);
void gemm_nn(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m);
void gemm_tn(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m);

double reduce_sum(const double* x, int64_t n);
double reduce_sq_diff(const double* a, const double* b, int64_t n);

void map_sin(const double* x, double* y, int64_t n);
void map_cos(const double* x, double* y, int64_t n);
void axpy(double alpha, const double* x, double* y, int64_t n);
void scale(const double* x, double* y, double alpha, int64_t n);
void mul(const double* a, const double* b, double* c, int64_t n);
void add(const double* a, const double* b, double* c, int64_t n);
void sub(const double* a, const double* b, double* c, int64_t n);

bool all_finite(const double* x, int64_t n);

}  // namespace gfm::kernels

#endif  // GFM_KERNELS_HPP
