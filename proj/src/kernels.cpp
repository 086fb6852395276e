#include "gfm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace gfm::kernels {

namespace {
int g_max_threads = 0;  // 0 = library default

inline int clamp_threads(int64_t work_items) {
#ifdef _OPENMP
  int t = g_max_threads > 0 ? g_max_threads : omp_get_max_threads();
  // Tiny workloads stay on one thread; spawning costs more than it saves.
  if (work_items < 4) return 1;
  return static_cast<int>(std::min<int64_t>(t, work_items));
#else
  (void)work_items;
  return 1;
#endif
}
}  // namespace

void set_max_threads(int n) { g_max_threads = n; }
int max_threads() {
#ifdef _OPENMP
  return g_max_threads > 0 ? g_max_threads : omp_get_max_threads();
#else
  return 1;
#endif
}

namespace serial {

void gemm_nt(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m) {
  for (int64_t i = 0; i < n; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * m;
    for (int64_t j = 0; j < m; ++j) {
      const double* bj = b + j * k;
      double acc = 0.0;
      for (int64_t t = 0; t < k; ++t) acc += ai[t] * bj[t];
      ci[j] = acc;
    }
  }
}

void gemm_nn(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m) {
  for (int64_t i = 0; i < n; ++i) {
    const double* ai = a + i * k;
    double* ci = c + i * m;
    std::fill(ci, ci + m, 0.0);
    for (int64_t t = 0; t < k; ++t) {
      const double av = ai[t];
      const double* bt = b + t * m;
      for (int64_t j = 0; j < m; ++j) ci[j] += av * bt[j];
    }
  }
}

void gemm_tn(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m) {
  for (int64_t i = 0; i < n; ++i) {
    double* ci = c + i * m;
    std::fill(ci, ci + m, 0.0);
    for (int64_t t = 0; t < k; ++t) {
      const double av = a[t * n + i];
      const double* bt = b + t * m;
      for (int64_t j = 0; j < m; ++j) ci[j] += av * bt[j];
    }
  }
}

double reduce_sum(const double* x, int64_t n) {
  const int64_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  double total = 0.0;
  for (int64_t ci = 0; ci < chunks; ++ci) {
    const int64_t lo = ci * kReduceChunk;
    const int64_t hi = std::min(n, lo + kReduceChunk);
    double acc = 0.0;
    for (int64_t i = lo; i < hi; ++i) acc += x[i];
    total += acc;
  }
  return total;
}

double reduce_sq_diff(const double* a, const double* b, int64_t n) {
  const int64_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  double total = 0.0;
  for (int64_t ci = 0; ci < chunks; ++ci) {
    const int64_t lo = ci * kReduceChunk;
    const int64_t hi = std::min(n, lo + kReduceChunk);
    double acc = 0.0;
    for (int64_t i = lo; i < hi; ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    total += acc;
  }
  return total;
}

void map_sin(const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = std::sin(x[i]);
}
void map_cos(const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = std::cos(x[i]);
}
void axpy(double alpha, const double* x, double* y, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}
void scale(const double* x, double* y, double alpha, int64_t n) {
  for (int64_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}
void mul(const double* a, const double* b, double* c, int64_t n) {
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] * b[i];
}
void add(const double* a, const double* b, double* c, int64_t n) {
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] + b[i];
}
void sub(const double* a, const double* b, double* c, int64_t n) {
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] - b[i];
}

}  // namespace serial

// Each OpenMP kernel parallelizes over units whose inner arithmetic is the
// same sequential code as the serial reference, so outputs match bit for
// bit regardless of thread count.

void gemm_nt(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m) {
  const int nt = clamp_threads(n);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t i = 0; i < n; ++i)
    serial::gemm_nt(a + i * k, b, c + i * m, 1, k, m);
}

void gemm_nn(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m) {
  const int nt = clamp_threads(n);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t i = 0; i < n; ++i)
    serial::gemm_nn(a + i * k, b, c + i * m, 1, k, m);
}

void gemm_tn(const double* a, const double* b, double* c, int64_t n, int64_t k, int64_t m) {
  const int nt = clamp_threads(n);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t i = 0; i < n; ++i) {
    double* ci = c + i * m;
    std::fill(ci, ci + m, 0.0);
    for (int64_t t = 0; t < k; ++t) {
      const double av = a[t * n + i];
      const double* bt = b + t * m;
      for (int64_t j = 0; j < m; ++j) ci[j] += av * bt[j];
    }
  }
}

double reduce_sum(const double* x, int64_t n) {
  const int64_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  if (chunks == 1) return serial::reduce_sum(x, n);
  std::vector<double> partial(static_cast<size_t>(chunks));
  const int nt = clamp_threads(chunks);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t ci = 0; ci < chunks; ++ci) {
    const int64_t lo = ci * kReduceChunk;
    const int64_t hi = std::min(n, lo + kReduceChunk);
    double acc = 0.0;
    for (int64_t i = lo; i < hi; ++i) acc += x[i];
    partial[static_cast<size_t>(ci)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

double reduce_sq_diff(const double* a, const double* b, int64_t n) {
  const int64_t chunks = (n + kReduceChunk - 1) / kReduceChunk;
  if (chunks == 1) return serial::reduce_sq_diff(a, b, n);
  std::vector<double> partial(static_cast<size_t>(chunks));
  const int nt = clamp_threads(chunks);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t ci = 0; ci < chunks; ++ci) {
    const int64_t lo = ci * kReduceChunk;
    const int64_t hi = std::min(n, lo + kReduceChunk);
    double acc = 0.0;
    for (int64_t i = lo; i < hi; ++i) {
      const double d = a[i] - b[i];
      acc += d * d;
    }
    partial[static_cast<size_t>(ci)] = acc;
  }
  double total = 0.0;
  for (double p : partial) total += p;
  return total;
}

namespace {
constexpr int64_t kMapGrain = 16384;
}

void map_sin(const double* x, double* y, int64_t n) {
  const int nt = clamp_threads(n / kMapGrain);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t i = 0; i < n; ++i) y[i] = std::sin(x[i]);
}
void map_cos(const double* x, double* y, int64_t n) {
  const int nt = clamp_threads(n / kMapGrain);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t i = 0; i < n; ++i) y[i] = std::cos(x[i]);
}
void axpy(double alpha, const double* x, double* y, int64_t n) {
  const int nt = clamp_threads(n / kMapGrain);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}
void scale(const double* x, double* y, double alpha, int64_t n) {
  const int nt = clamp_threads(n / kMapGrain);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t i = 0; i < n; ++i) y[i] = alpha * x[i];
}
void mul(const double* a, const double* b, double* c, int64_t n) {
  const int nt = clamp_threads(n / kMapGrain);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] * b[i];
}
void add(const double* a, const double* b, double* c, int64_t n) {
  const int nt = clamp_threads(n / kMapGrain);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] + b[i];
}
void sub(const double* a, const double* b, double* c, int64_t n) {
  const int nt = clamp_threads(n / kMapGrain);
#pragma omp parallel for schedule(static) num_threads(nt) if (nt > 1)
  for (int64_t i = 0; i < n; ++i) c[i] = a[i] - b[i];
}

bool all_finite(const double* x, int64_t n) {
  bool ok = true;
  const int nt = clamp_threads(n / kMapGrain);
#pragma omp parallel for schedule(static) num_threads(nt) reduction(&& : ok) if (nt > 1)
  for (int64_t i = 0; i < n; ++i) ok = ok && std::isfinite(x[i]);
  return ok;
}

}  // namespace gfm::kernels
