#include <doctest.h>

#include <cmath>

#include "gfm/common.hpp"
#include "gfm/kernels.hpp"
#include "gfm/tensor.hpp"

using namespace gfm;

namespace {

Tensor random_tensor(Rng& rng, std::vector<int64_t> dims, double scale = 1.0) {
  Tensor t(std::move(dims));
  for (int64_t i = 0; i < t.numel(); ++i) t[i] = rng.uniform(-scale, scale);
  return t;
}

}  // namespace

TEST_CASE("tensor basics") {
  Tensor t({2, 3});
  CHECK(t.numel() == 6);
  CHECK(t.rank() == 2);
  t.at(1, 2) = 5.0;
  CHECK(t[5] == 5.0);
  CHECK_THROWS_AS(Tensor({2, 2}, {1.0, 2.0}), Error);
  CHECK_THROWS_AS(Tensor({0, 3}), Error);
}

TEST_CASE("tensor bit_equal distinguishes signed zero") {
  Tensor a({1}, {0.0});
  Tensor b({1}, {-0.0});
  CHECK(a.bit_equal(a));
  CHECK(!a.bit_equal(b));
}

TEST_CASE("gemm variants match the serial reference bit for bit") {
  Rng rng(7);
  const int64_t n = 37, k = 45, m = 29;
  Tensor a = random_tensor(rng, {n, k});
  Tensor bT = random_tensor(rng, {m, k});
  Tensor b = random_tensor(rng, {k, m});
  Tensor aT = random_tensor(rng, {k, n});

  Tensor c1({n, m}), c2({n, m});
  kernels::set_max_threads(4);
  kernels::gemm_nt(a.data(), bT.data(), c1.data(), n, k, m);
  kernels::serial::gemm_nt(a.data(), bT.data(), c2.data(), n, k, m);
  CHECK(c1.bit_equal(c2));

  kernels::gemm_nn(a.data(), b.data(), c1.data(), n, k, m);
  kernels::serial::gemm_nn(a.data(), b.data(), c2.data(), n, k, m);
  CHECK(c1.bit_equal(c2));

  kernels::gemm_tn(aT.data(), b.data(), c1.data(), n, k, m);
  kernels::serial::gemm_tn(aT.data(), b.data(), c2.data(), n, k, m);
  CHECK(c1.bit_equal(c2));
  kernels::set_max_threads(0);
}

TEST_CASE("gemm_nt against hand arithmetic") {
  // [[1,2],[3,4]] * [[1],[1]] = [[3],[7]] with B given already transposed
  Tensor a = Tensor::matrix(2, 2, {1, 2, 3, 4});
  Tensor bT = Tensor::matrix(1, 2, {1, 1});
  Tensor c({2, 1});
  kernels::gemm_nt(a.data(), bT.data(), c.data(), 2, 2, 1);
  CHECK(c[0] == 3.0);
  CHECK(c[1] == 7.0);
}

TEST_CASE("reductions are thread-count invariant") {
  Rng rng(11);
  Tensor x = random_tensor(rng, {100001});
  Tensor y = random_tensor(rng, {100001});

  kernels::set_max_threads(1);
  const double s1 = kernels::reduce_sum(x.data(), x.numel());
  const double q1 = kernels::reduce_sq_diff(x.data(), y.data(), x.numel());
  kernels::set_max_threads(7);
  const double s7 = kernels::reduce_sum(x.data(), x.numel());
  const double q7 = kernels::reduce_sq_diff(x.data(), y.data(), x.numel());
  kernels::set_max_threads(0);

  CHECK(s1 == s7);
  CHECK(q1 == q7);
  CHECK(s1 == kernels::serial::reduce_sum(x.data(), x.numel()));
  CHECK(q1 == kernels::serial::reduce_sq_diff(x.data(), y.data(), x.numel()));

  // and the chunked order agrees with a naive sum to rounding noise
  double naive = 0.0;
  for (int64_t i = 0; i < x.numel(); ++i) naive += x[i];
  CHECK(std::abs(naive - s1) < 1e-9 * std::max(1.0, std::abs(naive)));
}

TEST_CASE("elementwise kernels match serial") {
  Rng rng(3);
  Tensor x = random_tensor(rng, {50000});
  Tensor y = random_tensor(rng, {50000});
  Tensor a({50000}), b({50000});

  kernels::set_max_threads(5);
  kernels::map_sin(x.data(), a.data(), x.numel());
  kernels::serial::map_sin(x.data(), b.data(), x.numel());
  CHECK(a.bit_equal(b));

  kernels::mul(x.data(), y.data(), a.data(), x.numel());
  kernels::serial::mul(x.data(), y.data(), b.data(), x.numel());
  CHECK(a.bit_equal(b));
  kernels::set_max_threads(0);
}

TEST_CASE("all_finite flags nan and inf") {
  Tensor x({3}, {1.0, 2.0, 3.0});
  CHECK(kernels::all_finite(x.data(), 3));
  x[1] = std::nan("");
  CHECK(!kernels::all_finite(x.data(), 3));
  x[1] = INFINITY;
  CHECK(!kernels::all_finite(x.data(), 3));
}

TEST_CASE("rng shuffle is deterministic") {
  std::vector<int> v1{1, 2, 3, 4, 5, 6, 7, 8};
  std::vector<int> v2 = v1;
  Rng r1(42), r2(42);
  r1.shuffle(v1);
  r2.shuffle(v2);
  CHECK(v1 == v2);
}
