#include <doctest.h>

#include <cmath>

#include "gfm/common.hpp"
#include "gfm/graph.hpp"

using namespace gfm;

TEST_CASE("forward matmul, sin, broadcast-add hand examples") {
  Graph g;
  // matmul([[1,2],[3,4]], [[1],[1]]) = [[3],[7]]
  auto a = g.input(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  auto b = g.input(Tensor::matrix(2, 1, {1, 1}));
  auto c = g.matmul(a, b);
  CHECK(g.value(c)[0] == 3.0);
  CHECK(g.value(c)[1] == 7.0);

  // sin of a zero tensor is zero
  auto s = g.sin(g.input(Tensor::zeros({3})));
  for (int i = 0; i < 3; ++i) CHECK(g.value(s)[i] == 0.0);

  // broadcast-add(row [1,2,3], column [10,20]) = [[11,12,13],[21,22,23]]
  auto row = g.input(Tensor::matrix(1, 3, {1, 2, 3}));
  auto col = g.input(Tensor::matrix(2, 1, {10, 20}));
  auto sum = g.add(row, col);
  const Tensor& v = g.value(sum);
  CHECK(v.dims() == std::vector<int64_t>{2, 3});
  CHECK(v.at(0, 0) == 11.0);
  CHECK(v.at(0, 2) == 13.0);
  CHECK(v.at(1, 0) == 21.0);
  CHECK(v.at(1, 2) == 23.0);
}

TEST_CASE("forward is deterministic") {
  auto run = [] {
    Graph g;
    auto x = g.input(Tensor::matrix(3, 3, {1, 2, 3, 4, 5, 6, 7, 8, 9}));
    auto y = g.sin(g.matmul(x, x));
    return g.value(g.mul(y, y));
  };
  CHECK(run().bit_equal(run()));
}

TEST_CASE("shape errors name the offending dims") {
  Graph g;
  auto a = g.input(Tensor::matrix(2, 3, {1, 2, 3, 4, 5, 6}));
  auto b = g.input(Tensor::matrix(4, 2, {1, 2, 3, 4, 5, 6, 7, 8}));
  CHECK_THROWS_WITH_AS(g.matmul(a, b), doctest::Contains("3 vs 4"), Error);
}

TEST_CASE("non-finite results raise naming the op") {
  Graph g;
  auto big = g.input(Tensor({1}, {1e308}));
  // doubling 1e308 overflows to inf
  CHECK_THROWS_WITH_AS(g.add(big, big), doctest::Contains("add"), Error);
}

TEST_CASE("backward: sum gives ones") {
  Parameter p("p", Tensor({4}, {1, 2, 3, 4}));
  Graph g;
  g.backward(g.sum(g.param(p)));
  for (int i = 0; i < 4; ++i) CHECK(p.grad[i] == 1.0);
}

TEST_CASE("backward: d sum(p*p) = 2p") {
  Parameter p("p", Tensor({2}, {2, 3}));
  Graph g;
  auto pp = g.param(p);
  g.backward(g.sum(g.mul(pp, pp)));
  CHECK(p.grad[0] == 4.0);
  CHECK(p.grad[1] == 6.0);
}

TEST_CASE("backward: d sum(sin(p)) at 0 = cos(0) = 1") {
  Parameter p("p", Tensor({1}, {0.0}));
  Graph g;
  g.backward(g.sum(g.sin(g.param(p))));
  CHECK(p.grad[0] == 1.0);
}

TEST_CASE("gradient accumulation is additive; double backward guarded") {
  Parameter p("p", Tensor({3}, {1, 2, 3}));
  Graph g;
  auto loss = g.sum(g.mul(g.param(p), g.param(p)));
  g.backward(loss);
  Tensor once = p.grad;
  CHECK_THROWS_WITH_AS(g.backward(loss), doctest::Contains("reset"), Error);
  g.reset_backward();
  g.backward(loss);
  for (int i = 0; i < 3; ++i) CHECK(p.grad[i] == 2.0 * once[i]);
}

TEST_CASE("backward requires a scalar loss") {
  Parameter p("p", Tensor({2}, {1, 2}));
  Graph g;
  auto node = g.param(p);
  CHECK_THROWS_WITH_AS(g.backward(node), doctest::Contains("scalar"), Error);
}

TEST_CASE("unreachable parameters stay untouched") {
  Parameter used("used", Tensor({2}, {1, 2}));
  Parameter unused("unused", Tensor({2}, {5, 5}));
  Graph g;
  auto loss = g.sum(g.param(used));
  (void)g.param(unused);  // recorded but not an ancestor of the loss
  g.backward(loss);
  CHECK(unused.grad[0] == 0.0);
  CHECK(unused.grad[1] == 0.0);
}

TEST_CASE("grad_check: quadratic expression") {
  Parameter p("p", Tensor({5}, {0.3, -1.2, 0.7, 2.0, -0.4}));
  Parameter* params[] = {&p};
  const double err = grad_check(
      [&](Graph& g) {
        auto x = g.param(p);
        return g.sum(g.mul(x, x));
      },
      params, 1e-5);
  CHECK(err < 1e-6);
}

TEST_CASE("grad_check: constant expression has zero error") {
  Parameter p("p", Tensor({3}, {1, 2, 3}));
  Parameter* params[] = {&p};
  const double err = grad_check(
      [&](Graph& g) {
        (void)g.param(p);
        return g.sum(g.input(Tensor({2}, {1.0, 2.0})));
      },
      params, 1e-5);
  CHECK(err <= 1e-12);
}

TEST_CASE("grad_check: mixed expression with every op") {
  Rng rng(5);
  Parameter w("w", Tensor({3, 4}));
  Parameter v("v", Tensor({4}));
  for (int64_t i = 0; i < w.value.numel(); ++i) w.value[i] = rng.uniform(-1, 1);
  for (int64_t i = 0; i < v.value.numel(); ++i) v.value[i] = rng.uniform(-1, 1);
  Parameter* params[] = {&w, &v};
  const double err = grad_check(
      [&](Graph& g) {
        auto wn = g.param(w);
        auto vn = g.param(v);
        auto y = g.matvec(wn, vn);               // [3]
        auto z = g.matvec(wn, y, /*trans=*/true);  // [4]
        auto s = g.sin(g.scale(z, 1.7));
        auto c = g.cos(g.sub(s, vn));
        auto sl = g.concat(std::vector<Graph::Id>{g.slice(c, 0, 2), g.slice(c, 2, 2)});
        return g.add(g.mean(g.mul(sl, sl)), g.mse(s, vn));
      },
      params, 1e-6);
  CHECK(err < 1e-7);
}

TEST_CASE("grad_check: matmul transpose flags") {
  Rng rng(9);
  Parameter a("a", Tensor({3, 2}));
  Parameter b("b", Tensor({3, 4}));
  for (int64_t i = 0; i < a.value.numel(); ++i) a.value[i] = rng.uniform(-1, 1);
  for (int64_t i = 0; i < b.value.numel(); ++i) b.value[i] = rng.uniform(-1, 1);
  Parameter* params[] = {&a, &b};
  const double err = grad_check(
      [&](Graph& g) {
        auto an = g.param(a);
        auto bn = g.param(b);
        auto c = g.matmul(an, bn, /*ta=*/true, /*tb=*/false);  // [2,4]
        auto d = g.matmul(c, bn, /*ta=*/false, /*tb=*/false);  // needs [4,*]: use tb
        (void)d;
        return g.sum(g.mul(c, c));
      },
      params, 1e-6);
  CHECK(err < 1e-7);
}

TEST_CASE("grad_check: broadcast add/mul reductions") {
  Rng rng(13);
  Parameter m("m", Tensor({4, 3}));
  Parameter r("r", Tensor({3}));
  Parameter c("c", Tensor({4, 1}));
  for (int64_t i = 0; i < m.value.numel(); ++i) m.value[i] = rng.uniform(-1, 1);
  for (int64_t i = 0; i < r.value.numel(); ++i) r.value[i] = rng.uniform(-1, 1);
  for (int64_t i = 0; i < c.value.numel(); ++i) c.value[i] = rng.uniform(-1, 1);
  Parameter* params[] = {&m, &r, &c};
  const double err = grad_check(
      [&](Graph& g) {
        auto mn = g.param(m);
        auto rn = g.param(r);
        auto cn = g.param(c);
        auto x = g.add(mn, rn);   // row broadcast
        auto y = g.mul(x, cn);    // column broadcast
        auto z = g.sub(y, g.scale(mn, 0.3));
        return g.mean(g.mul(z, z));
      },
      params, 1e-6);
  CHECK(err < 1e-7);
}

TEST_CASE("matmul ta&&tb is rejected") {
  Graph g;
  auto a = g.input(Tensor::matrix(2, 2, {1, 2, 3, 4}));
  CHECK_THROWS_AS(g.matmul(a, a, true, true), Error);
}
