#include "gfm/graph.hpp"

#include <atomic>
#include <cmath>

#include "gfm/common.hpp"
#include "gfm/kernels.hpp"

namespace gfm {

namespace {

std::atomic<uint64_t> g_backward_passes{0};

// Broadcast plan for rank <= 2 elementwise ops: dims are right-aligned and
// every axis must match or be 1 on one side.
struct Broadcast {
  int64_t rows = 1, cols = 1;       // output extents
  int64_t out_rank = 1;
  bool a_row_bc = false, a_col_bc = false;
  bool b_row_bc = false, b_col_bc = false;
};

void as_2d(const Tensor& t, int64_t& r, int64_t& c) {
  if (t.rank() == 1) {
    r = 1;
    c = t.dim(0);
  } else if (t.rank() == 2) {
    r = t.dim(0);
    c = t.dim(1);
  } else {
    throw_shape("elementwise op: rank > 2 unsupported, got " + t.dims_str());
  }
}

Broadcast plan_broadcast(const Tensor& a, const Tensor& b, const char* opname) {
  int64_t ar, ac, br, bc;
  as_2d(a, ar, ac);
  as_2d(b, br, bc);
  Broadcast p;
  if (ar != br && ar != 1 && br != 1)
    throw_shape(std::string(opname) + ": rows " + std::to_string(ar) + " vs " +
                std::to_string(br));
  if (ac != bc && ac != 1 && bc != 1)
    throw_shape(std::string(opname) + ": cols " + std::to_string(ac) + " vs " +
                std::to_string(bc));
  p.rows = std::max(ar, br);
  p.cols = std::max(ac, bc);
  p.a_row_bc = ar == 1 && p.rows > 1;
  p.a_col_bc = ac == 1 && p.cols > 1;
  p.b_row_bc = br == 1 && p.rows > 1;
  p.b_col_bc = bc == 1 && p.cols > 1;
  p.out_rank = std::max(a.rank(), b.rank());
  return p;
}

std::vector<int64_t> broadcast_dims(const Broadcast& p) {
  if (p.out_rank == 1) return {p.cols};
  return {p.rows, p.cols};
}

template <typename F>
void broadcast_apply(const Tensor& a, const Tensor& b, Tensor& out,
                     const Broadcast& p, F f) {
  const int64_t R = p.rows, C = p.cols;
  const double* pa = a.data();
  const double* pb = b.data();
  double* po = out.data();
  if (!p.a_row_bc && !p.a_col_bc && !p.b_row_bc && !p.b_col_bc) {
    f(pa, pb, po, R * C);
    return;
  }
  for (int64_t i = 0; i < R; ++i) {
    const double* rowa = pa + (p.a_row_bc ? 0 : i * (p.a_col_bc ? 1 : C));
    const double* rowb = pb + (p.b_row_bc ? 0 : i * (p.b_col_bc ? 1 : C));
    double* rowo = po + i * C;
    if (p.a_col_bc && p.b_col_bc) {
      double tmp;
      f(rowa, rowb, &tmp, 1);
      std::fill(rowo, rowo + C, tmp);
    } else if (p.a_col_bc) {
      for (int64_t j = 0; j < C; ++j) f(rowa, rowb + j, rowo + j, 1);
    } else if (p.b_col_bc) {
      for (int64_t j = 0; j < C; ++j) f(rowa + j, rowb, rowo + j, 1);
    } else {
      f(rowa, rowb, rowo, C);
    }
  }
}

// Reduce the output adjoint over the axes an operand was broadcast along
// and add the result into that operand's adjoint (dims == operand dims).
void reduce_into(const Tensor& g, Tensor& dst, const Broadcast& p, bool row_bc,
                 bool col_bc, bool negate) {
  const int64_t R = p.rows, C = p.cols;
  const double s = negate ? -1.0 : 1.0;
  const double* pg = g.data();
  double* pd = dst.data();
  if (!row_bc && !col_bc) {
    for (int64_t i = 0; i < R * C; ++i) pd[i] += s * pg[i];
  } else if (row_bc && col_bc) {
    pd[0] += s * kernels::reduce_sum(pg, R * C);
  } else if (row_bc) {
    // column sums, fixed i-inner order
    for (int64_t j = 0; j < C; ++j) {
      double acc = 0.0;
      for (int64_t i = 0; i < R; ++i) acc += pg[i * C + j];
      pd[j] += s * acc;
    }
  } else {
    for (int64_t i = 0; i < R; ++i) {
      double acc = 0.0;
      for (int64_t j = 0; j < C; ++j) acc += pg[i * C + j];
      pd[i] += s * acc;
    }
  }
}

}  // namespace

void zero_grads(std::span<Parameter* const> params) {
  for (Parameter* p : params) p->zero_grad();
}

const char* Graph::op_name(Op op) {
  switch (op) {
    case Op::Input: return "input";
    case Op::Param: return "param";
    case Op::Matmul: return "matmul";
    case Op::Matvec: return "matvec";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Scale: return "scale";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
    case Op::Mse: return "mse";
    case Op::Slice: return "slice";
    case Op::Concat: return "concat";
  }
  return "?";
}

Graph::Id Graph::push(Node n, const char* opname) {
  if (n.op != Op::Input && n.op != Op::Param &&
      !kernels::all_finite(n.value.data(), n.value.numel()))
    throw_numeric(std::string("non-finite result in op '") + opname + "'");
  nodes_.push_back(std::move(n));
  return static_cast<Id>(nodes_.size() - 1);
}

Graph::Id Graph::input(Tensor v) {
  Node n;
  n.op = Op::Input;
  n.value = std::move(v);
  return push(std::move(n), "input");
}

Graph::Id Graph::param(Parameter& p) {
  if (!p.value.same_dims(p.grad))
    throw_logic("parameter '" + p.name + "': grad dims " + p.grad.dims_str() +
                " != value dims " + p.value.dims_str());
  Node n;
  n.op = Op::Param;
  n.param = &p;
  n.value = p.value;
  return push(std::move(n), "param");
}

Graph::Id Graph::matmul(Id a, Id b, bool ta, bool tb) {
  if (ta && tb) throw_logic("matmul: ta && tb unsupported");
  const Tensor& A = at(a).value;
  const Tensor& B = at(b).value;
  if (A.rank() != 2 || B.rank() != 2)
    throw_shape("matmul: operands must be rank-2, got " + A.dims_str() + " and " +
                B.dims_str());
  const int64_t n = ta ? A.dim(1) : A.dim(0);
  const int64_t ka = ta ? A.dim(0) : A.dim(1);
  const int64_t kb = tb ? B.dim(1) : B.dim(0);
  const int64_t m = tb ? B.dim(0) : B.dim(1);
  if (ka != kb)
    throw_shape("matmul: inner dims " + std::to_string(ka) + " vs " +
                std::to_string(kb));
  Tensor out({n, m});
  if (!ta && !tb) kernels::gemm_nn(A.data(), B.data(), out.data(), n, ka, m);
  else if (!ta && tb) kernels::gemm_nt(A.data(), B.data(), out.data(), n, ka, m);
  else kernels::gemm_tn(A.data(), B.data(), out.data(), n, ka, m);
  Node nd;
  nd.op = Op::Matmul;
  nd.a = a;
  nd.b = b;
  nd.ta = ta;
  nd.tb = tb;
  nd.value = std::move(out);
  return push(std::move(nd), "matmul");
}

Graph::Id Graph::matvec(Id a, Id x, bool trans) {
  const Tensor& A = at(a).value;
  const Tensor& X = at(x).value;
  if (A.rank() != 2 || X.rank() != 1)
    throw_shape("matvec: need rank-2 and rank-1, got " + A.dims_str() + " and " +
                X.dims_str());
  const int64_t r = A.dim(0), c = A.dim(1);
  const int64_t need = trans ? r : c;
  if (X.dim(0) != need)
    throw_shape("matvec: vector length " + std::to_string(X.dim(0)) + " vs " +
                std::to_string(need));
  Tensor out({trans ? c : r});
  if (!trans) {
    kernels::gemm_nt(A.data(), X.data(), out.data(), r, c, 1);
  } else {
    kernels::gemm_nn(X.data(), A.data(), out.data(), 1, r, c);
  }
  Node nd;
  nd.op = Op::Matvec;
  nd.a = a;
  nd.b = x;
  nd.ta = trans;
  nd.value = std::move(out);
  return push(std::move(nd), "matvec");
}

Graph::Id Graph::add(Id a, Id b) {
  const Tensor& A = at(a).value;
  const Tensor& B = at(b).value;
  Broadcast p = plan_broadcast(A, B, "add");
  Tensor out(broadcast_dims(p));
  broadcast_apply(A, B, out, p,
                  [](const double* x, const double* y, double* z, int64_t n) {
                    kernels::add(x, y, z, n);
                  });
  Node nd;
  nd.op = Op::Add;
  nd.a = a;
  nd.b = b;
  nd.value = std::move(out);
  return push(std::move(nd), "add");
}

Graph::Id Graph::sub(Id a, Id b) {
  const Tensor& A = at(a).value;
  const Tensor& B = at(b).value;
  Broadcast p = plan_broadcast(A, B, "sub");
  Tensor out(broadcast_dims(p));
  broadcast_apply(A, B, out, p,
                  [](const double* x, const double* y, double* z, int64_t n) {
                    kernels::sub(x, y, z, n);
                  });
  Node nd;
  nd.op = Op::Sub;
  nd.a = a;
  nd.b = b;
  nd.value = std::move(out);
  return push(std::move(nd), "sub");
}

Graph::Id Graph::mul(Id a, Id b) {
  const Tensor& A = at(a).value;
  const Tensor& B = at(b).value;
  Broadcast p = plan_broadcast(A, B, "mul");
  Tensor out(broadcast_dims(p));
  broadcast_apply(A, B, out, p,
                  [](const double* x, const double* y, double* z, int64_t n) {
                    kernels::mul(x, y, z, n);
                  });
  Node nd;
  nd.op = Op::Mul;
  nd.a = a;
  nd.b = b;
  nd.value = std::move(out);
  return push(std::move(nd), "mul");
}

Graph::Id Graph::sin(Id x) {
  const Tensor& X = at(x).value;
  Tensor out(X.dims());
  kernels::map_sin(X.data(), out.data(), X.numel());
  Node nd;
  nd.op = Op::Sin;
  nd.a = x;
  nd.value = std::move(out);
  return push(std::move(nd), "sin");
}

Graph::Id Graph::cos(Id x) {
  const Tensor& X = at(x).value;
  Tensor out(X.dims());
  kernels::map_cos(X.data(), out.data(), X.numel());
  Node nd;
  nd.op = Op::Cos;
  nd.a = x;
  nd.value = std::move(out);
  return push(std::move(nd), "cos");
}

Graph::Id Graph::scale(Id x, double c) {
  const Tensor& X = at(x).value;
  Tensor out(X.dims());
  kernels::scale(X.data(), out.data(), c, X.numel());
  Node nd;
  nd.op = Op::Scale;
  nd.a = x;
  nd.c = c;
  nd.value = std::move(out);
  return push(std::move(nd), "scale");
}

Graph::Id Graph::sum(Id x) {
  const Tensor& X = at(x).value;
  Node nd;
  nd.op = Op::Sum;
  nd.a = x;
  nd.value = Tensor::scalar(kernels::reduce_sum(X.data(), X.numel()));
  return push(std::move(nd), "sum");
}

Graph::Id Graph::mean(Id x) {
  const Tensor& X = at(x).value;
  Node nd;
  nd.op = Op::Mean;
  nd.a = x;
  nd.value = Tensor::scalar(kernels::reduce_sum(X.data(), X.numel()) /
                            static_cast<double>(X.numel()));
  return push(std::move(nd), "mean");
}

Graph::Id Graph::mse(Id a, Id b) {
  const Tensor& A = at(a).value;
  const Tensor& B = at(b).value;
  if (!A.same_dims(B))
    throw_shape("mse: dims " + A.dims_str() + " vs " + B.dims_str());
  Node nd;
  nd.op = Op::Mse;
  nd.a = a;
  nd.b = b;
  nd.value = Tensor::scalar(kernels::reduce_sq_diff(A.data(), B.data(), A.numel()) /
                            static_cast<double>(A.numel()));
  return push(std::move(nd), "mse");
}

Graph::Id Graph::slice(Id x, int64_t offset, int64_t len) {
  const Tensor& X = at(x).value;
  if (X.rank() != 1) throw_shape("slice: rank-1 only, got " + X.dims_str());
  if (offset < 0 || len <= 0 || offset + len > X.dim(0))
    throw_shape("slice: range [" + std::to_string(offset) + ", " +
                std::to_string(offset + len) + ") outside length " +
                std::to_string(X.dim(0)));
  Tensor out({len});
  std::copy(X.data() + offset, X.data() + offset + len, out.data());
  Node nd;
  nd.op = Op::Slice;
  nd.a = x;
  nd.off = offset;
  nd.value = std::move(out);
  return push(std::move(nd), "slice");
}

Graph::Id Graph::concat(std::span<const Id> parts) {
  if (parts.empty()) throw_logic("concat: empty part list");
  int64_t total = 0;
  for (Id p : parts) {
    const Tensor& t = at(p).value;
    if (t.rank() != 1) throw_shape("concat: rank-1 only, got " + t.dims_str());
    total += t.dim(0);
  }
  Tensor out({total});
  int64_t off = 0;
  for (Id p : parts) {
    const Tensor& t = at(p).value;
    std::copy(t.data(), t.data() + t.dim(0), out.data() + off);
    off += t.dim(0);
  }
  Node nd;
  nd.op = Op::Concat;
  nd.extra.assign(parts.begin(), parts.end());
  nd.value = std::move(out);
  return push(std::move(nd), "concat");
}

double Graph::scalar_value(Id id) const {
  const Tensor& t = at(id).value;
  if (t.numel() != 1) throw_logic("scalar_value: tensor " + t.dims_str());
  return t[0];
}

Tensor& Graph::ensure_adj(Id id) {
  Node& n = at(id);
  if (!n.has_adj) {
    n.adj = Tensor::zeros(n.value.dims());
    n.has_adj = true;
  }
  return n.adj;
}

void Graph::accumulate(Id id, const Tensor& g) {
  Tensor& a = ensure_adj(id);
  kernels::axpy(1.0, g.data(), a.data(), a.numel());
}

uint64_t Graph::backward_passes() { return g_backward_passes.load(); }

void Graph::backward(Id loss) {
  if (backward_done_)
    throw_logic("backward: called twice without reset_backward()");
  const Node& ln = at(loss);
  if (ln.value.numel() != 1)
    throw_logic("backward: loss is not scalar, dims " + ln.value.dims_str());
  backward_done_ = true;
  ensure_adj(loss)[0] = 1.0;

  for (Id id = loss; id >= 0; --id) {
    Node& n = at(id);
    if (!n.has_adj) continue;
    const Tensor& g = n.adj;
    switch (n.op) {
      case Op::Input:
        break;
      case Op::Param:
        kernels::axpy(1.0, g.data(), n.param->grad.data(), g.numel());
        break;
      case Op::Matmul: {
        const Tensor& A = at(n.a).value;
        const Tensor& B = at(n.b).value;
        Tensor da(A.dims()), db(B.dims());
        const int64_t N = g.dim(0), M = g.dim(1);
        if (!n.ta && !n.tb) {
          // C = A B: dA = G B^T, dB = A^T G
          kernels::gemm_nt(g.data(), B.data(), da.data(), N, M, A.dim(1));
          kernels::gemm_tn(A.data(), g.data(), db.data(), B.dim(0), N, M);
        } else if (!n.ta && n.tb) {
          // C = A B^T: dA = G B, dB = G^T A
          kernels::gemm_nn(g.data(), B.data(), da.data(), N, M, A.dim(1));
          kernels::gemm_tn(g.data(), A.data(), db.data(), M, N, A.dim(1));
        } else {
          // C = A^T B: dA = B G^T... computed as dA[k,n] = sum_m B[k? ] --
          // dA = B G^T is [K,N]: use gemm_nt(B, G)
          kernels::gemm_nt(B.data(), g.data(), da.data(), A.dim(0), M, N);
          kernels::gemm_nn(A.data(), g.data(), db.data(), A.dim(0), N, M);
        }
        accumulate(n.a, da);
        accumulate(n.b, db);
        break;
      }
      case Op::Matvec: {
        const Tensor& A = at(n.a).value;
        const Tensor& X = at(n.b).value;
        Tensor da(A.dims()), dx(X.dims());
        const int64_t r = A.dim(0), c = A.dim(1);
        if (!n.ta) {
          // y = A x: dA = g x^T (outer), dx = A^T g
          kernels::gemm_nt(g.data(), X.data(), da.data(), r, 1, c);
          kernels::gemm_nn(g.data(), A.data(), dx.data(), 1, r, c);
        } else {
          // y = A^T x: dA = x g^T (outer), dx = A g
          kernels::gemm_nt(X.data(), g.data(), da.data(), r, 1, c);
          kernels::gemm_nt(A.data(), g.data(), dx.data(), r, c, 1);
        }
        accumulate(n.a, da);
        accumulate(n.b, dx);
        break;
      }
      case Op::Add: {
        const Tensor& A = at(n.a).value;
        const Tensor& B = at(n.b).value;
        Broadcast p = plan_broadcast(A, B, "add");
        reduce_into(g, ensure_adj(n.a), p, p.a_row_bc, p.a_col_bc, false);
        reduce_into(g, ensure_adj(n.b), p, p.b_row_bc, p.b_col_bc, false);
        break;
      }
      case Op::Sub: {
        const Tensor& A = at(n.a).value;
        const Tensor& B = at(n.b).value;
        Broadcast p = plan_broadcast(A, B, "sub");
        reduce_into(g, ensure_adj(n.a), p, p.a_row_bc, p.a_col_bc, false);
        reduce_into(g, ensure_adj(n.b), p, p.b_row_bc, p.b_col_bc, true);
        break;
      }
      case Op::Mul: {
        const Tensor& A = at(n.a).value;
        const Tensor& B = at(n.b).value;
        Broadcast p = plan_broadcast(A, B, "mul");
        Tensor gb(g.dims()), ga(g.dims());
        broadcast_apply(g, B, ga, plan_broadcast(g, B, "mul"),
                        [](const double* x, const double* y, double* z, int64_t k) {
                          kernels::mul(x, y, z, k);
                        });
        broadcast_apply(g, A, gb, plan_broadcast(g, A, "mul"),
                        [](const double* x, const double* y, double* z, int64_t k) {
                          kernels::mul(x, y, z, k);
                        });
        reduce_into(ga, ensure_adj(n.a), p, p.a_row_bc, p.a_col_bc, false);
        reduce_into(gb, ensure_adj(n.b), p, p.b_row_bc, p.b_col_bc, false);
        break;
      }
      case Op::Sin: {
        const Tensor& X = at(n.a).value;
        Tensor d(X.dims());
        kernels::map_cos(X.data(), d.data(), X.numel());
        kernels::mul(d.data(), g.data(), d.data(), X.numel());
        accumulate(n.a, d);
        break;
      }
      case Op::Cos: {
        const Tensor& X = at(n.a).value;
        Tensor d(X.dims());
        kernels::map_sin(X.data(), d.data(), X.numel());
        kernels::scale(d.data(), d.data(), -1.0, X.numel());
        kernels::mul(d.data(), g.data(), d.data(), X.numel());
        accumulate(n.a, d);
        break;
      }
      case Op::Scale: {
        Tensor& a = ensure_adj(n.a);
        kernels::axpy(n.c, g.data(), a.data(), a.numel());
        break;
      }
      case Op::Sum: {
        Tensor& a = ensure_adj(n.a);
        const double gs = g[0];
        for (int64_t i = 0; i < a.numel(); ++i) a[i] += gs;
        break;
      }
      case Op::Mean: {
        Tensor& a = ensure_adj(n.a);
        const double gs = g[0] / static_cast<double>(a.numel());
        for (int64_t i = 0; i < a.numel(); ++i) a[i] += gs;
        break;
      }
      case Op::Mse: {
        const Tensor& A = at(n.a).value;
        const Tensor& B = at(n.b).value;
        Tensor& da = ensure_adj(n.a);
        Tensor& db = ensure_adj(n.b);
        const double s = 2.0 * g[0] / static_cast<double>(A.numel());
        for (int64_t i = 0; i < A.numel(); ++i) {
          const double d = s * (A[i] - B[i]);
          da[i] += d;
          db[i] -= d;
        }
        break;
      }
      case Op::Slice: {
        Tensor& a = ensure_adj(n.a);
        for (int64_t i = 0; i < g.numel(); ++i) a[n.off + i] += g[i];
        break;
      }
      case Op::Concat: {
        int64_t off = 0;
        for (Id p : n.extra) {
          Tensor& a = ensure_adj(p);
          for (int64_t i = 0; i < a.numel(); ++i) a[i] += g[off + i];
          off += a.numel();
        }
        break;
      }
    }
  }
  g_backward_passes.fetch_add(1);
}

void Graph::reset_backward() {
  for (Node& n : nodes_) {
    n.adj = Tensor();
    n.has_adj = false;
  }
  backward_done_ = false;
}

double grad_check(const std::function<Graph::Id(Graph&)>& build,
                  std::span<Parameter* const> params, double step,
                  int max_entries_per_param, uint64_t seed) {
  if (step <= 0.0) throw_logic("grad_check: step must be positive");
  zero_grads(params);
  {
    Graph g;
    g.backward(build(g));
  }
  auto eval = [&]() {
    Graph g;
    return g.scalar_value(build(g));
  };
  Rng rng(seed);
  double max_rel = 0.0;
  for (Parameter* p : params) {
    const int64_t n = p->value.numel();
    std::vector<int64_t> entries;
    if (max_entries_per_param <= 0 || max_entries_per_param >= n) {
      entries.resize(static_cast<size_t>(n));
      for (int64_t i = 0; i < n; ++i) entries[static_cast<size_t>(i)] = i;
    } else {
      for (int i = 0; i < max_entries_per_param; ++i)
        entries.push_back(static_cast<int64_t>(rng.uniform_int(static_cast<uint64_t>(n))));
    }
    for (int64_t e : entries) {
      const double orig = p->value[e];
      p->value[e] = orig + step;
      const double fp = eval();
      p->value[e] = orig - step;
      const double fm = eval();
      p->value[e] = orig;
      const double fd = (fp - fm) / (2.0 * step);
      const double rel = std::abs(p->grad[e] - fd) / (std::abs(fd) + 1e-12);
      max_rel = std::max(max_rel, rel);
    }
  }
  return max_rel;
}

}  // namespace gfm
