#ifndef GFM_GRAPH_HPP
#define GFM_GRAPH_HPP

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "gfm/tensor.hpp"

namespace gfm {

// Trainable leaf. Gradient always has the same dims as the value and is
// accumulated (+=) by Graph::backward; callers reset it explicitly.
struct Parameter {
  std::string name;
  Tensor value;
  Tensor grad;

  Parameter() = default;
  Parameter(std::string n, Tensor v)
      : name(std::move(n)), value(std::move(v)), grad(Tensor::zeros(value.dims())) {}

  void zero_grad() { std::fill(grad.span().begin(), grad.span().end(), 0.0); }
};

void zero_grads(std::span<Parameter* const> params);

// Reverse-mode tape. Values are computed eagerly as ops are recorded; every
// op output is checked for non-finite entries. One backward pass per tape;
// reset_backward() clears the adjoints so a second pass can accumulate
// another copy of the gradient into the parameters.
class Graph {
 public:
  using Id = int32_t;

  Id input(Tensor v);           // constant leaf
  Id param(Parameter& p);       // trainable leaf

  // rank-2 matrix product; ta/tb transpose the operands (ta && tb unsupported)
  Id matmul(Id a, Id b, bool ta = false, bool tb = false);
  // rank-2 * rank-1 product; trans computes A^T x
  Id matvec(Id a, Id x, bool trans = false);

  // Elementwise, with numpy-style right-aligned broadcasting over singleton
  // axes (rank <= 2).
  Id add(Id a, Id b);
  Id sub(Id a, Id b);
  Id mul(Id a, Id b);

  Id sin(Id x);
  Id cos(Id x);
  Id scale(Id x, double c);

  Id sum(Id x);
  Id mean(Id x);
  Id mse(Id a, Id b);  // mean of squared differences, scalar

  Id slice(Id x, int64_t offset, int64_t len);  // rank-1
  Id concat(std::span<const Id> parts);          // rank-1

  const Tensor& value(Id id) const { return nodes_[static_cast<size_t>(id)].value; }
  double scalar_value(Id id) const;

  void backward(Id loss);
  void reset_backward();

  size_t size() const { return nodes_.size(); }

  // Process-wide count of completed backward passes; lets tests assert that
  // an evaluation path performed no gradient computation.
  static uint64_t backward_passes();

 private:
  enum class Op : uint8_t {
    Input, Param, Matmul, Matvec, Add, Sub, Mul,
    Sin, Cos, Scale, Sum, Mean, Mse, Slice, Concat,
  };

  struct Node {
    Op op;
    Id a = -1, b = -1;
    bool ta = false, tb = false;
    double c = 0.0;
    int64_t off = 0;
    std::vector<Id> extra;
    Parameter* param = nullptr;
    Tensor value;
    Tensor adj;       // allocated lazily during backward
    bool has_adj = false;
  };

  Id push(Node n, const char* opname);
  Node& at(Id id) { return nodes_[static_cast<size_t>(id)]; }
  const Node& at(Id id) const { return nodes_[static_cast<size_t>(id)]; }
  Tensor& ensure_adj(Id id);
  void accumulate(Id id, const Tensor& g);
  static const char* op_name(Op op);

  std::vector<Node> nodes_;
  bool backward_done_ = false;
};

// Max over checked parameter entries of
// |analytic - central_difference| / (|central_difference| + 1e-12).
// `build` must reconstruct the scalar expression from the parameters'
// current values on every call. With max_entries_per_param == 0 every entry
// is checked; otherwise a deterministic random subset of that size.
double grad_check(const std::function<Graph::Id(Graph&)>& build,
                  std::span<Parameter* const> params, double step,
                  int max_entries_per_param = 0, uint64_t seed = 1);

}  // namespace gfm

#endif  // GFM_GRAPH_HPP
