#pragma once

// Reverse-mode autodiff over dense 2-D tensors, sized for a small transformer.
// Graphs are define-by-run: every op evaluates eagerly at construction, so the
// node list is already a topological order and backward() walks it in reverse.
// Values are stored in the graph's scalar type T (float in training, double in
// the finite-difference oracle); reductions always accumulate in 64-bit.

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "tmkd/kernels.hpp"

namespace tmkd {

using NodeId = int;

template <typename T>
class Graph {
 public:
  struct Node {
    const char* op;
    int rows = 0, cols = 0;
    std::vector<T> val;        // owned storage (empty for external leaves)
    const T* ext = nullptr;    // external read-only leaf data
    std::vector<T> grad;       // allocated on demand during backward
    int p0 = -1, p1 = -1, p2 = -1;
    std::vector<int> plist;    // concat parents
    double c0 = 0.0;           // scalar attribute (scale factor, clamp, ...)
    int i0 = 0, i1 = 0;        // integer attributes (offset/len, pick index)
    std::vector<int> ids;      // embedding indices
    std::vector<std::uint8_t> mask;  // valid/dropout mask
    bool is_param = false;
  };

  int size() const { return static_cast<int>(nodes_.size()); }
  int rows(NodeId n) const { return nodes_[n].rows; }
  int cols(NodeId n) const { return nodes_[n].cols; }
  std::size_t numel(NodeId n) const {
    return static_cast<std::size_t>(nodes_[n].rows) * nodes_[n].cols;
  }
  const T* data(NodeId n) const {
    const Node& nd = nodes_[n];
    return nd.ext ? nd.ext : nd.val.data();
  }
  // Gradient of a node; empty before backward touches it.
  const std::vector<T>& grad(NodeId n) const { return nodes_[n].grad; }
  const std::vector<NodeId>& params() const { return params_; }

  // ---- leaves ----

  NodeId input(int rows, int cols, std::vector<T> values, const char* name = "input") {
    check_count(name, rows, cols, values.size());
    Node nd;
    nd.op = name;
    nd.rows = rows;
    nd.cols = cols;
    nd.val = std::move(values);
    return push(std::move(nd));
  }

  // Parameter leaf viewing external storage. Only valid while `data` outlives
  // the graph. Gradients are still accumulated graph-locally.
  NodeId param_view(int rows, int cols, const T* data, const char* name = "param") {
    Node nd;
    nd.op = name;
    nd.rows = rows;
    nd.cols = cols;
    nd.ext = data;
    nd.is_param = true;
    NodeId id = push(std::move(nd));
    params_.push_back(id);
    return id;
  }

  NodeId param(int rows, int cols, std::vector<T> values, const char* name = "param") {
    NodeId id = input(rows, cols, std::move(values), name);
    nodes_[id].is_param = true;
    params_.push_back(id);
    return id;
  }

  // ---- elementwise / linear ----

  NodeId add(NodeId a, NodeId b) {
    require_same_shape("add", a, b);
    Node nd = like("add", a);
    nd.p0 = a;
    nd.p1 = b;
    const T* pa = data(a);
    const T* pb = data(b);
    for (std::size_t i = 0; i < nd.val.size(); ++i) nd.val[i] = pa[i] + pb[i];
    return finish(std::move(nd));
  }

  NodeId sub(NodeId a, NodeId b) {
    require_same_shape("sub", a, b);
    Node nd = like("sub", a);
    nd.p0 = a;
    nd.p1 = b;
    const T* pa = data(a);
    const T* pb = data(b);
    for (std::size_t i = 0; i < nd.val.size(); ++i) nd.val[i] = pa[i] - pb[i];
    return finish(std::move(nd));
  }

  NodeId mul(NodeId a, NodeId b) {
    require_same_shape("mul", a, b);
    Node nd = like("mul", a);
    nd.p0 = a;
    nd.p1 = b;
    const T* pa = data(a);
    const T* pb = data(b);
    for (std::size_t i = 0; i < nd.val.size(); ++i) nd.val[i] = pa[i] * pb[i];
    return finish(std::move(nd));
  }

  NodeId scale(NodeId a, double c) {
    Node nd = like("scale", a);
    nd.p0 = a;
    nd.c0 = c;
    const T* pa = data(a);
    for (std::size_t i = 0; i < nd.val.size(); ++i)
      nd.val[i] = static_cast<T>(c * static_cast<double>(pa[i]));
    return finish(std::move(nd));
  }

  NodeId square(NodeId a) {
    Node nd = like("square", a);
    nd.p0 = a;
    const T* pa = data(a);
    for (std::size_t i = 0; i < nd.val.size(); ++i) nd.val[i] = pa[i] * pa[i];
    return finish(std::move(nd));
  }

  // log(max(x, clamp)); clamped entries get zero gradient
  NodeId log_clamped(NodeId a, double clamp = 1e-12) {
    Node nd = like("log", a);
    nd.p0 = a;
    nd.c0 = clamp;
    const T* pa = data(a);
    for (std::size_t i = 0; i < nd.val.size(); ++i) {
      double x = static_cast<double>(pa[i]);
      nd.val[i] = static_cast<T>(std::log(x > clamp ? x : clamp));
    }
    return finish(std::move(nd));
  }

  NodeId gelu(NodeId a) {
    Node nd = like("gelu", a);
    nd.p0 = a;
    const T* pa = data(a);
    for (std::size_t i = 0; i < nd.val.size(); ++i) {
      double x = static_cast<double>(pa[i]);
      nd.val[i] = static_cast<T>(0.5 * x * (1.0 + std::erf(x * kInvSqrt2)));
    }
    return finish(std::move(nd));
  }

  // Inverted dropout with a caller-supplied keep mask (1 = keep).
  NodeId dropout(NodeId a, const std::vector<std::uint8_t>& keep, double keep_prob) {
    if (keep.size() != numel(a)) shape_error("dropout", a, a);
    Node nd = like("dropout", a);
    nd.p0 = a;
    nd.c0 = 1.0 / keep_prob;
    nd.mask = keep;
    const T* pa = data(a);
    for (std::size_t i = 0; i < nd.val.size(); ++i)
      nd.val[i] = keep[i] ? static_cast<T>(static_cast<double>(pa[i]) * nd.c0) : T(0);
    return finish(std::move(nd));
  }

  // ---- matmul family ----

  NodeId matmul(NodeId a, NodeId b) {
    if (cols(a) != rows(b)) shape_error("matmul", a, b);
    Node nd;
    nd.op = "matmul";
    nd.rows = rows(a);
    nd.cols = cols(b);
    nd.val.resize(numel2(nd));
    nd.p0 = a;
    nd.p1 = b;
    kern::gemm_nn(rows(a), cols(b), cols(a), data(a), data(b), nd.val.data(),
                  false, kern::default_par());
    return finish(std::move(nd));
  }

  // A * B^T
  NodeId matmul_nt(NodeId a, NodeId b) {
    if (cols(a) != cols(b)) shape_error("matmul_nt", a, b);
    Node nd;
    nd.op = "matmul_nt";
    nd.rows = rows(a);
    nd.cols = rows(b);
    nd.val.resize(numel2(nd));
    nd.p0 = a;
    nd.p1 = b;
    kern::gemm_nt(rows(a), rows(b), cols(a), data(a), data(b), nd.val.data(),
                  false, kern::default_par());
    return finish(std::move(nd));
  }

  // mat (r x c) + row vector (1 x c) broadcast over rows
  NodeId add_row_broadcast(NodeId a, NodeId b) {
    if (rows(b) != 1 || cols(a) != cols(b)) shape_error("add_row_broadcast", a, b);
    Node nd = like("add_row_broadcast", a);
    nd.p0 = a;
    nd.p1 = b;
    const T* pa = data(a);
    const T* pb = data(b);
    int c = cols(a);
    for (int i = 0; i < rows(a); ++i)
      for (int j = 0; j < c; ++j)
        nd.val[static_cast<std::size_t>(i) * c + j] = pa[static_cast<std::size_t>(i) * c + j] + pb[j];
    return finish(std::move(nd));
  }

  // ---- structure ----

  NodeId slice_cols(NodeId a, int off, int len) {
    if (off < 0 || len <= 0 || off + len > cols(a)) shape_error("slice_cols", a, a);
    Node nd;
    nd.op = "slice_cols";
    nd.rows = rows(a);
    nd.cols = len;
    nd.val.resize(numel2(nd));
    nd.p0 = a;
    nd.i0 = off;
    const T* pa = data(a);
    int c = cols(a);
    for (int i = 0; i < nd.rows; ++i)
      for (int j = 0; j < len; ++j)
        nd.val[static_cast<std::size_t>(i) * len + j] = pa[static_cast<std::size_t>(i) * c + off + j];
    return finish(std::move(nd));
  }

  NodeId slice_rows(NodeId a, int off, int len) {
    if (off < 0 || len <= 0 || off + len > rows(a)) shape_error("slice_rows", a, a);
    Node nd;
    nd.op = "slice_rows";
    nd.rows = len;
    nd.cols = cols(a);
    nd.val.assign(data(a) + static_cast<std::size_t>(off) * cols(a),
                  data(a) + static_cast<std::size_t>(off + len) * cols(a));
    nd.p0 = a;
    nd.i0 = off;
    return finish(std::move(nd));
  }

  NodeId concat_cols(const std::vector<NodeId>& parts) {
    if (parts.empty()) throw std::invalid_argument("concat_cols: no inputs");
    int r = rows(parts[0]);
    int ctotal = 0;
    for (NodeId p : parts) {
      if (rows(p) != r) shape_error("concat_cols", parts[0], p);
      ctotal += cols(p);
    }
    Node nd;
    nd.op = "concat_cols";
    nd.rows = r;
    nd.cols = ctotal;
    nd.val.resize(numel2(nd));
    nd.plist = parts;
    int off = 0;
    for (NodeId p : parts) {
      const T* pp = data(p);
      int pc = cols(p);
      for (int i = 0; i < r; ++i)
        for (int j = 0; j < pc; ++j)
          nd.val[static_cast<std::size_t>(i) * ctotal + off + j] =
              pp[static_cast<std::size_t>(i) * pc + j];
      off += pc;
    }
    return finish(std::move(nd));
  }

  // rows of `table` selected by token ids
  NodeId embedding(NodeId table, const std::vector<int>& ids) {
    Node nd;
    nd.op = "embedding";
    nd.rows = static_cast<int>(ids.size());
    nd.cols = cols(table);
    nd.val.resize(numel2(nd));
    nd.p0 = table;
    nd.ids = ids;
    const T* pt = data(table);
    int c = cols(table);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      int id = ids[i];
      if (id < 0 || id >= rows(table))
        throw std::out_of_range("embedding: id " + std::to_string(id) +
                                " out of range [0," + std::to_string(rows(table)) + ")");
      for (int j = 0; j < c; ++j) nd.val[i * c + j] = pt[static_cast<std::size_t>(id) * c + j];
    }
    return finish(std::move(nd));
  }

  NodeId pick(NodeId a, int index) {
    if (index < 0 || static_cast<std::size_t>(index) >= numel(a)) shape_error("pick", a, a);
    Node nd;
    nd.op = "pick";
    nd.rows = 1;
    nd.cols = 1;
    nd.val = {data(a)[index]};
    nd.p0 = a;
    nd.i0 = index;
    return finish(std::move(nd));
  }

  // ---- row-wise nonlinearities ----

  // Softmax over each row with max-subtraction. Optional validity mask over
  // columns: invalid columns get exactly zero probability and zero gradient.
  NodeId softmax_rows(NodeId a, const std::vector<std::uint8_t>* valid = nullptr) {
    if (valid && valid->size() != static_cast<std::size_t>(cols(a)))
      shape_error("softmax_rows", a, a);
    Node nd = like("softmax_rows", a);
    nd.p0 = a;
    if (valid) nd.mask = *valid;
    const T* pa = data(a);
    int r = rows(a), c = cols(a);
    for (int i = 0; i < r; ++i) {
      const T* in = pa + static_cast<std::size_t>(i) * c;
      T* out = nd.val.data() + static_cast<std::size_t>(i) * c;
      double mx = -1e300;
      for (int j = 0; j < c; ++j)
        if (!valid || (*valid)[j]) mx = std::max(mx, static_cast<double>(in[j]));
      if (mx == -1e300) throw std::invalid_argument("softmax_rows: all columns masked");
      double denom = 0.0;
      for (int j = 0; j < c; ++j) {
        if (!valid || (*valid)[j]) denom += std::exp(static_cast<double>(in[j]) - mx);
      }
      for (int j = 0; j < c; ++j) {
        out[j] = (!valid || (*valid)[j])
                     ? static_cast<T>(std::exp(static_cast<double>(in[j]) - mx) / denom)
                     : T(0);
      }
    }
    return finish(std::move(nd));
  }

  // Per-row layer norm with affine gain/bias (1 x cols each).
  NodeId layer_norm_rows(NodeId x, NodeId gain, NodeId bias, double eps = 1e-5) {
    if (rows(gain) != 1 || cols(gain) != cols(x) || rows(bias) != 1 || cols(bias) != cols(x))
      shape_error("layer_norm_rows", x, gain);
    Node nd = like("layer_norm_rows", x);
    nd.p0 = x;
    nd.p1 = gain;
    nd.p2 = bias;
    nd.c0 = eps;
    const T* px = data(x);
    const T* pg = data(gain);
    const T* pb = data(bias);
    int r = rows(x), c = cols(x);
    for (int i = 0; i < r; ++i) {
      const T* in = px + static_cast<std::size_t>(i) * c;
      T* out = nd.val.data() + static_cast<std::size_t>(i) * c;
      double mean = 0.0;
      for (int j = 0; j < c; ++j) mean += static_cast<double>(in[j]);
      mean /= c;
      double var = 0.0;
      for (int j = 0; j < c; ++j) {
        double d = static_cast<double>(in[j]) - mean;
        var += d * d;
      }
      var /= c;
      double inv = 1.0 / std::sqrt(var + eps);
      for (int j = 0; j < c; ++j) {
        double xhat = (static_cast<double>(in[j]) - mean) * inv;
        out[j] = static_cast<T>(xhat * static_cast<double>(pg[j]) + static_cast<double>(pb[j]));
      }
    }
    return finish(std::move(nd));
  }

  // ---- reductions (64-bit accumulation) ----

  NodeId sum_all(NodeId a) {
    Node nd;
    nd.op = "sum_all";
    nd.rows = 1;
    nd.cols = 1;
    nd.p0 = a;
    const T* pa = data(a);
    double s = 0.0;
    for (std::size_t i = 0; i < numel(a); ++i) s += static_cast<double>(pa[i]);
    nd.val = {static_cast<T>(s)};
    return finish(std::move(nd));
  }

  NodeId mean_all(NodeId a) {
    NodeId s = sum_all(a);
    return scale(s, 1.0 / static_cast<double>(numel(a)));
  }

  // ---- backward ----

  bool is_scalar(NodeId n) const { return rows(n) == 1 && cols(n) == 1; }
  double scalar(NodeId n) const { return static_cast<double>(data(n)[0]); }

  // Accumulates gradients for every node reachable from `root`, in fixed
  // reverse topological order.
  void backward(NodeId root) {
    if (!is_scalar(root))
      throw std::invalid_argument(std::string("backward: root must be scalar, got ") +
                                  shape_str(root));
    ensure_grad(root);
    nodes_[root].grad[0] = T(1);
    for (NodeId n = root; n >= 0; --n) {
      Node& nd = nodes_[n];
      if (nd.grad.empty()) continue;  // not reachable from root
      backward_node(n, nd);
    }
  }

  const std::vector<T>& param_grad(NodeId p) {
    ensure_grad(p);
    return nodes_[p].grad;
  }

 private:
  static constexpr double kInvSqrt2 = 0.7071067811865476;

  std::vector<Node> nodes_;
  std::vector<NodeId> params_;

  std::size_t numel2(const Node& nd) const {
    return static_cast<std::size_t>(nd.rows) * nd.cols;
  }

  Node like(const char* op, NodeId a) {
    Node nd;
    nd.op = op;
    nd.rows = rows(a);
    nd.cols = cols(a);
    nd.val.resize(numel2(nd));
    return nd;
  }

  NodeId push(Node&& nd) {
    nodes_.push_back(std::move(nd));
    return static_cast<NodeId>(nodes_.size() - 1);
  }

  NodeId finish(Node&& nd) {
    for (T v : nd.val)
      if (std::isnan(static_cast<double>(v)))
        throw std::runtime_error(std::string("op '") + nd.op + "' produced NaN");
    return push(std::move(nd));
  }

  std::string shape_str(NodeId n) const {
    return "(" + std::to_string(rows(n)) + "x" + std::to_string(cols(n)) + ")";
  }

  [[noreturn]] void shape_error(const char* op, NodeId a, NodeId b) const {
    throw std::invalid_argument(std::string(op) + ": incompatible shapes " + shape_str(a) +
                                " and " + shape_str(b));
  }

  static void check_count(const char* op, int rows, int cols, std::size_t got) {
    if (static_cast<std::size_t>(rows) * cols != got)
      throw std::invalid_argument(std::string(op) + ": value count " + std::to_string(got) +
                                  " != " + std::to_string(rows) + "x" + std::to_string(cols));
  }

  void ensure_grad(NodeId n) {
    if (nodes_[n].grad.empty()) nodes_[n].grad.assign(numel(n), T(0));
  }

  T* g(NodeId n) {
    ensure_grad(n);
    return nodes_[n].grad.data();
  }

  void backward_node(NodeId n, Node& nd) {
    const std::string_view op(nd.op);
    const T* gy = nd.grad.data();
    if (op == "add") {
      axpy(nd.p0, gy, 1.0);
      axpy(nd.p1, gy, 1.0);
    } else if (op == "sub") {
      axpy(nd.p0, gy, 1.0);
      axpy(nd.p1, gy, -1.0);
    } else if (op == "mul") {
      T* ga = g(nd.p0);
      T* gb = g(nd.p1);
      const T* pa = data(nd.p0);
      const T* pb = data(nd.p1);
      for (std::size_t i = 0; i < nd.val.size(); ++i) {
        ga[i] += gy[i] * pb[i];
        gb[i] += gy[i] * pa[i];
      }
    } else if (op == "scale") {
      axpy(nd.p0, gy, nd.c0);
    } else if (op == "square") {
      T* ga = g(nd.p0);
      const T* pa = data(nd.p0);
      for (std::size_t i = 0; i < nd.val.size(); ++i)
        ga[i] += static_cast<T>(2.0 * static_cast<double>(gy[i]) * static_cast<double>(pa[i]));
    } else if (op == "log") {
      T* ga = g(nd.p0);
      const T* pa = data(nd.p0);
      for (std::size_t i = 0; i < nd.val.size(); ++i) {
        double x = static_cast<double>(pa[i]);
        if (x > nd.c0) ga[i] += static_cast<T>(static_cast<double>(gy[i]) / x);
      }
    } else if (op == "gelu") {
      T* ga = g(nd.p0);
      const T* pa = data(nd.p0);
      for (std::size_t i = 0; i < nd.val.size(); ++i) {
        double x = static_cast<double>(pa[i]);
        double cdf = 0.5 * (1.0 + std::erf(x * kInvSqrt2));
        double pdf = std::exp(-0.5 * x * x) * 0.3989422804014327;
        ga[i] += static_cast<T>(static_cast<double>(gy[i]) * (cdf + x * pdf));
      }
    } else if (op == "dropout") {
      T* ga = g(nd.p0);
      for (std::size_t i = 0; i < nd.val.size(); ++i)
        if (nd.mask[i]) ga[i] += static_cast<T>(static_cast<double>(gy[i]) * nd.c0);
    } else if (op == "matmul") {
      // dA += dC * B^T ; dB += A^T * dC
      kern::gemm_nt(nd.rows, cols(nd.p0), nd.cols, gy, data(nd.p1), g(nd.p0), true,
                    kern::default_par());
      kern::gemm_tn(rows(nd.p1), nd.cols, nd.rows, data(nd.p0), gy, g(nd.p1), true,
                    kern::default_par());
    } else if (op == "matmul_nt") {
      // C = A * B^T: dA += dC * B ; dB += dC^T * A
      kern::gemm_nn(nd.rows, cols(nd.p0), nd.cols, gy, data(nd.p1), g(nd.p0), true,
                    kern::default_par());
      kern::gemm_tn(rows(nd.p1), cols(nd.p1), nd.rows, gy, data(nd.p0), g(nd.p1), true,
                    kern::default_par());
    } else if (op == "add_row_broadcast") {
      axpy(nd.p0, gy, 1.0);
      T* gb = g(nd.p1);
      for (int i = 0; i < nd.rows; ++i)
        for (int j = 0; j < nd.cols; ++j)
          gb[j] += gy[static_cast<std::size_t>(i) * nd.cols + j];
    } else if (op == "slice_cols") {
      T* ga = g(nd.p0);
      int c = cols(nd.p0);
      for (int i = 0; i < nd.rows; ++i)
        for (int j = 0; j < nd.cols; ++j)
          ga[static_cast<std::size_t>(i) * c + nd.i0 + j] +=
              gy[static_cast<std::size_t>(i) * nd.cols + j];
    } else if (op == "slice_rows") {
      T* ga = g(nd.p0);
      int c = nd.cols;
      for (int i = 0; i < nd.rows; ++i)
        for (int j = 0; j < c; ++j)
          ga[static_cast<std::size_t>(nd.i0 + i) * c + j] +=
              gy[static_cast<std::size_t>(i) * c + j];
    } else if (op == "concat_cols") {
      int off = 0;
      for (NodeId p : nd.plist) {
        T* gp = g(p);
        int pc = cols(p);
        for (int i = 0; i < nd.rows; ++i)
          for (int j = 0; j < pc; ++j)
            gp[static_cast<std::size_t>(i) * pc + j] +=
                gy[static_cast<std::size_t>(i) * nd.cols + off + j];
        off += pc;
      }
    } else if (op == "embedding") {
      T* gt = g(nd.p0);
      int c = nd.cols;
      for (std::size_t i = 0; i < nd.ids.size(); ++i)
        for (int j = 0; j < c; ++j)
          gt[static_cast<std::size_t>(nd.ids[i]) * c + j] += gy[i * c + j];
    } else if (op == "pick") {
      g(nd.p0)[nd.i0] += gy[0];
    } else if (op == "softmax_rows") {
      T* ga = g(nd.p0);
      const T* y = nd.val.data();
      int r = nd.rows, c = nd.cols;
      const bool masked = !nd.mask.empty();
      for (int i = 0; i < r; ++i) {
        const T* yi = y + static_cast<std::size_t>(i) * c;
        const T* gyi = gy + static_cast<std::size_t>(i) * c;
        T* gai = ga + static_cast<std::size_t>(i) * c;
        double dot = 0.0;
        for (int j = 0; j < c; ++j)
          if (!masked || nd.mask[j])
            dot += static_cast<double>(gyi[j]) * static_cast<double>(yi[j]);
        for (int j = 0; j < c; ++j)
          if (!masked || nd.mask[j])
            gai[j] += static_cast<T>(static_cast<double>(yi[j]) *
                                     (static_cast<double>(gyi[j]) - dot));
      }
    } else if (op == "layer_norm_rows") {
      backward_layer_norm(nd, gy);
    } else if (op == "sum_all") {
      T* ga = g(nd.p0);
      double s = static_cast<double>(gy[0]);
      for (std::size_t i = 0; i < numel(nd.p0); ++i)
        ga[i] += static_cast<T>(s);
    } else if (nd.p0 < 0 && nd.plist.empty()) {
      // leaf
    } else {
      throw std::logic_error(std::string("backward: unhandled op ") + nd.op);
    }
    (void)n;
  }

  void backward_layer_norm(Node& nd, const T* gy) {
    const T* px = data(nd.p0);
    const T* pg = data(nd.p1);
    T* gx = g(nd.p0);
    T* gg = g(nd.p1);
    T* gb = g(nd.p2);
    int r = nd.rows, c = nd.cols;
    for (int i = 0; i < r; ++i) {
      const T* x = px + static_cast<std::size_t>(i) * c;
      const T* dy = gy + static_cast<std::size_t>(i) * c;
      double mean = 0.0;
      for (int j = 0; j < c; ++j) mean += static_cast<double>(x[j]);
      mean /= c;
      double var = 0.0;
      for (int j = 0; j < c; ++j) {
        double d = static_cast<double>(x[j]) - mean;
        var += d * d;
      }
      var /= c;
      double inv = 1.0 / std::sqrt(var + nd.c0);
      double sum_dxhat = 0.0, sum_dxhat_xhat = 0.0;
      for (int j = 0; j < c; ++j) {
        double xhat = (static_cast<double>(x[j]) - mean) * inv;
        double dxhat = static_cast<double>(dy[j]) * static_cast<double>(pg[j]);
        sum_dxhat += dxhat;
        sum_dxhat_xhat += dxhat * xhat;
        gg[j] += static_cast<T>(static_cast<double>(dy[j]) * xhat);
        gb[j] += dy[j];
      }
      for (int j = 0; j < c; ++j) {
        double xhat = (static_cast<double>(x[j]) - mean) * inv;
        double dxhat = static_cast<double>(dy[j]) * static_cast<double>(pg[j]);
        gx[static_cast<std::size_t>(i) * c + j] += static_cast<T>(
            inv * (dxhat - sum_dxhat / c - xhat * sum_dxhat_xhat / c));
      }
    }
  }

  void axpy(NodeId dst, const T* gy, double c) {
    T* gd = g(dst);
    std::size_t count = numel(dst);
    for (std::size_t i = 0; i < count; ++i)
      gd[i] += static_cast<T>(c * static_cast<double>(gy[i]));
  }
};

// Central finite-difference oracle. `build` constructs a scalar-rooted graph
// from the given flat parameter vector (splitting it up however it likes via
// Graph::param) and returns the root. Returns the max over parameters of
// |analytic - fd| / max(1, |analytic|, |fd|). Runs entirely in 64-bit.
using GradCheckBuilder = std::function<NodeId(Graph<double>&, const std::vector<double>&)>;

double grad_check(const GradCheckBuilder& build, std::vector<double> point, double h = 1e-3);

}  // namespace tmkd
