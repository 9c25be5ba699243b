#include "izf/numcore/ops.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <string>

#include "izf/errors.hpp"

namespace izf::numcore {

namespace {

using RowMajor = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using ConstMap = Eigen::Map<const RowMajor>;
using MutMap = Eigen::Map<RowMajor>;

using detail::Node;
using detail::TensorImpl;
using GradIn = std::vector<std::vector<double>>;

void require_rank2(const Tensor& x, const char* op) {
  if (x.rank() != 2) {
    throw DimensionError(std::string(op) + " expects a rank-2 tensor, got shape " + shape_str(x.shape()));
  }
}

// Flat index maps from an output element to the elements of both operands.
struct Broadcast {
  Shape out_shape;
  bool trivial = false;
  std::vector<std::size_t> a_index;
  std::vector<std::size_t> b_index;
};

Broadcast plan_broadcast(const Shape& a, const Shape& b, const char* op) {
  Broadcast plan;
  if (a == b) {
    plan.out_shape = a;
    plan.trivial = true;
    return plan;
  }
  const std::size_t rank = std::max(a.size(), b.size());
  Shape pa(rank, 1), pb(rank, 1);
  std::copy(a.begin(), a.end(), pa.begin() + (rank - a.size()));
  std::copy(b.begin(), b.end(), pb.begin() + (rank - b.size()));
  plan.out_shape.resize(rank);
  for (std::size_t d = 0; d < rank; ++d) {
    if (pa[d] != pb[d] && pa[d] != 1 && pb[d] != 1) {
      throw DimensionError(std::string(op) + ": shapes " + shape_str(a) + " and " + shape_str(b) +
                           " are not broadcast-compatible");
    }
    plan.out_shape[d] = std::max(pa[d], pb[d]);
  }
  std::vector<std::size_t> sa(rank, 0), sb(rank, 0);
  std::size_t stride_a = 1, stride_b = 1;
  for (std::size_t d = rank; d-- > 0;) {
    sa[d] = pa[d] == 1 ? 0 : stride_a;
    sb[d] = pb[d] == 1 ? 0 : stride_b;
    stride_a *= pa[d];
    stride_b *= pb[d];
  }
  const std::size_t n = shape_numel(plan.out_shape);
  plan.a_index.resize(n);
  plan.b_index.resize(n);
  std::vector<std::size_t> counter(rank, 0);
  std::size_t ia = 0, ib = 0;
  for (std::size_t k = 0; k < n; ++k) {
    plan.a_index[k] = ia;
    plan.b_index[k] = ib;
    for (std::size_t d = rank; d-- > 0;) {
      ++counter[d];
      ia += sa[d];
      ib += sb[d];
      if (counter[d] < plan.out_shape[d]) break;
      ia -= sa[d] * counter[d];
      ib -= sb[d] * counter[d];
      counter[d] = 0;
    }
  }
  return plan;
}

// Shared driver for broadcasting binary ops. `fwd(a, b)` gives the value,
// `da(a, b, out)` and `db(a, b, out)` the local partial derivatives.
template <class Fwd, class Da, class Db>
Tensor binary(const Tensor& a, const Tensor& b, const char* op, Fwd fwd, Da da, Db db) {
  auto plan = std::make_shared<Broadcast>(plan_broadcast(a.shape(), b.shape(), op));
  const std::size_t n = shape_numel(plan->out_shape);
  std::vector<double> out(n);
  auto ad = a.data();
  auto bd = b.data();
  if (plan->trivial) {
    for (std::size_t k = 0; k < n; ++k) out[k] = fwd(ad[k], bd[k]);
  } else {
    for (std::size_t k = 0; k < n; ++k) out[k] = fwd(ad[plan->a_index[k]], bd[plan->b_index[k]]);
  }
  return make_result(plan->out_shape, std::move(out), op, {a, b},
                     [plan, da, db](const Node& node, const TensorImpl& res, std::span<const double> g,
                                    GradIn& gin) {
                       const auto& av = node.inputs[0]->data;
                       const auto& bv = node.inputs[1]->data;
                       const std::size_t n = g.size();
                       for (std::size_t k = 0; k < n; ++k) {
                         const std::size_t ia = plan->trivial ? k : plan->a_index[k];
                         const std::size_t ib = plan->trivial ? k : plan->b_index[k];
                         if (!gin[0].empty()) gin[0][ia] += g[k] * da(av[ia], bv[ib], res.data[k]);
                         if (!gin[1].empty()) gin[1][ib] += g[k] * db(av[ia], bv[ib], res.data[k]);
                       }
                     });
}

// Shared driver for unary elementwise ops; `deriv(x, y)` is dy/dx.
template <class Fwd, class Deriv>
Tensor unary(const Tensor& x, const char* op, Fwd fwd, Deriv deriv) {
  auto xd = x.data();
  std::vector<double> out(xd.size());
  for (std::size_t k = 0; k < xd.size(); ++k) out[k] = fwd(xd[k]);
  return make_result(x.shape(), std::move(out), op, {x},
                     [deriv](const Node& node, const TensorImpl& res, std::span<const double> g, GradIn& gin) {
                       const auto& xv = node.inputs[0]->data;
                       for (std::size_t k = 0; k < g.size(); ++k) gin[0][k] += g[k] * deriv(xv[k], res.data[k]);
                     });
}

}  // namespace

Tensor add(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "add", [](double x, double y) { return x + y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return 1.0; });
}

Tensor sub(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "sub", [](double x, double y) { return x - y; }, [](double, double, double) { return 1.0; },
      [](double, double, double) { return -1.0; });
}

Tensor mul(const Tensor& a, const Tensor& b) {
  return binary(
      a, b, "mul", [](double x, double y) { return x * y; }, [](double, double y, double) { return y; },
      [](double x, double, double) { return x; });
}

Tensor div(const Tensor& a, const Tensor& b) {
  for (double v : b.data()) {
    if (v == 0.0) throw DomainError("div: zero denominator");
  }
  return binary(
      a, b, "div", [](double x, double y) { return x / y; }, [](double, double y, double) { return 1.0 / y; },
      [](double, double y, double out) { return -out / y; });
}

Tensor neg(const Tensor& x) {
  return unary(x, "neg", [](double v) { return -v; }, [](double, double) { return -1.0; });
}

Tensor scale(const Tensor& x, double factor) {
  return unary(
      x, "scale", [factor](double v) { return v * factor; }, [factor](double, double) { return factor; });
}

Tensor add_scalar(const Tensor& x, double value) {
  return unary(
      x, "add_scalar", [value](double v) { return v + value; }, [](double, double) { return 1.0; });
}

Tensor exp(const Tensor& x) {
  return unary(x, "exp", [](double v) { return std::exp(v); }, [](double, double y) { return y; });
}

Tensor log(const Tensor& x) {
  for (double v : x.data()) {
    if (!(v > 0.0)) throw DomainError("log: non-positive input " + std::to_string(v));
  }
  return unary(x, "log", [](double v) { return std::log(v); }, [](double v, double) { return 1.0 / v; });
}

Tensor square(const Tensor& x) {
  return unary(x, "square", [](double v) { return v * v; }, [](double v, double) { return 2.0 * v; });
}

Tensor tanh(const Tensor& x) {
  return unary(x, "tanh", [](double v) { return std::tanh(v); }, [](double, double y) { return 1.0 - y * y; });
}

Tensor leaky_relu(const Tensor& x, double slope) {
  if (!(slope > 0.0 && slope < 1.0)) throw ContractError("leaky_relu: slope must lie in (0, 1)");
  return unary(
      x, "leaky_relu", [slope](double v) { return v >= 0.0 ? v : slope * v; },
      [slope](double v, double) { return v >= 0.0 ? 1.0 : slope; });
}

Tensor sum(const Tensor& x) {
  double total = 0.0;
  for (double v : x.data()) total += v;
  return make_result({}, {total}, "sum", {x},
                     [](const Node&, const TensorImpl&, std::span<const double> g, GradIn& gin) {
                       for (auto& v : gin[0]) v += g[0];
                     });
}

Tensor sum(const Tensor& x, std::size_t axis) {
  require_rank2(x, "sum(axis)");
  if (axis > 1) throw DimensionError("sum(axis): axis must be 0 or 1");
  const std::size_t r = x.rows(), c = x.cols();
  auto xd = x.data();
  Shape shape = axis == 0 ? Shape{1, c} : Shape{r, 1};
  std::vector<double> out(axis == 0 ? c : r, 0.0);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < c; ++j) out[axis == 0 ? j : i] += xd[i * c + j];
  }
  return make_result(shape, std::move(out), "sum_axis", {x},
                     [axis, r, c](const Node&, const TensorImpl&, std::span<const double> g, GradIn& gin) {
                       for (std::size_t i = 0; i < r; ++i) {
                         for (std::size_t j = 0; j < c; ++j) gin[0][i * c + j] += g[axis == 0 ? j : i];
                       }
                     });
}

Tensor mean(const Tensor& x) {
  if (x.numel() == 0) throw ContractError("mean of an empty tensor");
  return scale(sum(x), 1.0 / static_cast<double>(x.numel()));
}

Tensor mean(const Tensor& x, std::size_t axis) {
  require_rank2(x, "mean(axis)");
  const std::size_t count = axis == 0 ? x.rows() : x.cols();
  if (count == 0) throw ContractError("mean over an empty axis");
  return scale(sum(x, axis), 1.0 / static_cast<double>(count));
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  require_rank2(a, "matmul");
  require_rank2(b, "matmul");
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  if (b.rows() != k) {
    throw DimensionError("matmul: inner dimensions disagree, " + shape_str(a.shape()) + " x " +
                         shape_str(b.shape()));
  }
  std::vector<double> out(n * m);
  MutMap(out.data(), n, m).noalias() = ConstMap(a.data().data(), n, k) * ConstMap(b.data().data(), k, m);
  return make_result({n, m}, std::move(out), "matmul", {a, b},
                     [n, k, m](const Node& node, const TensorImpl&, std::span<const double> g, GradIn& gin) {
                       ConstMap gm(g.data(), n, m);
                       if (!gin[0].empty()) {
                         MutMap(gin[0].data(), n, k).noalias() +=
                             gm * ConstMap(node.inputs[1]->data.data(), k, m).transpose();
                       }
                       if (!gin[1].empty()) {
                         MutMap(gin[1].data(), k, m).noalias() +=
                             ConstMap(node.inputs[0]->data.data(), n, k).transpose() * gm;
                       }
                     });
}

Tensor transpose(const Tensor& x) {
  require_rank2(x, "transpose");
  const std::size_t r = x.rows(), c = x.cols();
  std::vector<double> out(r * c);
  MutMap(out.data(), c, r) = ConstMap(x.data().data(), r, c).transpose();
  return make_result({c, r}, std::move(out), "transpose", {x},
                     [r, c](const Node&, const TensorImpl&, std::span<const double> g, GradIn& gin) {
                       MutMap(gin[0].data(), r, c) += ConstMap(g.data(), c, r).transpose();
                     });
}

Tensor sqdist(const Tensor& a, const Tensor& b) {
  require_rank2(a, "sqdist");
  require_rank2(b, "sqdist");
  if (a.cols() != b.cols()) {
    throw DimensionError("sqdist: row widths differ, " + shape_str(a.shape()) + " vs " + shape_str(b.shape()));
  }
  const std::size_t n = a.rows(), m = b.rows(), d = a.cols();
  auto ad = a.data();
  auto bd = b.data();
  std::vector<double> out(n * m);
  for (std::size_t i = 0; i < n; ++i) {
    const double* ar = ad.data() + i * d;
    for (std::size_t j = 0; j < m; ++j) {
      const double* br = bd.data() + j * d;
      double acc = 0.0;
      for (std::size_t t = 0; t < d; ++t) {
        const double diff = ar[t] - br[t];
        acc += diff * diff;
      }
      out[i * m + j] = acc;
    }
  }
  return make_result(
      {n, m}, std::move(out), "sqdist", {a, b},
      [n, m, d](const Node& node, const TensorImpl&, std::span<const double> g, GradIn& gin) {
        // d/da_i = 2 sum_j g_ij (a_i - b_j), d/db_j = -2 sum_i g_ij (a_i - b_j)
        ConstMap gm(g.data(), n, m);
        ConstMap am(node.inputs[0]->data.data(), n, d);
        ConstMap bm(node.inputs[1]->data.data(), m, d);
        if (!gin[0].empty()) {
          Eigen::VectorXd row_sum = gm.rowwise().sum();
          MutMap(gin[0].data(), n, d) += 2.0 * (row_sum.asDiagonal() * am - gm * bm);
        }
        if (!gin[1].empty()) {
          Eigen::VectorXd col_sum = gm.colwise().sum().transpose();
          MutMap(gin[1].data(), m, d) += 2.0 * (col_sum.asDiagonal() * bm - gm.transpose() * am);
        }
      });
}

Tensor slice_cols(const Tensor& x, std::size_t begin, std::size_t end) {
  require_rank2(x, "slice_cols");
  const std::size_t r = x.rows(), c = x.cols();
  if (begin > end || end > c) {
    throw DimensionError("slice_cols: range [" + std::to_string(begin) + ", " + std::to_string(end) +
                         ") outside width " + std::to_string(c));
  }
  const std::size_t w = end - begin;
  auto xd = x.data();
  std::vector<double> out(r * w);
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(xd.data() + i * c + begin, w, out.data() + i * w);
  }
  return make_result({r, w}, std::move(out), "slice_cols", {x},
                     [r, c, w, begin](const Node&, const TensorImpl&, std::span<const double> g, GradIn& gin) {
                       for (std::size_t i = 0; i < r; ++i) {
                         for (std::size_t j = 0; j < w; ++j) gin[0][i * c + begin + j] += g[i * w + j];
                       }
                     });
}

Tensor concat_cols(const Tensor& a, const Tensor& b) {
  require_rank2(a, "concat_cols");
  require_rank2(b, "concat_cols");
  if (a.rows() != b.rows()) {
    throw DimensionError("concat_cols: row counts differ, " + shape_str(a.shape()) + " vs " +
                         shape_str(b.shape()));
  }
  const std::size_t r = a.rows(), ca = a.cols(), cb = b.cols(), c = ca + cb;
  auto ad = a.data();
  auto bd = b.data();
  std::vector<double> out(r * c);
  for (std::size_t i = 0; i < r; ++i) {
    std::copy_n(ad.data() + i * ca, ca, out.data() + i * c);
    std::copy_n(bd.data() + i * cb, cb, out.data() + i * c + ca);
  }
  return make_result({r, c}, std::move(out), "concat_cols", {a, b},
                     [r, ca, cb, c](const Node&, const TensorImpl&, std::span<const double> g, GradIn& gin) {
                       for (std::size_t i = 0; i < r; ++i) {
                         if (!gin[0].empty()) {
                           for (std::size_t j = 0; j < ca; ++j) gin[0][i * ca + j] += g[i * c + j];
                         }
                         if (!gin[1].empty()) {
                           for (std::size_t j = 0; j < cb; ++j) gin[1][i * cb + j] += g[i * c + ca + j];
                         }
                       }
                     });
}

Tensor gather_cols(const Tensor& x, std::span<const std::size_t> index) {
  require_rank2(x, "gather_cols");
  const std::size_t r = x.rows(), c = x.cols(), w = index.size();
  for (auto j : index) {
    if (j >= c) throw DimensionError("gather_cols: column " + std::to_string(j) + " out of range");
  }
  auto idx = std::make_shared<std::vector<std::size_t>>(index.begin(), index.end());
  auto xd = x.data();
  std::vector<double> out(r * w);
  for (std::size_t i = 0; i < r; ++i) {
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = xd[i * c + (*idx)[j]];
  }
  return make_result({r, w}, std::move(out), "gather_cols", {x},
                     [r, c, w, idx](const Node&, const TensorImpl&, std::span<const double> g, GradIn& gin) {
                       for (std::size_t i = 0; i < r; ++i) {
                         for (std::size_t j = 0; j < w; ++j) gin[0][i * c + (*idx)[j]] += g[i * w + j];
                       }
                     });
}

Tensor softmax_cross_entropy(const Tensor& logits, std::span<const std::size_t> targets) {
  require_rank2(logits, "softmax_cross_entropy");
  const std::size_t n = logits.rows(), k = logits.cols();
  if (targets.size() != n) throw DimensionError("softmax_cross_entropy: one target per row required");
  if (n == 0) throw ContractError("softmax_cross_entropy on an empty batch");
  auto ld = logits.data();
  auto probs = std::make_shared<std::vector<double>>(n * k);
  auto tgt = std::make_shared<std::vector<std::size_t>>(targets.begin(), targets.end());
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    if ((*tgt)[i] >= k) throw DimensionError("softmax_cross_entropy: target out of range");
    const double* row = ld.data() + i * k;
    const double peak = *std::max_element(row, row + k);
    double z = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      (*probs)[i * k + j] = std::exp(row[j] - peak);
      z += (*probs)[i * k + j];
    }
    for (std::size_t j = 0; j < k; ++j) (*probs)[i * k + j] /= z;
    total += -(row[(*tgt)[i]] - peak - std::log(z));
  }
  return make_result({}, {total / static_cast<double>(n)}, "softmax_cross_entropy", {logits},
                     [n, k, probs, tgt](const Node&, const TensorImpl&, std::span<const double> g, GradIn& gin) {
                       const double f = g[0] / static_cast<double>(n);
                       for (std::size_t i = 0; i < n; ++i) {
                         for (std::size_t j = 0; j < k; ++j) {
                           const double onehot = j == (*tgt)[i] ? 1.0 : 0.0;
                           gin[0][i * k + j] += f * ((*probs)[i * k + j] - onehot);
                         }
                       }
                     });
}

}  // namespace izf::numcore
