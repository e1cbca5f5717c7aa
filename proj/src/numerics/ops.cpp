#include "holo/numerics/ops.hpp"

#include <cblas.h>

#include <cmath>
#include <limits>
#include <string>

namespace holo::ops {
namespace {

// Results must not depend on how many threads BLAS happens to pick.
const bool kSingleThreadedBlas = [] {
  openblas_set_num_threads(1);
  return true;
}();

// C[m,n] += op(A) * op(B), row-major; op transposes when the flag is set.
// A is [m,k] (or [k,m] when ta), B is [k,n] (or [n,k] when tb).
void gemm_acc(bool ta, bool tb, std::size_t m, std::size_t k, std::size_t n, const float* A, const float* B,
              float* C) {
  cblas_sgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans, int(m), int(n), int(k),
              1.0f, A, ta ? int(m) : int(k), B, tb ? int(k) : int(n), 1.0f, C, int(n));
}
void gemm_acc(bool ta, bool tb, std::size_t m, std::size_t k, std::size_t n, const double* A, const double* B,
              double* C) {
  cblas_dgemm(CblasRowMajor, ta ? CblasTrans : CblasNoTrans, tb ? CblasTrans : CblasNoTrans, int(m), int(n), int(k),
              1.0, A, ta ? int(m) : int(k), B, tb ? int(k) : int(n), 1.0, C, int(n));
}

bool is_suffix(const Shape& small, const Shape& big) {
  if (small.size() > big.size()) return false;
  return std::equal(small.rbegin(), small.rend(), big.rbegin());
}

template <typename T>
void check_finite(std::span<const T> xs, const char* op) {
  for (T v : xs) {
    if (std::isnan(v)) throw NumericError(std::string(op) + ": NaN input");
  }
}

enum class BinOp { Add, Sub, Mul };

template <typename T>
Var<T> binary(const Var<T>& a, const Var<T>& b, BinOp op) {
  const auto& av = a.value();
  const auto& bv = b.value();
  if (!(bv.shape() == av.shape() || bv.numel() == 1 || is_suffix(bv.shape(), av.shape()))) {
    throw DimensionError("elementwise op: cannot broadcast " + shape_str(bv.shape()) + " onto " +
                         shape_str(av.shape()));
  }
  const std::size_t n = av.numel();
  const std::size_t bn = bv.numel();
  Tensor<T> out(av.shape());
  auto o = out.data();
  auto x = av.data();
  auto y = bv.data();
  for (std::size_t i = 0; i < n; ++i) {
    const T yb = y[i % bn];
    switch (op) {
      case BinOp::Add: o[i] = x[i] + yb; break;
      case BinOp::Sub: o[i] = x[i] - yb; break;
      case BinOp::Mul: o[i] = x[i] * yb; break;
    }
  }
  return make_result<T>(std::move(out), {a, b}, [op, n, bn](Node<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    auto g = self.grad.data();
    if (pa.requires_grad) {
      auto& ga = pa.grad_buffer();
      auto gd = ga.data();
      if (op == BinOp::Mul) {
        auto y = pb.value.data();
        for (std::size_t i = 0; i < n; ++i) gd[i] += g[i] * y[i % bn];
      } else {
        for (std::size_t i = 0; i < n; ++i) gd[i] += g[i];
      }
    }
    if (pb.requires_grad) {
      auto gd = pb.grad_buffer().data();
      if (op == BinOp::Mul) {
        auto x = pa.value.data();
        for (std::size_t i = 0; i < n; ++i) gd[i % bn] += g[i] * x[i];
      } else {
        const T sign = op == BinOp::Sub ? T{-1} : T{1};
        for (std::size_t i = 0; i < n; ++i) gd[i % bn] += sign * g[i];
      }
    }
  });
}

template <typename T>
Var<T> unary(const Var<T>& a, T (*f)(T), T (*df)(T)) {
  const auto& av = a.value();
  Tensor<T> out(av.shape());
  auto o = out.data();
  auto x = av.data();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] = f(x[i]);
  return make_result<T>(std::move(out), {a}, [df](Node<T>& self) {
    auto& pa = *self.parents[0];
    auto g = self.grad.data();
    auto x = pa.value.data();
    auto gd = pa.grad_buffer().data();
    for (std::size_t i = 0; i < g.size(); ++i) gd[i] += g[i] * df(x[i]);
  });
}

template <typename T>
constexpr T kGeluC = T(0.7978845608028654);  // sqrt(2/pi)

template <typename T>
T gelu_f(T x) {
  return T(0.5) * x * (T(1) + std::tanh(kGeluC<T> * (x + T(0.044715) * x * x * x)));
}
template <typename T>
T gelu_df(T x) {
  const T u = kGeluC<T> * (x + T(0.044715) * x * x * x);
  const T t = std::tanh(u);
  const T du = kGeluC<T> * (T(1) + T(3) * T(0.044715) * x * x);
  return T(0.5) * (T(1) + t) + T(0.5) * x * (T(1) - t * t) * du;
}
template <typename T>
T relu_f(T x) { return x > T(0) ? x : T(0); }
template <typename T>
T relu_df(T x) { return x > T(0) ? T(1) : T(0); }
template <typename T>
T square_f(T x) { return x * x; }
template <typename T>
T square_df(T x) { return T(2) * x; }

}  // namespace

template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b) {
  const Shape& as = a.shape();
  const Shape& bs = b.shape();
  if (as.size() < 2 || bs.size() < 2) {
    throw DimensionError("matmul needs rank >= 2 operands, got " + shape_str(as) + " and " +
                         shape_str(bs));
  }
  const std::size_t m = as[as.size() - 2];
  const std::size_t k = as[as.size() - 1];
  const std::size_t kb = bs[bs.size() - 2];
  const std::size_t n = bs[bs.size() - 1];
  const Shape a_batch(as.begin(), as.end() - 2);
  const Shape b_batch(bs.begin(), bs.end() - 2);
  if (k != kb || !(a_batch == b_batch || a_batch.empty() || b_batch.empty())) {
    throw DimensionError("matmul shape mismatch: " + shape_str(as) + " x " + shape_str(bs));
  }
  const Shape& batch = a_batch.empty() ? b_batch : a_batch;
  const std::size_t nb = shape_numel(batch);
  const std::size_t a_stride = a_batch.empty() ? 0 : m * k;
  const std::size_t b_stride = b_batch.empty() ? 0 : k * n;

  Shape out_shape = batch;
  out_shape.push_back(m);
  out_shape.push_back(n);
  Tensor<T> out(out_shape);
  const T* A = a.value().data().data();
  const T* B = b.value().data().data();
  T* C = out.data().data();
  for (std::size_t s = 0; s < nb; ++s) gemm_acc(false, false, m, k, n, A + s * a_stride, B + s * b_stride, C + s * m * n);

  return make_result<T>(std::move(out), {a, b}, [=](Node<T>& self) {
    auto& pa = *self.parents[0];
    auto& pb = *self.parents[1];
    const T* G = self.grad.data().data();
    const T* Av = pa.value.data().data();
    const T* Bv = pb.value.data().data();
    if (pa.requires_grad) {
      T* dA = pa.grad_buffer().data().data();
      for (std::size_t s = 0; s < nb; ++s) gemm_acc(false, true, m, n, k, G + s * m * n, Bv + s * b_stride, dA + s * a_stride);
    }
    if (pb.requires_grad) {
      T* dB = pb.grad_buffer().data().data();
      for (std::size_t s = 0; s < nb; ++s) gemm_acc(true, false, k, m, n, Av + s * a_stride, G + s * m * n, dB + s * b_stride);
    }
  });
}

template <typename T>
Var<T> gather(const Var<T>& x, Shape out_shape, const std::vector<std::int64_t>& index) {
  Tensor<T> out(std::move(out_shape));
  if (index.size() != out.numel()) {
    throw DimensionError("gather: index length does not match output shape " + shape_str(out.shape()));
  }
  const auto src = x.value().data();
  auto o = out.data();
  for (std::size_t i = 0; i < index.size(); ++i) {
    const auto j = index[i];
    if (j >= static_cast<std::int64_t>(src.size())) throw DimensionError("gather: index out of range");
    o[i] = j < 0 ? T{0} : src[static_cast<std::size_t>(j)];
  }
  return make_result<T>(std::move(out), {x}, [index](Node<T>& self) {
    auto g = self.grad.data();
    auto gd = self.parents[0]->grad_buffer().data();
    for (std::size_t i = 0; i < index.size(); ++i) {
      if (index[i] >= 0) gd[static_cast<std::size_t>(index[i])] += g[i];
    }
  });
}

template <typename T>
Var<T> permute(const Var<T>& a, const std::vector<std::size_t>& axes) {
  const Shape& s = a.shape();
  if (axes.size() != s.size()) throw DimensionError("permute: axes rank mismatch for " + shape_str(s));
  std::vector<std::size_t> in_stride(s.size(), 1);
  for (std::size_t i = s.size(); i-- > 1;) in_stride[i - 1] = in_stride[i] * s[i];
  Shape out_shape(s.size());
  std::vector<bool> seen(s.size(), false);
  for (std::size_t i = 0; i < axes.size(); ++i) {
    if (axes[i] >= s.size() || seen[axes[i]]) throw DimensionError("permute: invalid axes");
    seen[axes[i]] = true;
    out_shape[i] = s[axes[i]];
  }
  const std::size_t total = a.value().numel();
  std::vector<std::int64_t> index(total);
  std::vector<std::size_t> counter(s.size(), 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    std::size_t src = 0;
    for (std::size_t i = 0; i < axes.size(); ++i) src += counter[i] * in_stride[axes[i]];
    index[flat] = static_cast<std::int64_t>(src);
    for (std::size_t i = axes.size(); i-- > 0;) {
      if (++counter[i] < out_shape[i]) break;
      counter[i] = 0;
    }
  }
  return gather(a, std::move(out_shape), index);
}

template <typename T>
Var<T> transpose(const Var<T>& a) {
  const auto r = a.shape().size();
  if (r < 2) throw DimensionError("transpose needs rank >= 2, got " + shape_str(a.shape()));
  std::vector<std::size_t> axes(r);
  std::iota(axes.begin(), axes.end(), 0);
  std::swap(axes[r - 1], axes[r - 2]);
  return permute(a, axes);
}

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape) {
  Tensor<T> out = a.value().reshaped(std::move(shape));
  return make_result<T>(std::move(out), {a}, [](Node<T>& self) {
    self.parents[0]->accumulate(self.grad.data());
  });
}

template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b) { return binary(a, b, BinOp::Add); }
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b) { return binary(a, b, BinOp::Sub); }
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b) { return binary(a, b, BinOp::Mul); }

template <typename T>
Var<T> scale(const Var<T>& a, T s) {
  Tensor<T> out = a.value();
  for (auto& v : out.data()) v *= s;
  return make_result<T>(std::move(out), {a}, [s](Node<T>& self) {
    auto g = self.grad.data();
    auto gd = self.parents[0]->grad_buffer().data();
    for (std::size_t i = 0; i < g.size(); ++i) gd[i] += s * g[i];
  });
}

template <typename T>
Var<T> square(const Var<T>& a) { return unary<T>(a, &square_f<T>, &square_df<T>); }
template <typename T>
Var<T> relu(const Var<T>& a) { return unary<T>(a, &relu_f<T>, &relu_df<T>); }
template <typename T>
Var<T> gelu(const Var<T>& a) { return unary<T>(a, &gelu_f<T>, &gelu_df<T>); }

template <typename T>
Var<T> softmax(const Var<T>& x, std::size_t axis) {
  const Shape& s = x.shape();
  if (axis >= s.size()) throw DimensionError("softmax axis out of range for " + shape_str(s));
  check_finite<T>(x.value().data(), "softmax");
  std::size_t outer = 1, inner = 1;
  for (std::size_t i = 0; i < axis; ++i) outer *= s[i];
  for (std::size_t i = axis + 1; i < s.size(); ++i) inner *= s[i];
  const std::size_t len = s[axis];
  Tensor<T> out(s);
  const auto in = x.value().data();
  auto o = out.data();
  for (std::size_t ou = 0; ou < outer; ++ou) {
    for (std::size_t in_i = 0; in_i < inner; ++in_i) {
      const std::size_t base = ou * len * inner + in_i;
      T mx = -std::numeric_limits<T>::infinity();
      for (std::size_t j = 0; j < len; ++j) mx = std::max(mx, in[base + j * inner]);
      T total = 0;
      for (std::size_t j = 0; j < len; ++j) {
        const T e = std::exp(in[base + j * inner] - mx);
        o[base + j * inner] = e;
        total += e;
      }
      for (std::size_t j = 0; j < len; ++j) o[base + j * inner] /= total;
    }
  }
  return make_result<T>(std::move(out), {x}, [outer, inner, len](Node<T>& self) {
    auto y = self.value.data();
    auto g = self.grad.data();
    auto gd = self.parents[0]->grad_buffer().data();
    for (std::size_t ou = 0; ou < outer; ++ou) {
      for (std::size_t in_i = 0; in_i < inner; ++in_i) {
        const std::size_t base = ou * len * inner + in_i;
        T dot = 0;
        for (std::size_t j = 0; j < len; ++j) dot += g[base + j * inner] * y[base + j * inner];
        for (std::size_t j = 0; j < len; ++j) {
          const std::size_t idx = base + j * inner;
          gd[idx] += y[idx] * (g[idx] - dot);
        }
      }
    }
  });
}

template <typename T>
Var<T> log_softmax(const Var<T>& x) {
  const Shape& s = x.shape();
  if (s.empty()) throw DimensionError("log_softmax needs rank >= 1");
  check_finite<T>(x.value().data(), "log_softmax");
  const std::size_t len = s.back();
  const std::size_t rows = x.value().numel() / len;
  Tensor<T> out(s);
  const auto in = x.value().data();
  auto o = out.data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = in.data() + r * len;
    T mx = *std::max_element(row, row + len);
    T total = 0;
    for (std::size_t j = 0; j < len; ++j) total += std::exp(row[j] - mx);
    const T lse = mx + std::log(total);
    for (std::size_t j = 0; j < len; ++j) o[r * len + j] = row[j] - lse;
  }
  return make_result<T>(std::move(out), {x}, [rows, len](Node<T>& self) {
    auto y = self.value.data();
    auto g = self.grad.data();
    auto gd = self.parents[0]->grad_buffer().data();
    for (std::size_t r = 0; r < rows; ++r) {
      T gs = 0;
      for (std::size_t j = 0; j < len; ++j) gs += g[r * len + j];
      for (std::size_t j = 0; j < len; ++j) {
        const std::size_t i = r * len + j;
        gd[i] += g[i] - std::exp(y[i]) * gs;
      }
    }
  });
}

template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps) {
  const Shape& s = x.shape();
  if (s.empty()) throw DimensionError("layer_norm needs rank >= 1");
  const std::size_t d = s.back();
  const std::size_t rows = x.value().numel() / d;
  const bool affine = static_cast<bool>(gamma);
  if (affine && (gamma.value().numel() != d || !beta || beta.value().numel() != d)) {
    throw DimensionError("layer_norm affine parameters must have width " + std::to_string(d));
  }
  check_finite<T>(x.value().data(), "layer_norm");
  Tensor<T> out(s);
  Tensor<T> xhat(s);
  std::vector<T> rstd(rows);
  const auto in = x.value().data();
  for (std::size_t r = 0; r < rows; ++r) {
    const T* row = in.data() + r * d;
    T mu = 0;
    for (std::size_t j = 0; j < d; ++j) mu += row[j];
    mu /= static_cast<T>(d);
    T var = 0;
    for (std::size_t j = 0; j < d; ++j) var += (row[j] - mu) * (row[j] - mu);
    var /= static_cast<T>(d);
    rstd[r] = T(1) / std::sqrt(var + eps);
    for (std::size_t j = 0; j < d; ++j) {
      const T xh = (row[j] - mu) * rstd[r];
      xhat[r * d + j] = xh;
      out[r * d + j] = affine ? xh * gamma.value()[j] + beta.value()[j] : xh;
    }
  }
  std::vector<Var<T>> parents{x};
  if (affine) {
    parents.push_back(gamma);
    parents.push_back(beta);
  }
  return make_result<T>(std::move(out), std::move(parents),
                        [rows, d, affine, xhat = std::move(xhat), rstd = std::move(rstd)](Node<T>& self) {
    auto g = self.grad.data();
    auto& px = *self.parents[0];
    const T* gam = affine ? self.parents[1]->value.data().data() : nullptr;
    if (affine) {
      auto& pg = *self.parents[1];
      auto& pb = *self.parents[2];
      if (pg.requires_grad) {
        auto gg = pg.grad_buffer().data();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < d; ++j) gg[j] += g[r * d + j] * xhat[r * d + j];
      }
      if (pb.requires_grad) {
        auto gb = pb.grad_buffer().data();
        for (std::size_t r = 0; r < rows; ++r)
          for (std::size_t j = 0; j < d; ++j) gb[j] += g[r * d + j];
      }
    }
    if (!px.requires_grad) return;
    auto gx = px.grad_buffer().data();
    std::vector<T> dxh(d);
    for (std::size_t r = 0; r < rows; ++r) {
      T m1 = 0, m2 = 0;
      for (std::size_t j = 0; j < d; ++j) {
        dxh[j] = g[r * d + j] * (gam ? gam[j] : T(1));
        m1 += dxh[j];
        m2 += dxh[j] * xhat[r * d + j];
      }
      m1 /= static_cast<T>(d);
      m2 /= static_cast<T>(d);
      for (std::size_t j = 0; j < d; ++j)
        gx[r * d + j] += rstd[r] * (dxh[j] - m1 - xhat[r * d + j] * m2);
    }
  });
}

template <typename T>
Var<T> sum(const Var<T>& a) {
  T total = 0;
  for (T v : a.value().data()) total += v;
  return make_result<T>(Tensor<T>::scalar(total), {a}, [](Node<T>& self) {
    const T g = self.grad[0];
    for (auto& v : self.parents[0]->grad_buffer().data()) v += g;
  });
}

template <typename T>
Var<T> mean(const Var<T>& a) {
  return scale(sum(a), T(1) / static_cast<T>(a.value().numel()));
}

template <typename T>
Var<T> mean_rows(const Var<T>& x) {
  if (x.shape().size() != 2) throw DimensionError("mean_rows expects [n,d], got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0), d = x.dim(1);
  Tensor<T> out(Shape{d});
  const auto in = x.value().data();
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t j = 0; j < d; ++j) out[j] += in[r * d + j];
  for (auto& v : out.data()) v /= static_cast<T>(n);
  return make_result<T>(std::move(out), {x}, [n, d](Node<T>& self) {
    auto g = self.grad.data();
    auto gd = self.parents[0]->grad_buffer().data();
    const T inv = T(1) / static_cast<T>(n);
    for (std::size_t r = 0; r < n; ++r)
      for (std::size_t j = 0; j < d; ++j) gd[r * d + j] += g[j] * inv;
  });
}

template <typename T>
Var<T> segment_max(const Var<T>& x, const std::vector<std::int64_t>& segment, std::size_t num_segments) {
  if (x.shape().size() != 2) throw DimensionError("segment_max expects [n,d], got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (segment.size() != n) throw DimensionError("segment_max: one segment id per row required");
  Tensor<T> out(Shape{num_segments, d});
  std::vector<std::int64_t> arg(num_segments * d, -1);
  const auto in = x.value().data();
  for (std::size_t r = 0; r < n; ++r) {
    const auto s = segment[r];
    if (s < 0) continue;
    if (static_cast<std::size_t>(s) >= num_segments) throw DimensionError("segment_max: segment id out of range");
    for (std::size_t j = 0; j < d; ++j) {
      const std::size_t o = static_cast<std::size_t>(s) * d + j;
      if (arg[o] < 0 || in[r * d + j] > out[o]) {
        out[o] = in[r * d + j];
        arg[o] = static_cast<std::int64_t>(r * d + j);
      }
    }
  }
  return make_result<T>(std::move(out), {x}, [arg = std::move(arg)](Node<T>& self) {
    auto g = self.grad.data();
    auto gd = self.parents[0]->grad_buffer().data();
    for (std::size_t o = 0; o < arg.size(); ++o) {
      if (arg[o] >= 0) gd[static_cast<std::size_t>(arg[o])] += g[o];
    }
  });
}

template <typename T>
Var<T> adaptive_avg_pool_1d(const Var<T>& x, std::size_t n_out) {
  if (x.shape().size() != 2) throw DimensionError("adaptive_avg_pool_1d expects [n,d], got " + shape_str(x.shape()));
  const std::size_t n = x.dim(0), d = x.dim(1);
  if (n_out < 1 || n_out > n) {
    throw PoolingError("adaptive_avg_pool_1d: n_out=" + std::to_string(n_out) + " must lie in [1, " +
                       std::to_string(n) + "]");
  }
  std::vector<std::pair<std::size_t, std::size_t>> win(n_out);
  for (std::size_t i = 0; i < n_out; ++i) {
    win[i].first = (i * n) / n_out;
    win[i].second = ((i + 1) * n + n_out - 1) / n_out;
  }
  Tensor<T> out(Shape{n_out, d});
  const auto in = x.value().data();
  for (std::size_t i = 0; i < n_out; ++i) {
    const auto [b, e] = win[i];
    for (std::size_t r = b; r < e; ++r)
      for (std::size_t j = 0; j < d; ++j) out[i * d + j] += in[r * d + j];
    const T inv = T(1) / static_cast<T>(e - b);
    for (std::size_t j = 0; j < d; ++j) out[i * d + j] *= inv;
  }
  return make_result<T>(std::move(out), {x}, [win = std::move(win), d](Node<T>& self) {
    auto g = self.grad.data();
    auto gd = self.parents[0]->grad_buffer().data();
    for (std::size_t i = 0; i < win.size(); ++i) {
      const auto [b, e] = win[i];
      const T inv = T(1) / static_cast<T>(e - b);
      for (std::size_t r = b; r < e; ++r)
        for (std::size_t j = 0; j < d; ++j) gd[r * d + j] += g[i * d + j] * inv;
    }
  });
}

template <typename T>
Var<T> gather_rows(const Var<T>& table, const std::vector<std::size_t>& rows) {
  if (table.shape().size() != 2) throw DimensionError("gather_rows expects a [n,d] table");
  const std::size_t n = table.dim(0), d = table.dim(1);
  if (rows.empty()) throw DimensionError("gather_rows: empty row list");
  std::vector<std::int64_t> index(rows.size() * d);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] >= n) throw DimensionError("gather_rows: row " + std::to_string(rows[i]) + " out of range");
    for (std::size_t j = 0; j < d; ++j) index[i * d + j] = static_cast<std::int64_t>(rows[i] * d + j);
  }
  return gather(table, Shape{rows.size(), d}, index);
}

template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts) {
  if (parts.empty()) throw DimensionError("concat_rows: nothing to concatenate");
  Shape tail(parts[0].shape().begin() + 1, parts[0].shape().end());
  std::size_t rows = 0;
  for (const auto& p : parts) {
    Shape t(p.shape().begin() + 1, p.shape().end());
    if (p.shape().empty() || t != tail) {
      throw DimensionError("concat_rows: trailing shape mismatch " + shape_str(p.shape()) + " vs " +
                           shape_str(parts[0].shape()));
    }
    rows += p.shape()[0];
  }
  Shape out_shape = tail;
  out_shape.insert(out_shape.begin(), rows);
  Tensor<T> out(out_shape);
  std::vector<std::size_t> offsets;
  std::size_t off = 0;
  for (const auto& p : parts) {
    offsets.push_back(off);
    std::copy(p.value().data().begin(), p.value().data().end(), out.data().begin() + off);
    off += p.value().numel();
  }
  return make_result<T>(std::move(out), parts, [offsets = std::move(offsets)](Node<T>& self) {
    auto g = self.grad.data();
    for (std::size_t i = 0; i < self.parents.size(); ++i) {
      auto& p = *self.parents[i];
      if (p.requires_grad) p.accumulate(g.subspan(offsets[i], p.value.numel()));
    }
  });
}

template <typename T>
Var<T> slice_rows(const Var<T>& x, std::size_t begin, std::size_t end) {
  const Shape& s = x.shape();
  if (s.empty() || begin >= end || end > s[0]) {
    throw DimensionError("slice_rows: invalid range [" + std::to_string(begin) + "," + std::to_string(end) +
                         ") for " + shape_str(s));
  }
  const std::size_t row = x.value().numel() / s[0];
  Shape out_shape = s;
  out_shape[0] = end - begin;
  std::vector<T> data(x.value().data().begin() + begin * row, x.value().data().begin() + end * row);
  Tensor<T> out(out_shape, std::move(data));
  const std::size_t offset = begin * row;
  return make_result<T>(std::move(out), {x}, [offset](Node<T>& self) {
    auto g = self.grad.data();
    auto gd = self.parents[0]->grad_buffer().data();
    for (std::size_t i = 0; i < g.size(); ++i) gd[offset + i] += g[i];
  });
}

template <typename T>
Var<T> cross_entropy(const Var<T>& logits, const std::vector<std::int64_t>& labels, double normalizer) {
  if (logits.shape().size() != 2) throw DimensionError("cross_entropy expects [b,C] logits");
  const std::size_t b = logits.dim(0), c = logits.dim(1);
  if (labels.size() != b) throw DimensionError("cross_entropy: one label per row required");
  std::size_t counted = 0;
  for (auto l : labels) {
    if (l == -1) continue;
    if (l < 0 || static_cast<std::size_t>(l) >= c) {
      throw LabelError("label " + std::to_string(l) + " outside [0," + std::to_string(c) + ")");
    }
    ++counted;
  }
  const T norm = normalizer > 0 ? static_cast<T>(normalizer) : static_cast<T>(std::max<std::size_t>(counted, 1));
  auto lsm = log_softmax(logits);
  T total = 0;
  for (std::size_t r = 0; r < b; ++r) {
    if (labels[r] >= 0) total -= lsm.value()[r * c + static_cast<std::size_t>(labels[r])];
  }
  return make_result<T>(Tensor<T>::scalar(total / norm), {lsm}, [labels, c, norm](Node<T>& self) {
    const T g = self.grad[0] / norm;
    auto gd = self.parents[0]->grad_buffer().data();
    for (std::size_t r = 0; r < labels.size(); ++r) {
      if (labels[r] >= 0) gd[r * c + static_cast<std::size_t>(labels[r])] -= g;
    }
  });
}

#define HOLO_INSTANTIATE_OPS(T)                                                                 \
  template Var<T> matmul(const Var<T>&, const Var<T>&);                                         \
  template Var<T> transpose(const Var<T>&);                                                     \
  template Var<T> permute(const Var<T>&, const std::vector<std::size_t>&);                      \
  template Var<T> reshape(const Var<T>&, Shape);                                                \
  template Var<T> add(const Var<T>&, const Var<T>&);                                            \
  template Var<T> sub(const Var<T>&, const Var<T>&);                                            \
  template Var<T> mul(const Var<T>&, const Var<T>&);                                            \
  template Var<T> scale(const Var<T>&, T);                                                      \
  template Var<T> square(const Var<T>&);                                                        \
  template Var<T> relu(const Var<T>&);                                                          \
  template Var<T> gelu(const Var<T>&);                                                          \
  template Var<T> softmax(const Var<T>&, std::size_t);                                          \
  template Var<T> log_softmax(const Var<T>&);                                                   \
  template Var<T> layer_norm(const Var<T>&, const Var<T>&, const Var<T>&, T);                   \
  template Var<T> sum(const Var<T>&);                                                           \
  template Var<T> mean(const Var<T>&);                                                          \
  template Var<T> mean_rows(const Var<T>&);                                                     \
  template Var<T> segment_max(const Var<T>&, const std::vector<std::int64_t>&, std::size_t);    \
  template Var<T> adaptive_avg_pool_1d(const Var<T>&, std::size_t);                             \
  template Var<T> gather_rows(const Var<T>&, const std::vector<std::size_t>&);                  \
  template Var<T> gather(const Var<T>&, Shape, const std::vector<std::int64_t>&);               \
  template Var<T> concat_rows(const std::vector<Var<T>>&);                                      \
  template Var<T> slice_rows(const Var<T>&, std::size_t, std::size_t);                          \
  template Var<T> cross_entropy(const Var<T>&, const std::vector<std::int64_t>&, double);

HOLO_INSTANTIATE_OPS(float)
HOLO_INSTANTIATE_OPS(double)

}  // namespace holo::ops
