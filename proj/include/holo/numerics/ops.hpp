#pragma once

#include <cstdint>
#include <vector>

#include "holo/numerics/autograd.hpp"

// Differentiable tensor operations. Every op is pure: it reads its inputs and
// returns a fresh Var whose backward closure accumulates into the inputs.
// Reductions run sequentially in row-major order so results are bitwise
// reproducible.
namespace holo::ops {

/// [.., m, k] x [.., k, n] -> [.., m, n]. Batch extents must match, or one
/// side may be rank 2 and is broadcast over the other's batch.
template <typename T>
Var<T> matmul(const Var<T>& a, const Var<T>& b);

/// Swap the last two axes.
template <typename T>
Var<T> transpose(const Var<T>& a);

template <typename T>
Var<T> permute(const Var<T>& a, const std::vector<std::size_t>& axes);

template <typename T>
Var<T> reshape(const Var<T>& a, Shape shape);

// Elementwise binary ops. `b` must have the shape of `a` or of a suffix of it
// (bias-style broadcast), or be a scalar.
template <typename T>
Var<T> add(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> sub(const Var<T>& a, const Var<T>& b);
template <typename T>
Var<T> mul(const Var<T>& a, const Var<T>& b);

template <typename T>
Var<T> scale(const Var<T>& a, T s);

template <typename T>
Var<T> square(const Var<T>& a);

template <typename T>
Var<T> relu(const Var<T>& a);

/// tanh-approximated GELU; smooth everywhere, which keeps finite-difference checks clean.
template <typename T>
Var<T> gelu(const Var<T>& a);

/// Stable softmax (max-subtracted) along `axis`. Throws NumericError on NaN input.
template <typename T>
Var<T> softmax(const Var<T>& x, std::size_t axis);

template <typename T>
Var<T> log_softmax(const Var<T>& x);

/// Normalises over the last axis. gamma/beta may be empty Vars (no affine).
template <typename T>
Var<T> layer_norm(const Var<T>& x, const Var<T>& gamma, const Var<T>& beta, T eps = T(1e-5));

template <typename T>
Var<T> sum(const Var<T>& a);
template <typename T>
Var<T> mean(const Var<T>& a);

/// [n, d] -> [d]
template <typename T>
Var<T> mean_rows(const Var<T>& x);

/// [n, d] -> [num_segments, d]; rows with segment id -1 are ignored and empty
/// segments produce zeros. Gradient flows to the (first) argmax row.
template <typename T>
Var<T> segment_max(const Var<T>& x, const std::vector<std::int64_t>& segment, std::size_t num_segments);

/// Output row i averages input rows [floor(i*n/n_out), ceil((i+1)*n/n_out)).
template <typename T>
Var<T> adaptive_avg_pool_1d(const Var<T>& x, std::size_t n_out);

/// Row lookup: [n, d] gathered at `rows` -> [rows.size(), d].
template <typename T>
Var<T> gather_rows(const Var<T>& table, const std::vector<std::size_t>& rows);

/// General gather: out.flat[i] = x.flat[index[i]] or 0 where index[i] < 0.
template <typename T>
Var<T> gather(const Var<T>& x, Shape out_shape, const std::vector<std::int64_t>& index);

/// Concatenate along axis 0; all trailing extents must match.
template <typename T>
Var<T> concat_rows(const std::vector<Var<T>>& parts);

template <typename T>
Var<T> slice_rows(const Var<T>& x, std::size_t begin, std::size_t end);

/// sum over rows with label >= 0 of -log softmax(logits)[label], divided by
/// `normalizer` (defaults to the number of counted rows). Label -1 is ignored.
template <typename T>
Var<T> cross_entropy(const Var<T>& logits, const std::vector<std::int64_t>& labels,
                     double normalizer = 0.0);

}  // namespace holo::ops
