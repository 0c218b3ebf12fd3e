#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "propvec/property_config.hpp"

namespace propvec::sgns {

// Logistic function, branched on sign so neither exp overflows.
template <typename T>
inline T sigmoid(T x) {
  if (x >= 0) return T(1) / (T(1) + std::exp(-x));
  T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
inline T log_sigmoid(T x) {
  if (x >= 0) return -std::log1p(std::exp(-x));
  return x - std::log1p(std::exp(x));
}

template <typename T>
struct MatrixView {
  T* data = nullptr;
  size_t rows = 0;
  size_t cols = 0;

  std::span<T> row(size_t i) const { return {data + i * cols, cols}; }
};

template <typename T>
inline T dot(std::span<const T> a, std::span<const T> b) {
  T s = 0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// out = sum (or mean) of the given input rows; empty id set gives zeros.
template <typename T>
inline void compose(MatrixView<const T> input, std::span<const uint32_t> ids,
                    Composition comp, std::span<T> out) {
  std::fill(out.begin(), out.end(), T(0));
  for (uint32_t id : ids) {
    if (id >= input.rows) throw std::out_of_range("invalid property id");
    auto r = input.row(id);
    for (size_t j = 0; j < out.size(); ++j) out[j] += r[j];
  }
  if (comp == Composition::Mean && !ids.empty()) {
    T inv = T(1) / T(ids.size());
    for (auto& v : out) v *= inv;
  }
}

template <typename T>
inline std::vector<T> compose(MatrixView<const T> input,
                              std::span<const uint32_t> ids, Composition comp,
                              size_t dim) {
  std::vector<T> out(dim);
  compose(input, ids, comp, std::span<T>(out));
  return out;
}

// Negated SGNS objective for one positive score and its negative scores:
// -[log sigma(s_pos) + sum log sigma(-s_neg_i)]. Always >= 0.
template <typename T>
inline T pair_loss(T score_pos, std::span<const T> scores_neg) {
  T loss = -log_sigmoid(score_pos);
  for (T s : scores_neg) loss -= log_sigmoid(-s);
  return loss;
}

template <typename T>
struct TrainScratch {
  std::vector<T> composed;
  std::vector<T> grad;
  std::vector<T> neg_scores;
};

// One SGD step on (focus properties, context, negatives). All gradients are
// evaluated on pre-update parameter values; the returned loss is pre-update
// as well. lr = 0 leaves the model unchanged.
template <typename T>
inline T train_pair(MatrixView<T> input, MatrixView<T> output,
                    std::span<const uint32_t> props, uint32_t context_id,
                    std::span<const uint32_t> negative_ids, T lr,
                    Composition comp, TrainScratch<T>& ws) {
  if (lr < 0) throw std::invalid_argument("negative learning rate");
  if (context_id >= output.rows) throw std::out_of_range("invalid context id");
  size_t dim = output.cols;

  ws.composed.resize(dim);
  compose(MatrixView<const T>{input.data, input.rows, input.cols}, props, comp,
          std::span<T>(ws.composed));

  auto check = [](T s) {
    if (!std::isfinite(s))
      throw std::runtime_error("non-finite score: model diverged");
    return s;
  };

  auto u_ctx = output.row(context_id);
  T s_pos = check(dot(std::span<const T>(ws.composed), std::span<const T>(u_ctx)));
  ws.neg_scores.resize(negative_ids.size());
  for (size_t i = 0; i < negative_ids.size(); ++i) {
    if (negative_ids[i] >= output.rows)
      throw std::out_of_range("invalid negative id");
    ws.neg_scores[i] = check(dot(std::span<const T>(ws.composed),
                                 std::span<const T>(output.row(negative_ids[i]))));
  }

  T loss = pair_loss(s_pos, std::span<const T>(ws.neg_scores));

  // d(loss)/d(composed), read off the pre-update output rows.
  T g_pos = sigmoid(s_pos) - T(1);
  ws.grad.assign(dim, T(0));
  for (size_t j = 0; j < dim; ++j) ws.grad[j] += g_pos * u_ctx[j];
  for (size_t i = 0; i < negative_ids.size(); ++i) {
    T g = sigmoid(ws.neg_scores[i]);
    auto u_neg = output.row(negative_ids[i]);
    for (size_t j = 0; j < dim; ++j) ws.grad[j] += g * u_neg[j];
    ws.neg_scores[i] = g;  // reuse as gradient for the update below
  }

  T step_pos = lr * g_pos;
  for (size_t j = 0; j < dim; ++j) u_ctx[j] -= step_pos * ws.composed[j];
  for (size_t i = 0; i < negative_ids.size(); ++i) {
    auto u_neg = output.row(negative_ids[i]);
    T step = lr * ws.neg_scores[i];
    for (size_t j = 0; j < dim; ++j) u_neg[j] -= step * ws.composed[j];
  }

  T gscale = lr;
  if (comp == Composition::Mean && !props.empty()) gscale /= T(props.size());
  for (uint32_t p : props) {
    auto v = input.row(p);
    for (size_t j = 0; j < dim; ++j) v[j] -= gscale * ws.grad[j];
  }
  return loss;
}

}  // namespace propvec::sgns
