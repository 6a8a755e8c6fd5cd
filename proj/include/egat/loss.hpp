#pragma once

#include "egat/autodiff.hpp"

#include <span>

namespace egat {

struct LossConfig {
  double lambda = 1.0;
  double eps = 1e-6;
  double w_max = 100.0;

  // Throws InvalidArgument unless lambda > 0, eps > 0 and w_max >= 1.
  void validate() const;
};

// omega_c = min(lambda (1 - r_c) / (r_c + eps), w_max) with r_c the fraction
// of positive rows in column c over all given label blocks. Returns 1 x C.
Matrix class_weights(std::span<const Matrix* const> label_blocks, const LossConfig& cfg);
Matrix class_weights(const Matrix& labels, const LossConfig& cfg);

// -(1/N) sum_i sum_c w_c [y log s(z) + (1 - y) log(1 - s(z))], in the stable
// logit form. N is the number of rows.
Var weighted_bce(const Var& logits, const Matrix& labels, const Matrix& weights);

// The same loss evaluated literally in probability space with s(z) clamped
// to [1e-12, 1 - 1e-12].
double weighted_bce_literal(const Matrix& logits, const Matrix& labels, const Matrix& weights);

}  // namespace egat
