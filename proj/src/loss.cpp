#include "egat/loss.hpp"

#include "egat/error.hpp"

#include <algorithm>
#include <cmath>

namespace egat {

void LossConfig::validate() const {
  if (!(lambda > 0.0)) fail(ErrorCode::InvalidArgument, "lambda must be positive");
  if (!(eps > 0.0)) fail(ErrorCode::InvalidArgument, "eps must be positive");
  if (!(w_max >= 1.0)) fail(ErrorCode::InvalidArgument, "w_max must be >= 1");
}

Matrix class_weights(std::span<const Matrix* const> label_blocks, const LossConfig& cfg) {
  cfg.validate();
  if (label_blocks.empty()) fail(ErrorCode::InvalidArgument, "class weights need at least one residue");
  const auto classes = label_blocks.front()->cols();
  Matrix positives = Matrix::Zero(1, classes);
  double rows = 0.0;
  for (const Matrix* b : label_blocks) {
    if (b->cols() != classes) fail(ErrorCode::ShapeMismatch, "label blocks differ in class count");
    positives += b->colwise().sum();
    rows += static_cast<double>(b->rows());
  }
  if (rows == 0.0) fail(ErrorCode::InvalidArgument, "class weights need at least one residue");
  Matrix w(1, classes);
  for (Eigen::Index c = 0; c < classes; ++c) {
    const double r = positives(0, c) / rows;
    w(0, c) = std::min(cfg.lambda * (1.0 - r) / (r + cfg.eps), cfg.w_max);
  }
  return w;
}

Matrix class_weights(const Matrix& labels, const LossConfig& cfg) {
  const Matrix* blocks[] = {&labels};
  return class_weights(blocks, cfg);
}

Var weighted_bce(const Var& logits, const Matrix& labels, const Matrix& weights) {
  if (logits.value().rows() != labels.rows() || logits.value().cols() != labels.cols())
    fail(ErrorCode::ShapeMismatch, "logits and labels differ in shape");
  return bce_with_logits(logits, labels, weights, static_cast<double>(labels.rows()));
}

double weighted_bce_literal(const Matrix& logits, const Matrix& labels, const Matrix& weights) {
  if (logits.rows() != labels.rows() || logits.cols() != labels.cols())
    fail(ErrorCode::ShapeMismatch, "logits and labels differ in shape");
  double total = 0.0;
  for (Eigen::Index i = 0; i < logits.rows(); ++i)
    for (Eigen::Index c = 0; c < logits.cols(); ++c) {
      // 1 - s is formed as e^-z / (1 + e^-z) so it keeps full relative precision.
      const double ez = std::exp(-logits(i, c));
      const double s = std::clamp(1.0 / (1.0 + ez), 1e-12, 1.0 - 1e-12);
      const double one_minus_s = std::clamp(ez / (1.0 + ez), 1e-12, 1.0 - 1e-12);
      const double y = labels(i, c);
      total += weights(0, c) * (y * std::log(s) + (1.0 - y) * std::log(one_minus_s));
    }
  return -total / static_cast<double>(logits.rows());
}

}  // namespace egat
