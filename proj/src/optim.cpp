#include "egat/optim.hpp"

#include "egat/error.hpp"

#include <cmath>

namespace egat {

void adam_step(std::vector<Var>& params, AdamState& state, double lr) {
  std::vector<Matrix> grads;
  grads.reserve(params.size());
  for (const auto& p : params) grads.push_back(p.grad());
  adam_step(params, grads, state, lr);
}

void adam_step(std::vector<Var>& params, const std::vector<Matrix>& grads, AdamState& state, double lr) {
  if (grads.size() != params.size()) fail(ErrorCode::ShapeMismatch, "adam: gradient count differs");
  if (state.m.empty()) {
    for (const auto& p : params) {
      state.m.push_back(Matrix::Zero(p.value().rows(), p.value().cols()));
      state.v.push_back(Matrix::Zero(p.value().rows(), p.value().cols()));
    }
  }
  if (state.m.size() != params.size()) fail(ErrorCode::ShapeMismatch, "adam: parameter count changed");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const Matrix& p = params[i].value();
    if (grads[i].rows() != p.rows() || grads[i].cols() != p.cols() || state.m[i].rows() != p.rows() ||
        state.m[i].cols() != p.cols())
      fail(ErrorCode::ShapeMismatch, "adam: shape mismatch for parameter " + std::to_string(i));
  }

  ++state.t;
  const AdamConfig& c = state.config;
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(state.t));
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& m = state.m[i];
    Matrix& v = state.v[i];
    const Matrix& g = grads[i];
    Matrix& p = params[i].mutable_value();
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      const double gk = g.data()[k];
      m.data()[k] = c.beta1 * m.data()[k] + (1.0 - c.beta1) * gk;
      v.data()[k] = c.beta2 * v.data()[k] + (1.0 - c.beta2) * gk * gk;
      const double mhat = m.data()[k] / bc1;
      const double vhat = v.data()[k] / bc2;
      p.data()[k] -= lr * mhat / (std::sqrt(vhat) + c.eps);
    }
  }
}

}  // namespace egat
