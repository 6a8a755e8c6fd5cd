#include "egat/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace egat {

GradCheckResult finite_diff_check(const std::function<Var()>& f, std::vector<Var> params,
                                  const GradCheckOptions& opts) {
  for (auto& p : params) p.zero_grad();
  std::vector<Matrix> analytic;
  {
    Tape tape;
    const Var loss = f();
    tape.backward(loss);
    for (const auto& p : params) analytic.push_back(p.grad());
  }
  for (auto& p : params) p.zero_grad();

  const auto eval = [&] {
    NoGradGuard guard;
    return f().item();
  };

  GradCheckResult r;
  const auto compare = [&](std::size_t param, std::size_t entry, double a, double n) {
    const double abs_err = std::abs(a - n);
    const double denom = std::max({std::abs(a), std::abs(n), opts.floor});
    r.max_absolute_error = std::max(r.max_absolute_error, abs_err);
    if (r.checks == 0 || abs_err / denom > r.max_relative_error) {
      r.max_relative_error = abs_err / denom;
      r.worst_parameter = param;
      r.worst_entry = entry;
      r.worst_analytic = a;
      r.worst_numeric = n;
    }
    ++r.checks;
  };

  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Matrix& value = params[i].mutable_value();
    const auto size = value.size();
    if (static_cast<std::size_t>(size) <= opts.max_coordinates) {
      for (Eigen::Index k = 0; k < size; ++k) {
        const double saved = value.data()[k];
        value.data()[k] = saved + opts.h;
        const double up = eval();
        value.data()[k] = saved - opts.h;
        const double down = eval();
        value.data()[k] = saved;
        compare(i, static_cast<std::size_t>(k), analytic[i].data()[k], (up - down) / (2.0 * opts.h));
      }
    } else {
      for (std::size_t probe = 0; probe < opts.probes; ++probe) {
        Matrix dir(value.rows(), value.cols());
        for (Eigen::Index k = 0; k < size; ++k) dir.data()[k] = normal(rng);
        dir /= dir.norm();
        const Matrix saved = value;
        value = saved + opts.h * dir;
        const double up = eval();
        value = saved - opts.h * dir;
        const double down = eval();
        value = saved;
        compare(i, probe, analytic[i].cwiseProduct(dir).sum(), (up - down) / (2.0 * opts.h));
      }
    }
  }
  return r;
}

}  // namespace egat
