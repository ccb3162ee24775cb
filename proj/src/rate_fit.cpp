#include "amenwalk/rate_fit.hpp"

#include <cmath>

#include "amenwalk/error.hpp"

namespace amenwalk {

LinearFit least_squares(const std::vector<std::vector<double>>& columns, const std::vector<double>& y) {
  const std::size_t m = y.size();
  const std::size_t k = columns.size() + 1;
  if (m < k) throw InvalidInput("least squares: not enough points");
  for (const auto& c : columns) {
    if (c.size() != m) throw InvalidInput("least squares: column length mismatch");
  }
  auto x = [&](std::size_t i, std::size_t j) { return j == 0 ? 1.0 : columns[j - 1][i]; };

  // Center the columns to keep the normal equations well conditioned.
  std::vector<double> mean(k, 0.0);
  double y_mean = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 1; j < k; ++j) mean[j] += x(i, j);
    y_mean += y[i];
  }
  for (std::size_t j = 1; j < k; ++j) mean[j] /= static_cast<double>(m);
  y_mean /= static_cast<double>(m);

  const std::size_t p = k - 1;
  std::vector<double> a(p * p, 0.0), b(p, 0.0);
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t r = 0; r < p; ++r) {
      const double xr = x(i, r + 1) - mean[r + 1];
      b[r] += xr * (y[i] - y_mean);
      for (std::size_t c = 0; c < p; ++c) a[r * p + c] += xr * (x(i, c + 1) - mean[c + 1]);
    }
  }
  // Gaussian elimination with partial pivoting.
  std::vector<double> beta(p, 0.0);
  for (std::size_t col = 0; col < p; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < p; ++r) {
      if (std::abs(a[r * p + col]) > std::abs(a[pivot * p + col])) pivot = r;
    }
    if (std::abs(a[pivot * p + col]) < 1e-300) throw InvalidInput("least squares: singular design");
    if (pivot != col) {
      for (std::size_t c = 0; c < p; ++c) std::swap(a[col * p + c], a[pivot * p + c]);
      std::swap(b[col], b[pivot]);
    }
    for (std::size_t r = col + 1; r < p; ++r) {
      const double f = a[r * p + col] / a[col * p + col];
      for (std::size_t c = col; c < p; ++c) a[r * p + c] -= f * a[col * p + c];
      b[r] -= f * b[col];
    }
  }
  for (std::size_t r = p; r-- > 0;) {
    double s = b[r];
    for (std::size_t c = r + 1; c < p; ++c) s -= a[r * p + c] * beta[c];
    beta[r] = s / a[r * p + r];
  }

  LinearFit fit;
  fit.coefficients = beta;
  fit.intercept = y_mean;
  for (std::size_t j = 0; j < p; ++j) fit.intercept -= beta[j] * mean[j + 1];
  double ss = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    double pred = fit.intercept;
    for (std::size_t j = 0; j < p; ++j) pred += beta[j] * x(i, j + 1);
    ss += (y[i] - pred) * (y[i] - pred);
  }
  fit.residual = std::sqrt(ss / static_cast<double>(m));
  return fit;
}

DecayFit fit_decay(const std::vector<double>& n, const std::vector<double>& log_p) {
  std::vector<double> log_n;
  log_n.reserve(n.size());
  for (double v : n) log_n.push_back(std::log(v));
  const LinearFit fit = least_squares({n, log_n}, log_p);
  return {std::exp(fit.coefficients[0]), -fit.coefficients[1], fit.residual};
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  return least_squares({x}, y).coefficients[0];
}

}  // namespace amenwalk
