#pragma once

#include <vector>

namespace amenwalk {

struct LinearFit {
  double intercept = 0.0;
  std::vector<double> coefficients;
  // Root-mean-square residual.
  double residual = 0.0;
};

// Ordinary least squares of y on [1, columns...].  Throws InvalidInput when
// there are fewer points than parameters or the design is singular.
LinearFit least_squares(const std::vector<std::vector<double>>& columns, const std::vector<double>& y);

struct DecayFit {
  double rate = 0.0;      // exp(slope in n)
  double exponent = 0.0;  // alpha in c + n log rho - alpha log n
  double residual = 0.0;
};

// Fits log p_n = c + n log rho - alpha log n.
DecayFit fit_decay(const std::vector<double>& n, const std::vector<double>& log_p);

// Slope of y against x.
double fit_slope(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace amenwalk
