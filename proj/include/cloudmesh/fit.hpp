#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "cloudmesh/types.hpp"

namespace cloudmesh {

struct PolyFit {
  std::vector<double> coeffs;  // c0 + c1*x + c2*x^2 ...
  double r_squared = 0.0;

  double eval(double x) const {
    double acc = 0.0, p = 1.0;
    for (double c : coeffs) {
      acc += c * p;
      p *= x;
    }
    return acc;
  }
};

// Least-squares polynomial fit by solving the normal equations with
// Gaussian elimination; fine for the tiny degrees used here.
inline PolyFit polyfit(const std::vector<double>& xs, const std::vector<double>& ys,
                       int degree) {
  if (xs.size() != ys.size() || xs.size() < static_cast<std::size_t>(degree) + 1)
    throw Error(Errc::InvalidSpec, "not enough points for fit");
  const int n = degree + 1;
  std::vector<std::vector<double>> a(n, std::vector<double>(n + 1, 0.0));
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double powi = 1.0;
    std::vector<double> pows(2 * n - 1);
    for (int i = 0; i < 2 * n - 1; ++i) {
      pows[i] = powi;
      powi *= xs[k];
    }
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) a[i][j] += pows[i + j];
      a[i][n] += pows[i] * ys[k];
    }
  }
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    std::swap(a[col], a[pivot]);
    if (std::abs(a[col][col]) < 1e-12)
      throw Error(Errc::InvalidSpec, "singular fit system");
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      double f = a[r][col] / a[col][col];
      for (int c = col; c <= n; ++c) a[r][c] -= f * a[col][c];
    }
  }
  PolyFit fit;
  fit.coeffs.resize(n);
  for (int i = 0; i < n; ++i) fit.coeffs[i] = a[i][n] / a[i][i];

  double mean = 0.0;
  for (double y : ys) mean += y;
  mean /= static_cast<double>(ys.size());
  double ss_res = 0.0, ss_tot = 0.0;
  for (std::size_t k = 0; k < xs.size(); ++k) {
    double e = ys[k] - fit.eval(xs[k]);
    ss_res += e * e;
    double d = ys[k] - mean;
    ss_tot += d * d;
  }
  fit.r_squared = ss_tot == 0.0 ? 1.0 : 1.0 - ss_res / ss_tot;
  return fit;
}

}  // namespace cloudmesh
