#pragma once

#include <cmath>
#include <vector>

// Linear ridge probe in dual form, used as an oracle for how much class
// information a raw feature vector carries.
namespace holo::testing {

inline std::vector<double> solve_spd(std::vector<double> A, std::vector<double> B, std::size_t n, std::size_t k) {
  // Cholesky A = L L^T, then two triangular solves for each of the k columns of B.
  for (std::size_t j = 0; j < n; ++j) {
    double d = A[j * n + j];
    for (std::size_t p = 0; p < j; ++p) d -= A[j * n + p] * A[j * n + p];
    d = std::sqrt(d);
    A[j * n + j] = d;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = A[i * n + j];
      for (std::size_t p = 0; p < j; ++p) s -= A[i * n + p] * A[j * n + p];
      A[i * n + j] = s / d;
    }
  }
  for (std::size_t c = 0; c < k; ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double s = B[i * k + c];
      for (std::size_t p = 0; p < i; ++p) s -= A[i * n + p] * B[p * k + c];
      B[i * k + c] = s / A[i * n + i];
    }
    for (std::size_t i = n; i-- > 0;) {
      double s = B[i * k + c];
      for (std::size_t p = i + 1; p < n; ++p) s -= A[p * n + i] * B[p * k + c];
      B[i * k + c] = s / A[i * n + i];
    }
  }
  return B;
}

/// Trains on (train_x, train_y), returns accuracy on (test_x, test_y).
/// Features are standardized with training statistics.
inline double ridge_probe_accuracy(std::vector<std::vector<double>> train_x, const std::vector<std::size_t>& train_y,
                                   std::vector<std::vector<double>> test_x, const std::vector<std::size_t>& test_y,
                                   std::size_t classes, double lambda = 1.0) {
  const std::size_t n = train_x.size(), m = test_x.size(), p = train_x[0].size();
  for (std::size_t j = 0; j < p; ++j) {
    double mu = 0, var = 0;
    for (auto& x : train_x) mu += x[j];
    mu /= double(n);
    for (auto& x : train_x) var += (x[j] - mu) * (x[j] - mu);
    const double sd = std::sqrt(var / double(n)) + 1e-8;
    for (auto& x : train_x) x[j] = (x[j] - mu) / sd;
    for (auto& x : test_x) x[j] = (x[j] - mu) / sd;
  }
  auto dot = [p](const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0;
    for (std::size_t j = 0; j < p; ++j) s += a[j] * b[j];
    return s / double(p);
  };
  std::vector<double> K(n * n), Y(n * classes, -1.0 / double(classes));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) K[i * n + j] = K[j * n + i] = dot(train_x[i], train_x[j]);
    K[i * n + i] += lambda;
    Y[i * classes + train_y[i]] += 1.0;
  }
  auto alpha = solve_spd(K, Y, n, classes);
  std::size_t correct = 0;
  for (std::size_t t = 0; t < m; ++t) {
    std::vector<double> score(classes, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const double k = dot(test_x[t], train_x[i]);
      for (std::size_t c = 0; c < classes; ++c) score[c] += k * alpha[i * classes + c];
    }
    std::size_t best = 0;
    for (std::size_t c = 1; c < classes; ++c)
      if (score[c] > score[best]) best = c;
    correct += best == test_y[t];
  }
  return double(correct) / double(m);
}

}  // namespace holo::testing
