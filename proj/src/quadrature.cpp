#include "isirate/quadrature.hpp"

#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

#include <Eigen/Eigenvalues>

namespace isirate {

namespace {

constexpr double kPi = 3.14159265358979323846;

GaussRule build_hermite(int n) {
  if (n < 1 || n > 600) throw std::invalid_argument("Gauss-Hermite order must be in [1, 600]");
  // Golub-Welsch for the initial nodes, then Newton on the orthonormal
  // recurrence for full relative accuracy of nodes and weights.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(std::max(n - 1, 0));
  for (int i = 1; i < n; ++i) sub[i - 1] = std::sqrt(0.5 * i);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
  es.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const double pim4 = 0.7511255444649425;  // pi^(-1/4)
  GaussRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  for (int i = 0; i < n; ++i) {
    double z = es.eigenvalues()[i];
    double pp = 1.0;
    for (int it = 0; it < 8; ++it) {
      double p1 = pim4, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt(double(j - 1) / j) * p3;
      }
      pp = std::sqrt(2.0 * n) * p2;
      double dz = p1 / pp;
      z -= dz;
      if (std::fabs(dz) <= 1e-16 * std::max(1.0, std::fabs(z))) break;
    }
    r.nodes[i] = z;
    r.weights[i] = 2.0 / (pp * pp) / std::sqrt(kPi);
  }
  // enforce exact symmetry
  for (int i = 0; i < n / 2; ++i) {
    double z = 0.5 * (r.nodes[n - 1 - i] - r.nodes[i]);
    double w = 0.5 * (r.weights[i] + r.weights[n - 1 - i]);
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    r.weights[i] = r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

GaussRule build_legendre(int n) {
  if (n < 1 || n > 1000) throw std::invalid_argument("Gauss-Legendre order must be in [1, 1000]");
  GaussRule r;
  r.nodes.assign(n, 0.0);
  r.weights.assign(n, 0.0);
  int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(kPi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= n; ++j) {
        double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      double z1 = z;
      z = z1 - p1 / pp;
      if (std::fabs(z - z1) < 1e-16) break;
    }
    r.nodes[i] = -z;
    r.nodes[n - 1 - i] = z;
    double w = 2.0 / ((1.0 - z * z) * pp * pp);
    r.weights[i] = w;
    r.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) r.nodes[n / 2] = 0.0;
  return r;
}

template <class Build>
const GaussRule& cached(std::map<int, std::unique_ptr<GaussRule>>& cache, std::mutex& mu, int n,
                        Build build) {
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(n);
  if (it != cache.end()) return *it->second;
  auto rule = std::make_unique<GaussRule>(build(n));
  const GaussRule& ref = *rule;
  cache.emplace(n, std::move(rule));
  return ref;
}

}  // namespace

const GaussRule& gauss_hermite(int n) {
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, n, build_hermite);
}

const GaussRule& gauss_legendre(int n) {
  static std::map<int, std::unique_ptr<GaussRule>> cache;
  static std::mutex mu;
  return cached(cache, mu, n, build_legendre);
}

void append_panel(GaussRule& rule, double a, double b, int n) {
  const GaussRule& gl = gauss_legendre(n);
  double h = 0.5 * (b - a), c = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    rule.nodes.push_back(c + h * gl.nodes[i]);
    rule.weights.push_back(h * gl.weights[i]);
  }
}

void append_gaussian_panel(GaussRule& rule, double a, double b, int n) {
  const GaussRule& gl = gauss_legendre(n);
  double h = 0.5 * (b - a), c = 0.5 * (a + b);
  for (int i = 0; i < n; ++i) {
    double t = c + h * gl.nodes[i];
    rule.nodes.push_back(t);
    rule.weights.push_back(h * gl.weights[i] * std::exp(-t * t) / std::sqrt(kPi));
  }
}

}  // namespace isirate
