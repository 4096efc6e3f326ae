// Independent brute-force oracles used to freeze expected values. These stay
// deliberately naive and share no code with the implementation paths they
// check.
#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mmgram/common.hpp"

namespace oracle {

// Central finite differences of a scalar function at x.
inline std::vector<double> finite_diff(
    const std::function<double(const std::vector<double>&)>& f,
    std::vector<double> x, double h = 1e-5) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    double orig = x[i];
    x[i] = orig + h;
    double fp = f(x);
    x[i] = orig - h;
    double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

inline double max_rel_error(const std::vector<double>& a,
                            const std::vector<double>& b,
                            double floor = 1e-8) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double denom = std::max({std::fabs(a[i]), std::fabs(b[i]), floor});
    worst = std::max(worst, std::fabs(a[i] - b[i]) / denom);
  }
  return worst;
}

// Spearman via explicit rank counting: rank(i) = 1 + #smaller + (#ties-1)/2.
inline double spearman_bruteforce(const std::vector<double>& xs,
                                  const std::vector<double>& ys) {
  auto ranks = [](const std::vector<double>& v) {
    std::vector<double> r(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
      std::size_t smaller = 0, ties = 0;
      for (std::size_t j = 0; j < v.size(); ++j) {
        if (v[j] < v[i]) ++smaller;
        if (v[j] == v[i]) ++ties;
      }
      r[i] = 1.0 + static_cast<double>(smaller) +
             (static_cast<double>(ties) - 1.0) / 2.0;
    }
    return r;
  };
  std::vector<double> rx = ranks(xs), ry = ranks(ys);
  double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += rx[i];
    my += ry[i];
  }
  mx /= n;
  my /= n;
  double num = 0, dx = 0, dy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (rx[i] - mx) * (ry[i] - my);
    dx += (rx[i] - mx) * (rx[i] - mx);
    dy += (ry[i] - my) * (ry[i] - my);
  }
  return num / std::sqrt(dx * dy);
}

inline double entropy_bruteforce(const std::vector<double>& u,
                                 double eps = 1e-6) {
  double mn = u[0];
  for (double x : u)
    if (x < mn) mn = x;
  double shift = (mn < 0.0 ? -mn : 0.0) + eps;
  std::vector<double> p(u.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    p[i] = u[i] + shift;
    sum += p[i];
  }
  double h = 0.0;
  for (double x : p) h -= (x / sum) * std::log(x / sum);
  return h;
}

inline std::vector<double> precision_at_k_bruteforce(
    const std::vector<std::vector<int>>& ranked, const std::vector<int>& gold,
    const std::vector<std::size_t>& ks) {
  std::vector<double> out;
  for (std::size_t k : ks) {
    int hit = 0;
    for (std::size_t q = 0; q < ranked.size(); ++q)
      for (std::size_t i = 0; i < ranked[q].size() && i < k; ++i)
        if (ranked[q][i] == gold[q]) {
          ++hit;
          break;
        }
    out.push_back(100.0 * hit / static_cast<double>(ranked.size()));
  }
  return out;
}

// Plain gradient descent on the centered ridge objective, run to convergence.
// Returns the d_in x d_out coefficient matrix.
inline mmgram::Matrix ridge_gradient_descent(const mmgram::Matrix& X,
                                             const mmgram::Matrix& Y,
                                             double lambda, double lr = 1e-3,
                                             int iters = 200000) {
  using mmgram::Matrix;
  const std::size_t n = X.rows, din = X.cols, dout = Y.cols;
  std::vector<double> xmean(din, 0.0), ymean(dout, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < din; ++j) xmean[j] += X(i, j) / n;
    for (std::size_t j = 0; j < dout; ++j) ymean[j] += Y(i, j) / n;
  }
  Matrix Xc(n, din), Yc(n, dout);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < din; ++j) Xc(i, j) = X(i, j) - xmean[j];
    for (std::size_t j = 0; j < dout; ++j) Yc(i, j) = Y(i, j) - ymean[j];
  }
  Matrix W(din, dout);
  Matrix grad(din, dout);
  for (int it = 0; it < iters; ++it) {
    std::fill(grad.data.begin(), grad.data.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t o = 0; o < dout; ++o) {
        double resid = -Yc(i, o);
        for (std::size_t j = 0; j < din; ++j) resid += Xc(i, j) * W(j, o);
        for (std::size_t j = 0; j < din; ++j)
          grad(j, o) += 2.0 * resid * Xc(i, j);
      }
    }
    for (std::size_t j = 0; j < din; ++j)
      for (std::size_t o = 0; o < dout; ++o)
        grad(j, o) += 2.0 * lambda * W(j, o);
    double step = 0.0;
    for (std::size_t e = 0; e < grad.data.size(); ++e) {
      W.data[e] -= lr * grad.data[e];
      step = std::max(step, std::fabs(grad.data[e]));
    }
    if (step < 1e-10) break;
  }
  return W;
}

}  // namespace oracle
