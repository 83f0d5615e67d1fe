#pragma once

// Test-only reference computations, kept independent of the library's
// evaluation paths: long-double re-derivations, finite differences, grid
// search, and a numeric Allen-Uzawa computation from the bordered Hessian.

#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "autoecon/scaling_law.hpp"

namespace oracles {

// Long-double evaluation of the loss surface, written against the closed
// form directly (powl/logl), not via the library helpers.
inline long double loss_reference(long double D, long double T, long double M,
                                  long double n,
                                  const autoecon::ScalingLawParams& p) {
  long double ln_n = logl(n);
  long double a = (long double)p.a0 + (long double)p.a1 * ln_n;
  long double b = (long double)p.b0 + (long double)p.b1 * ln_n;
  long double c = (long double)p.c0 + (long double)p.c1 * ln_n;
  long double alpha = expl((long double)p.A0 + (long double)p.A1 * ln_n);
  long double beta = expl((long double)p.B0 + (long double)p.B1 * ln_n);
  long double sigma = expl((long double)p.C0 + (long double)p.C1 * ln_n);
  long double bracket = alpha / powl(D / n, a) + beta / powl(T, b) +
                        sigma / powl(M, c) + (long double)p.G;
  return expl(logl(bracket) + (long double)p.K * ln_n);
}

inline double central_diff(const std::function<double(double)>& f, double x,
                           double rel_step = 1e-6) {
  double h = std::abs(x) * rel_step;
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

// Allen-Uzawa substitution elasticity between inputs i and j of a
// three-input function, from numeric first and second derivatives assembled
// into the bordered Hessian.
inline double allen_uzawa_numeric(
    const std::function<double(const std::array<double, 3>&)>& f,
    const std::array<double, 3>& x, int i, int j) {
  const double rel = 1e-4;
  auto fd1 = [&](int k) {
    std::array<double, 3> lo = x, hi = x;
    double h = x[k] * rel;
    lo[k] -= h;
    hi[k] += h;
    return (f(hi) - f(lo)) / (2.0 * h);
  };
  auto fd2 = [&](int k, int l) {
    if (k == l) {
      std::array<double, 3> lo = x, hi = x;
      double h = x[k] * rel;
      lo[k] -= h;
      hi[k] += h;
      return (f(hi) - 2.0 * f(x) + f(lo)) / (h * h);
    }
    std::array<double, 3> pp = x, pm = x, mp = x, mm = x;
    double hk = x[k] * rel, hl = x[l] * rel;
    pp[k] += hk; pp[l] += hl;
    pm[k] += hk; pm[l] -= hl;
    mp[k] -= hk; mp[l] += hl;
    mm[k] -= hk; mm[l] -= hl;
    return (f(pp) - f(pm) - f(mp) + f(mm)) / (4.0 * hk * hl);
  };

  double g1 = fd1(0), g2 = fd1(1), g3 = fd1(2);
  double m[4][4] = {{0.0, g1, g2, g3},
                    {g1, fd2(0, 0), fd2(0, 1), fd2(0, 2)},
                    {g2, fd2(1, 0), fd2(1, 1), fd2(1, 2)},
                    {g3, fd2(2, 0), fd2(2, 1), fd2(2, 2)}};

  auto det3 = [](double a[3][3]) {
    return a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[2][1]) -
           a[0][1] * (a[1][0] * a[2][2] - a[1][2] * a[2][0]) +
           a[0][2] * (a[1][0] * a[2][1] - a[1][1] * a[2][0]);
  };
  auto det4 = [&](double a[4][4]) {
    double total = 0.0;
    for (int col = 0; col < 4; ++col) {
      double minor[3][3];
      for (int r = 1; r < 4; ++r) {
        int cc = 0;
        for (int c = 0; c < 4; ++c) {
          if (c == col) continue;
          minor[r - 1][cc++] = a[r][c];
        }
      }
      total += ((col % 2) ? -1.0 : 1.0) * a[0][col] * det3(minor);
    }
    return total;
  };

  double det = det4(m);
  // Cofactor of the (i, j) inner entry, which sits at (i+1, j+1).
  double minor[3][3];
  int rr = 0;
  for (int r = 0; r < 4; ++r) {
    if (r == i + 1) continue;
    int cc = 0;
    for (int c = 0; c < 4; ++c) {
      if (c == j + 1) continue;
      minor[rr][cc++] = m[r][c];
    }
    ++rr;
  }
  double cof = (((i + 1 + j + 1) % 2) ? -1.0 : 1.0) * det3(minor);
  double weight = x[0] * g1 + x[1] * g2 + x[2] * g3;
  return weight / (x[i] * x[j]) * cof / det;
}

// The same quantity in closed form for an additively separable power-law
// surface: derived from the bordered-Hessian cofactors with weights
// g_k = exponent_k * numerator_k * x_k^(-exponent_k).
inline double allen_uzawa_closed_form(const std::array<double, 3>& exps,
                                      const std::array<double, 3>& weights,
                                      int i, int j) {
  int k = 3 - i - j;  // the remaining input
  double total = weights[0] + weights[1] + weights[2];
  double s = weights[0] * (exps[1] + 1.0) * (exps[2] + 1.0) +
             weights[1] * (exps[0] + 1.0) * (exps[2] + 1.0) +
             weights[2] * (exps[0] + 1.0) * (exps[1] + 1.0);
  return total * (exps[k] + 1.0) / s;
}

}  // namespace oracles
