#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>

namespace autoecon {

// Neumaier compensated accumulator. Order-independent to ~1e-12 relative,
// which keeps parallel reductions reproducible.
class CompensatedSum {
 public:
  void add(double x) {
    double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
};

inline double compensated_total(const double* xs, std::size_t n) {
  CompensatedSum s;
  for (std::size_t i = 0; i < n; ++i) s.add(xs[i]);
  return s.value();
}

// Golden-section minimization of a unimodal function on [lo, hi].
// Stops when the bracket is narrower than tol_abs; returns the midpoint.
inline double golden_section_minimize(const std::function<double(double)>& f,
                                      double lo, double hi, double tol_abs,
                                      int max_iters = 200) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  for (int i = 0; i < max_iters && (b - a) > tol_abs; ++i) {
    if (fc < fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

// Bisection root find for a continuous monotone function with a sign change
// on [lo, hi]. Returns the midpoint of the final bracket.
inline double bisect_root(const std::function<double(double)>& f, double lo,
                          double hi, int iters = 200) {
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  // Caller guarantees a sign change; degrade gracefully if not.
  if ((flo > 0.0) == (fhi > 0.0)) {
    return std::abs(flo) < std::abs(fhi) ? lo : hi;
  }
  for (int i = 0; i < iters; ++i) {
    double mid = 0.5 * (lo + hi);
    double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm > 0.0) == (flo > 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
    if (hi - lo <= std::numeric_limits<double>::epsilon() * std::abs(hi)) {
      break;
    }
  }
  return 0.5 * (lo + hi);
}

inline bool nearly_equal(double x, double y, double rel, double abs_tol = 0.0) {
  double scale = std::max(std::abs(x), std::abs(y));
  return std::abs(x - y) <= std::max(rel * scale, abs_tol);
}

}  // namespace autoecon
