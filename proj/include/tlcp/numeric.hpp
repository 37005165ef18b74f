#pragma once

#include <cmath>
#include <functional>

namespace tlcp {

// Standard normal CDF via erfc; absolute error well below 1e-12 everywhere.
inline double normal_cdf(double x) { return 0.5 * std::erfc(-x * 0.70710678118654752440); }

inline double normal_pdf(double x) { return 0.39894228040143267794 * std::exp(-0.5 * x * x); }

// Chi-squared CDF with 1 degree of freedom: F(x;1) = erf(sqrt(x/2)).
inline double chi2_cdf_1(double x) { return x <= 0.0 ? 0.0 : std::erf(std::sqrt(0.5 * x)); }

// Neumaier-compensated running sum; order-stable reductions use it so that
// parallel runs folded in index order match serial runs bit for bit.
class Accumulator {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double total() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

// Adaptive Gauss-Kronrod (G7/K15) on [a, b] with an absolute tolerance budget.
// Tolerance halves with each bisection; segments are accepted when |K15 - G7|
// falls under their share. Deterministic for a given integrand.
double integrate(const std::function<double(double)>& f, double a, double b, double abs_tol);

}  // namespace tlcp
