#pragma once

#include <utility>
#include <vector>

#include "tlcp/foundation.hpp"

namespace tlcp {

enum class Method { closed_form, exhaustive, approximate, baseline };

struct Estimate {
    Vector coefficients;        // length k
    std::vector<bool> support;  // closed_form/exhaustive: support[i] == (coefficients[i] != 0)
    double objective = 0.0;
    Method method = Method::closed_form;
    int skipped_subsets = 0;    // exhaustive solvers: singular subsets skipped (diagnostic)
};

struct CpAnalytics {
    Vector selection_probability;  // per feature, in [0,1]
    double mse = 0.0;
    double significance = 0.0;     // chi-squared view; identical to the z-test view 2*Phi(-sqrt(lambda)/sigma)
    Vector power;                  // per feature, in [0,1]
};

// Per-feature threshold rule on an orthogonal design (X'X = n I within 1e-6,
// else NotOrthogonal): keep c_i = W_i'y/n iff n c_i^2 > lambda.
Estimate solve_orthogonal_cp(const Dataset& data, double lambda);

// All 2^k subsets, least squares per subset (minimum-norm when rank deficient),
// minimize RSS + lambda * |support|. Ties: smaller support, then lexicographically
// smallest index list. Guard k <= 25.
Estimate solve_exhaustive_cp(const Dataset& data, double lambda);

// Orthogonalized closed form, back-transformed. Full-rank tall designs go through
// gram_schmidt; wide or rank-deficient ones through the eigen projection. Support
// is the back-transformed coefficients above the 1e-4 pruning threshold; the
// objective is the original criterion at the back-transformed point.
Estimate solve_approx_cp(const Dataset& data, double lambda);

// 1 - [Phi((-sqrt(n) b + sqrt(lambda))/sigma) - Phi((-sqrt(n) b - sqrt(lambda))/sigma)].
double cp_selection_probability(double beta_i, double sigma1, int n, double lambda);

// Sum over features of sigma1^2/n plus the bounded correction integral
// (adaptive quadrature, absolute tolerance 1e-10). lambda = 0 gives k sigma1^2 / n.
double cp_mse(const ModelTruth& truth, int n, double lambda);

// (-sqrt(2/n) sigma1, +sqrt(2/n) sigma1): coefficients where selection is a coin flip.
std::pair<double, double> critical_points(double sigma1, int n);

// Statistical-test reading of the threshold rule: significance = 1 - F(lambda/sigma^2; 1)
// (the chi-squared view; equal to the z-test's 2*Phi(-sqrt(lambda)/sigma)), power per
// feature = its selection probability. mse is evaluated at delta = 0.
CpAnalytics cp_test_view(double lambda, double sigma1, int n, const Vector& beta);

// The penalty level at which the subset criterion becomes BIC: sigma^2 * log n.
double bic_lambda(double sigma1_sq_hat, int n);

// Preference order shared by every exhaustive solver (cp, tlcp, multitask):
// lower objective, then (within a 1e-12 relative tie band) fewer features, then
// the lexicographically smallest index list.
bool exhaustive_prefers(double obj, const std::vector<int>& idx, double best_obj,
                        const std::vector<int>& best_idx);

}  // namespace tlcp
