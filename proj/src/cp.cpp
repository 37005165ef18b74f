#include "tlcp/cp.hpp"

#include <bit>
#include <cmath>

#include "tlcp/numeric.hpp"

namespace tlcp {
namespace {

constexpr long EXHAUSTIVE_GUARD = 25;
constexpr double PRUNE = 1e-4;
constexpr double ORTHO_TOL = 1e-6;

void require_orthogonal(const Matrix& x, double scale) {
    const Matrix gram = x.transpose() * x;
    const double residual =
        (gram - scale * Matrix::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff();
    if (residual > ORTHO_TOL) throw NotOrthogonal(residual);
}

std::vector<int> mask_to_indices(std::uint32_t mask, int k) {
    std::vector<int> idx;
    for (int i = 0; i < k; ++i)
        if (mask & (1u << i)) idx.push_back(i);
    return idx;
}

}  // namespace

// Deterministic preference order shared by every exhaustive solver: lower
// objective wins; within the tie band, fewer features, then the
// lexicographically smallest index list. (Not equivalent to numeric mask order.)
bool exhaustive_prefers(double obj, const std::vector<int>& idx, double best_obj,
                        const std::vector<int>& best_idx) {
    const double tie = 1e-12 * (1.0 + std::abs(best_obj));
    if (obj < best_obj - tie) return true;
    if (obj > best_obj + tie) return false;
    if (idx.size() != best_idx.size()) return idx.size() < best_idx.size();
    return idx < best_idx;
}

Estimate solve_orthogonal_cp(const Dataset& data, double lambda) {
    const auto n = data.n();
    const auto k = data.k();
    require_orthogonal(data.design, static_cast<double>(n));

    Estimate est;
    est.method = Method::closed_form;
    est.coefficients = Vector::Zero(k);
    est.support.assign(k, false);
    int p = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const double c = data.design.col(i).dot(data.response) / static_cast<double>(n);
        if (static_cast<double>(n) * c * c > lambda) {
            est.coefficients(i) = c;
            est.support[i] = true;
            ++p;
        }
    }
    est.objective = (data.response - data.design * est.coefficients).squaredNorm() + lambda * p;
    return est;
}

Estimate solve_exhaustive_cp(const Dataset& data, double lambda) {
    const int k = static_cast<int>(data.k());
    if (k > EXHAUSTIVE_GUARD) throw TooManyFeatures(k, EXHAUSTIVE_GUARD);

    const Matrix gram = data.design.transpose() * data.design;
    const Vector xty = data.design.transpose() * data.response;
    const double yty = data.response.squaredNorm();

    double best_obj = yty;  // empty support
    std::vector<int> best_idx;
    Vector best_coef;

    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        const auto idx = mask_to_indices(mask, k);
        const int p = static_cast<int>(idx.size());
        Matrix g(p, p);
        Vector b(p);
        for (int a = 0; a < p; ++a) {
            b(a) = xty(idx[a]);
            for (int c = 0; c < p; ++c) g(a, c) = gram(idx[a], idx[c]);
        }
        Eigen::LDLT<Matrix> ldlt(g);
        Vector coef;
        if (ldlt.info() == Eigen::Success && ldlt.isPositive()) {
            coef = ldlt.solve(b);
            if (!coef.allFinite()) coef = Vector();
        }
        if (coef.size() == 0) {  // rank-deficient subset: minimum-norm fit
            Eigen::CompleteOrthogonalDecomposition<Matrix> cod(g);
            coef = cod.solve(b);
        }
        const double rss = yty - 2.0 * coef.dot(b) + coef.dot(g * coef);
        const double obj = rss + lambda * p;
        if (exhaustive_prefers(obj, idx, best_obj, best_idx)) {
            best_obj = obj;
            best_idx = idx;
            best_coef = coef;
        }
    }

    Estimate est;
    est.method = Method::exhaustive;
    est.coefficients = Vector::Zero(k);
    for (std::size_t a = 0; a < best_idx.size(); ++a) est.coefficients(best_idx[a]) = best_coef(a);
    est.support.assign(k, false);
    for (int i = 0; i < k; ++i) est.support[i] = est.coefficients(i) != 0.0;
    est.objective = best_obj;
    return est;
}

Estimate solve_approx_cp(const Dataset& data, double lambda) {
    const auto n = data.n();
    const auto k = data.k();

    OrthogonalizationResult ortho;
    if (n >= k) {
        try {
            ortho = orthogonalize(data.design);
        } catch (const RankDeficient&) {
            ortho = project_highdim(data.design);
        }
    } else {
        ortho = project_highdim(data.design);
    }

    const auto r = ortho.transformed_design.cols();
    Vector alpha1 = Vector::Zero(r);
    for (Eigen::Index i = 0; i < r; ++i) {
        const double c = ortho.transformed_design.col(i).dot(data.response) / ortho.scale;
        if (ortho.scale * c * c > lambda) alpha1(i) = c;
    }

    Estimate est;
    est.method = Method::approximate;
    est.coefficients = ortho.transform * alpha1;
    est.support.assign(k, false);
    int p = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        est.support[i] = std::abs(est.coefficients(i)) > PRUNE;
        if (est.support[i]) ++p;
    }
    est.objective =
        (data.response - data.design * est.coefficients).squaredNorm() + lambda * p;
    return est;
}

double cp_selection_probability(double beta_i, double sigma1, int n, double lambda) {
    const double root_n = std::sqrt(static_cast<double>(n));
    const double root_l = std::sqrt(lambda);
    const double upper = (-root_n * beta_i + root_l) / sigma1;
    const double lower = (-root_n * beta_i - root_l) / sigma1;
    return 1.0 - (normal_cdf(upper) - normal_cdf(lower));
}

double cp_mse(const ModelTruth& truth, int n, double lambda) {
    const double s = truth.sigma1;
    const double nd = static_cast<double>(n);
    Accumulator total;
    for (Eigen::Index i = 0; i < truth.beta.size(); ++i) {
        total.add(s * s / nd);
        if (lambda <= 0.0) continue;
        const double b = truth.beta(i);
        // clip to the density's effective support: mass beyond 12 sigma is ~1e-33,
        // and without the clip a huge lambda dwarfs the Gaussian between the
        // quadrature nodes
        const double lo = std::max(-std::sqrt(nd) * b - std::sqrt(lambda), -12.0 * s);
        const double hi = std::min(-std::sqrt(nd) * b + std::sqrt(lambda), 12.0 * s);
        if (lo >= hi) continue;
        // correction for wrongly dropping / rightly dropping feature i
        total.add(integrate(
            [&](double y) {
                return (b * b - y * y / nd) * normal_pdf(y / s) / s;
            },
            lo, hi, 1e-10));
    }
    return total.total();
}

std::pair<double, double> critical_points(double sigma1, int n) {
    const double c = std::sqrt(2.0 / static_cast<double>(n)) * sigma1;
    return {-c, c};
}

CpAnalytics cp_test_view(double lambda, double sigma1, int n, const Vector& beta) {
    CpAnalytics a;
    a.significance = 1.0 - chi2_cdf_1(lambda / (sigma1 * sigma1));
    a.power.resize(beta.size());
    for (Eigen::Index i = 0; i < beta.size(); ++i)
        a.power(i) = cp_selection_probability(beta(i), sigma1, n, lambda);
    a.selection_probability = a.power;
    ModelTruth truth{beta, Vector::Zero(beta.size()), sigma1, sigma1};
    a.mse = cp_mse(truth, n, lambda);
    return a;
}

double bic_lambda(double sigma1_sq_hat, int n) {
    if (n < 2) throw InsufficientSamples(n, 1);
    return sigma1_sq_hat * std::log(static_cast<double>(n));
}

}  // namespace tlcp
