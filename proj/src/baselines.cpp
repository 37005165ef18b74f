#include "tlcp/baselines.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/special_functions/beta.hpp>

#include "tlcp/numeric.hpp"

namespace tlcp {
namespace {

void check_thresholds(const BaselineConfig& config) {
    if (config.p_enter <= 0.0 || config.p_enter >= 1.0 || config.p_remove <= 0.0 ||
        config.p_remove >= 1.0)
        throw Error("significance thresholds must lie in (0,1)");
}

Matrix columns(const Matrix& x, const std::vector<int>& idx) {
    Matrix sub(x.rows(), static_cast<Eigen::Index>(idx.size()));
    for (std::size_t a = 0; a < idx.size(); ++a) sub.col(static_cast<Eigen::Index>(a)) = x.col(idx[a]);
    return sub;
}

double fit_rss(const Dataset& data, const std::vector<int>& idx) {
    if (idx.empty()) return data.response.squaredNorm();
    const Matrix sub = columns(data.design, idx);
    const Vector coef = least_squares(sub, data.response);
    return (data.response - sub * coef).squaredNorm();
}

// Upper tail of F(1, d) at f, via the regularized incomplete beta function.
double partial_f_pvalue(double f, double d) {
    if (!std::isfinite(f)) return 0.0;
    if (f <= 0.0) return 1.0;
    return boost::math::ibeta(d / 2.0, 0.5, d / (d + f));
}

Estimate refit(const Dataset& data, std::vector<int> idx) {
    std::sort(idx.begin(), idx.end());
    Estimate est;
    est.method = Method::baseline;
    est.coefficients = Vector::Zero(data.k());
    est.support.assign(data.k(), false);
    if (!idx.empty()) {
        const Matrix sub = columns(data.design, idx);
        const Vector coef = least_squares(sub, data.response);
        for (std::size_t a = 0; a < idx.size(); ++a) {
            est.coefficients(idx[a]) = coef(static_cast<Eigen::Index>(a));
            est.support[idx[a]] = true;
        }
    }
    est.objective = (data.response - data.design * est.coefficients).squaredNorm();
    return est;
}

}  // namespace

Estimate univariate_select(const Dataset& data, const BaselineConfig& config) {
    check_thresholds(config);
    const auto k = data.k();
    const auto n = data.n();
    const Vector r_all = pearson(data.design, data.response);
    std::vector<std::pair<double, int>> ranked;  // (-|r|, index) for stable ordering
    ranked.reserve(k);
    for (Eigen::Index j = 0; j < k; ++j)
        ranked.emplace_back(-std::abs(r_all(j)), static_cast<int>(j));
    std::sort(ranked.begin(), ranked.end());

    std::vector<int> kept;
    if (config.top_j) {
        const int j = std::max(0, std::min<int>(*config.top_j, static_cast<int>(k)));
        for (int a = 0; a < j; ++a) kept.push_back(ranked[a].second);
    } else {
        if (n < 4) throw InsufficientSamples(n, 4);
        const double root = std::sqrt(static_cast<double>(n) - 3.0);
        for (const auto& [neg_r, j] : ranked) {
            const double r = std::min(-neg_r, 1.0 - 1e-15);  // atanh guard at |r| = 1
            const double z = std::atanh(r) * root;
            const double p = 2.0 * normal_cdf(-std::abs(z));
            if (p < config.p_enter) kept.push_back(j);
        }
    }
    return refit(data, kept);
}

Estimate stepwise(const Dataset& data, const BaselineConfig& config) {
    check_thresholds(config);
    const auto n = data.n();
    const int k = static_cast<int>(data.k());
    if (n <= data.k()) throw InsufficientSamples(n, data.k() + 1);

    std::vector<int> support;
    std::vector<bool> in(k, false);
    double rss = data.response.squaredNorm();
    const double floor = 1e-14 * std::max(1.0, rss);
    const long guard = 2L * k * k;

    for (long iter = 0; iter < guard; ++iter) {
        bool changed = false;
        // forward: best candidate by partial-F p-value
        if (rss > floor && static_cast<int>(support.size()) < k) {
            const double d = static_cast<double>(n) - support.size() - 1.0;
            int best = -1;
            double best_p = config.p_enter;
            double best_rss = 0.0;
            for (int j = 0; j < k; ++j) {
                if (in[j]) continue;
                auto trial = support;
                trial.push_back(j);
                const double rss_new = fit_rss(data, trial);
                const double f = (rss - rss_new) / (rss_new / d);
                const double p = partial_f_pvalue(f, d);
                if (p < best_p) {
                    best_p = p;
                    best = j;
                    best_rss = rss_new;
                }
            }
            if (best >= 0) {
                support.push_back(best);
                in[best] = true;
                rss = best_rss;
                changed = true;
            }
        }
        // backward: drop the least significant kept feature
        if (!support.empty()) {
            const double d = static_cast<double>(n) - support.size();
            int worst = -1;
            double worst_p = config.p_remove;
            for (std::size_t a = 0; a < support.size(); ++a) {
                auto trial = support;
                trial.erase(trial.begin() + static_cast<long>(a));
                const double rss_without = fit_rss(data, trial);
                const double f = (rss_without - rss) / (rss / d);
                const double p = partial_f_pvalue(f, d);
                if (p > worst_p || (p == worst_p && worst >= 0 && support[a] < worst)) {
                    worst_p = p;
                    worst = support[a];
                }
            }
            if (worst >= 0) {
                support.erase(std::find(support.begin(), support.end(), worst));
                in[worst] = false;
                rss = fit_rss(data, support);
                changed = true;
            }
        }
        if (!changed) break;
    }
    return refit(data, support);
}

}  // namespace tlcp
