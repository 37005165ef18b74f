#include "tlcp/multitask.hpp"

#include <cmath>

#include "tlcp/numeric.hpp"

namespace tlcp {
namespace {

constexpr int FEATURE_GUARD = 15;
constexpr int TASK_GUARD = 5;
constexpr double ORTHO_TOL = 1e-6;

void require_orthogonal(const Matrix& x) {
    const Matrix gram = x.transpose() * x;
    const double residual =
        (gram - static_cast<double>(x.rows()) * Matrix::Identity(x.cols(), x.cols()))
            .cwiseAbs()
            .maxCoeff();
    if (residual > ORTHO_TOL) throw NotOrthogonal(residual);
}

void validate_bundle(const MultiTaskBundle& bundle) {
    const auto k = bundle.target.k();
    for (const auto& s : bundle.sources)
        if (s.k() != k) throw Error("task designs have different feature counts");
    if (bundle.weights.size() != static_cast<Eigen::Index>(1 + bundle.sources.size()))
        throw Error("weights length does not match the task count");
    if (bundle.gamma.size() != k) throw Error("gamma length does not match feature count");
    for (Eigen::Index t = 0; t < bundle.weights.size(); ++t)
        if (bundle.weights(t) < 0.0) throw Error("task weights must be non-negative");
}

// Exact per-feature minimizer of
//   sum_t lam_t s_t [(w_t - stat_t)^2 - stat_t^2] + gamma/2 * sum_t (w_t - alpha0)^2
// over (alpha0, w_1..w_ell). psi is the minimized value (complexity excluded).
struct FeatureSolution {
    std::vector<double> w;
    double alpha0 = 0.0;
    double psi = 0.0;
};

FeatureSolution solve_feature(const std::vector<double>& lam, const std::vector<double>& s,
                              const std::vector<double>& stat, double gamma) {
    const std::size_t ell = lam.size();
    FeatureSolution sol;
    sol.w.assign(ell, 0.0);
    if (std::isinf(gamma)) {
        double num = 0.0, den = 0.0;
        for (std::size_t t = 0; t < ell; ++t) {
            num += lam[t] * s[t] * stat[t];
            den += lam[t] * s[t];
        }
        sol.alpha0 = den > 0.0 ? num / den : 0.0;
        for (std::size_t t = 0; t < ell; ++t) sol.w[t] = sol.alpha0;
        sol.psi = den > 0.0 ? -num * num / den : 0.0;
        return sol;
    }
    std::vector<double> c(ell);
    double cn = 0.0, cd = 0.0;
    for (std::size_t t = 0; t < ell; ++t) {
        c[t] = 2.0 * lam[t] * s[t] / (gamma + 2.0 * lam[t] * s[t]);
        cn += c[t] * stat[t];
        cd += c[t];
    }
    sol.alpha0 = cd > 0.0 ? cn / cd : 0.0;
    for (std::size_t t = 0; t < ell; ++t) {
        sol.w[t] = (1.0 - c[t]) * sol.alpha0 + c[t] * stat[t];
        const double v = sol.w[t] - sol.alpha0;
        sol.psi += lam[t] * s[t] * ((sol.w[t] - stat[t]) * (sol.w[t] - stat[t]) -
                                    stat[t] * stat[t]) +
                   0.5 * gamma * v * v;
    }
    return sol;
}

}  // namespace

ThreeTaskWeights tlcp3_weights(double l1, double l2, double l3, double gamma, int n, int m2,
                               int m3) {
    const double nd = n, md = m2, qd = m3;
    if (std::isinf(gamma)) {  // shared-coefficient limit: pooled weighting
        const double d = nd * l1 + md * l2 + qd * l3;
        return {nd * l1 / d, md * l2 / d, qd * l3 / d};
    }
    if (l1 > 0.0 && l2 > 0.0 && l3 > 0.0) {
        const double g = gamma;
        const double k1 = 2.0 * md * nd * l1 * l2 / (2.0 * md * nd * l1 * l2 + md * l2 * g);
        const double k2 =
            (2.0 * md * nd * l1 * l2 + nd * l1 * g) / (2.0 * md * nd * l1 * l2 + md * l2 * g);
        const double j = 12.0 * md * nd * qd * l1 * l2 * l3 + 4.0 * md * qd * l2 * l3 * g +
                         4.0 * md * nd * l1 * l2 * g + 4.0 * qd * nd * l1 * l3 * g +
                         (qd * l3 + nd * l1 + md * l2) * g * g;
        const double lw = (4.0 * md * nd * qd * l1 * l2 * l3 + 2.0 * md * nd * l1 * l2 * g) / j;
        const double lw2 = (4.0 * md * nd * qd * l1 * l2 * l3 + 2.0 * md * qd * l2 * l3 * g) / j;
        const double s1 = 1.0 - g / (2.0 * nd * l1) * (k1 - k2 * lw);
        const double s2 = g / (2.0 * nd * l1) * (k1 - k2 * lw - k2 * lw2);
        const double s3 = g / (2.0 * nd * l1) * k2 * lw2;
        return {s1, s2, s3};
    }
    // degenerate task weights: read the combining weights off the exact minimizer
    const std::vector<double> lam{l1, l2, l3};
    const std::vector<double> sz{nd, md, qd};
    std::vector<double> c(3);
    double cd = 0.0;
    for (int t = 0; t < 3; ++t) {
        c[t] = 2.0 * lam[t] * sz[t] / (gamma + 2.0 * lam[t] * sz[t]);
        cd += c[t];
    }
    if (cd <= 0.0) return {0.0, 0.0, 0.0};
    return {(1.0 - c[0]) * c[0] / cd + c[0], (1.0 - c[0]) * c[1] / cd,
            (1.0 - c[0]) * c[2] / cd};
}

Estimate solve_orthogonal_tlcp3(const MultiTaskBundle& bundle) {
    if (bundle.sources.size() != 2)
        throw WrongSourceCount(static_cast<int>(bundle.sources.size()), 2);
    validate_bundle(bundle);
    const auto& t1 = bundle.target;
    const auto& t2 = bundle.sources[0];
    const auto& t3 = bundle.sources[1];
    require_orthogonal(t1.design);
    require_orthogonal(t2.design);
    require_orthogonal(t3.design);

    const auto k = t1.k();
    const std::vector<double> lam{bundle.weights(0), bundle.weights(1), bundle.weights(2)};
    const std::vector<double> sz{static_cast<double>(t1.n()), static_cast<double>(t2.n()),
                                 static_cast<double>(t3.n())};
    const Vector z1 = t1.design.transpose() * t1.response / sz[0];
    const Vector h1 = t2.design.transpose() * t2.response / sz[1];
    const Vector h2 = t3.design.transpose() * t3.response / sz[2];

    Estimate est;
    est.method = Method::closed_form;
    est.coefficients = Vector::Zero(k);
    est.support.assign(k, false);
    Vector w2 = Vector::Zero(k), w3 = Vector::Zero(k);
    double coupling = 0.0;
    int p = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const std::vector<double> stat{z1(i), h1(i), h2(i)};
        const auto sol = solve_feature(lam, sz, stat, bundle.gamma(i));
        if (!(sol.psi + bundle.lambda_complexity < 0.0)) continue;
        const auto w = tlcp3_weights(lam[0], lam[1], lam[2], bundle.gamma(i),
                                     static_cast<int>(t1.n()), static_cast<int>(t2.n()),
                                     static_cast<int>(t3.n()));
        est.coefficients(i) = w.s1 * z1(i) + w.s2 * h1(i) + w.s3 * h2(i);
        w2(i) = sol.w[1];
        w3(i) = sol.w[2];
        est.support[i] = true;
        ++p;
        if (!std::isinf(bundle.gamma(i)))
            for (int t = 0; t < 3; ++t) {
                const double v = sol.w[t] - sol.alpha0;
                coupling += 0.5 * bundle.gamma(i) * v * v;
            }
    }
    est.objective = lam[0] * (t1.response - t1.design * est.coefficients).squaredNorm() +
                    lam[1] * (t2.response - t2.design * w2).squaredNorm() +
                    lam[2] * (t3.response - t3.design * w3).squaredNorm() + coupling +
                    bundle.lambda_complexity * p;
    return est;
}

MultiTaskParams tune_tlcp3(const std::array<double, 3>& sigmas, const Vector& delta1,
                           const Vector& delta2, int n, int m2, int m3) {
    const double s1 = sigmas[0], s2 = sigmas[1], s3 = sigmas[2];
    if (delta1.size() != delta2.size())
        throw Error("dissimilarity vectors have different lengths");
    const auto k = delta1.size();
    MultiTaskParams p;
    p.weights.resize(3);
    p.weights << s2 * s2 * s3 * s3, s1 * s1 * s3 * s3, s1 * s1 * s2 * s2;
    p.gamma.resize(k);
    const double lambda = 2.0 * s1 * s1;
    double best = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) {
        const double d = delta1(i) + delta2(i);
        double cand;
        if (std::abs(d) < 1e-12) {
            p.gamma(i) = INF_LAMBDA;
            cand = lambda * s2 * s2 * s3 * s3;  // shared-coefficient limit of the rule below
        } else {
            p.gamma(i) = 12.0 * s1 * s1 * s2 * s2 * s3 * s3 / (d * d);
            const double dd = d * d + s1 * s1 / n + s2 * s2 / m2 + s3 * s3 / m3;
            const double mt = s1 * s1 * m2 * m3 * (d * d + s1 * s1 / n) / dd;
            const double nt = s2 * s2 * n * m3 * (d * d + s2 * s2 / m2) / dd;
            const double wt = s3 * s3 * n * m2 * (d * d + s3 * s3 / m3) / dd;
            const double qt = -2.0 * s1 * s1 * s2 * s2 * s3 * s3 / dd;
            const double g2 =
                static_cast<double>(n) * m2 * m3 /
                (n * mt * s2 * s2 * s3 * s3 + m2 * nt * s1 * s1 * s3 * s3 +
                 m3 * wt * s1 * s1 * s2 * s2);
            cand = lambda * (2.0 - qt / std::sqrt(mt * nt * wt)) / (4.0 * s1 * s1 * g2);
        }
        best = std::min(best, cand);
    }
    p.lambda_complexity = best;
    return p;
}

Estimate solve_exhaustive_general(const MultiTaskBundle& bundle) {
    validate_bundle(bundle);
    const int k = static_cast<int>(bundle.target.k());
    const int ell = 1 + static_cast<int>(bundle.sources.size());
    if (k > FEATURE_GUARD) throw TooManyFeatures(k, FEATURE_GUARD);
    if (ell > TASK_GUARD) throw Error("at most 5 tasks supported");

    std::vector<const Dataset*> tasks{&bundle.target};
    for (const auto& s : bundle.sources) tasks.push_back(&s);
    std::vector<Matrix> gram(ell);
    std::vector<Vector> xty(ell);
    double base = 0.0;
    for (int t = 0; t < ell; ++t) {
        gram[t] = tasks[t]->design.transpose() * tasks[t]->design;
        xty[t] = tasks[t]->design.transpose() * tasks[t]->response;
        base += bundle.weights(t) * tasks[t]->response.squaredNorm();
    }

    double best_obj = base;  // empty support
    std::vector<int> best_idx;
    Vector best_w1;
    int skipped = 0;

    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < k; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        const int p = static_cast<int>(idx.size());
        std::vector<int> fin;
        for (int a = 0; a < p; ++a)
            if (!std::isinf(bundle.gamma(idx[a]))) fin.push_back(a);
        const int f = static_cast<int>(fin.size());

        const int dim = p + ell * f;
        Matrix sys = Matrix::Zero(dim, dim);
        Vector rhs = Vector::Zero(dim);
        std::vector<Matrix> gt(ell, Matrix(p, p));
        std::vector<Vector> bt(ell, Vector(p));
        for (int t = 0; t < ell; ++t)
            for (int a = 0; a < p; ++a) {
                bt[t](a) = xty[t](idx[a]);
                for (int c = 0; c < p; ++c) gt[t](a, c) = gram[t](idx[a], idx[c]);
            }
        for (int t = 0; t < ell; ++t) {
            const double lt = bundle.weights(t);
            sys.block(0, 0, p, p) += lt * gt[t];
            rhs.head(p) += lt * bt[t];
            const int off = p + t * f;
            for (int a = 0; a < f; ++a) {
                sys.block(0, off + a, p, 1) = lt * gt[t].col(fin[a]);
                sys.block(off + a, 0, 1, p) = lt * gt[t].row(fin[a]);
                for (int c = 0; c < f; ++c) sys(off + a, off + c) = lt * gt[t](fin[a], fin[c]);
                sys(off + a, off + a) += 0.5 * bundle.gamma(idx[fin[a]]);
                rhs(off + a) = lt * bt[t](fin[a]);
            }
        }

        Eigen::FullPivLU<Matrix> lu(sys);
        lu.setThreshold(1e-10);
        if (!lu.isInvertible()) {
            ++skipped;
            continue;
        }
        const Vector u = lu.solve(rhs);
        double obj = bundle.lambda_complexity * p;
        Vector w1;
        for (int t = 0; t < ell; ++t) {
            Vector w = u.head(p);
            for (int a = 0; a < f; ++a) {
                const double v = u(p + t * f + a);
                w(fin[a]) += v;
                obj += 0.5 * bundle.gamma(idx[fin[a]]) * v * v;
            }
            const double rss =
                tasks[t]->response.squaredNorm() - 2.0 * w.dot(bt[t]) + w.dot(gt[t] * w);
            obj += bundle.weights(t) * rss;
            if (t == 0) w1 = w;
        }
        if (exhaustive_prefers(obj, idx, best_obj, best_idx)) {
            best_obj = obj;
            best_idx = idx;
            best_w1 = w1;
        }
    }

    Estimate est;
    est.method = Method::exhaustive;
    est.coefficients = Vector::Zero(k);
    for (std::size_t a = 0; a < best_idx.size(); ++a)
        est.coefficients(best_idx[a]) = best_w1(static_cast<Eigen::Index>(a));
    est.support.assign(k, false);
    for (int i = 0; i < k; ++i) est.support[i] = est.coefficients(i) != 0.0;
    est.objective = best_obj;
    est.skipped_subsets = skipped;
    return est;
}

}  // namespace tlcp
