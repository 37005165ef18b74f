#include "tlcp/transfer.hpp"

#include <cmath>
#include <numbers>

#include "tlcp/numeric.hpp"

namespace tlcp {
namespace {

constexpr long EXHAUSTIVE_GUARD = 20;
constexpr double PRUNE = 1e-4;
constexpr double ORTHO_TOL = 1e-6;

void require_orthogonal(const Matrix& x, double scale) {
    const Matrix gram = x.transpose() * x;
    const double residual =
        (gram - scale * Matrix::Identity(x.cols(), x.cols())).cwiseAbs().maxCoeff();
    if (residual > ORTHO_TOL) throw NotOrthogonal(residual);
}

FeatureWeights weights_for(double l1, double l2, double l3, double nd, double md) {
    FeatureWeights w{};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (l1 <= 0.0 && l2 <= 0.0) {
        w.g = w.m_bar = w.n_bar = nan;
        return w;  // all weights zero; selection quadratic identically zero
    }
    if (std::isinf(l3)) {
        const double s = md * l2 + nd * l1;
        w.d1 = md * l2 / s;
        w.d2 = nd * l1 / s;
        w.d3 = 0.0;
        w.d_tilde = l1 * l2 * md * nd / s;
        w.a = 0.0;
        w.b = 0.0;
        w.c = 1.0 / s;
    } else {
        const double t = 4.0 * l1 * l2 * md * nd + md * l2 * l3 + nd * l1 * l3;
        w.d1 = md * l2 * l3 / t;
        w.d2 = nd * l1 * l3 / t;
        w.d3 = 2.0 * l1 * l2 * md * nd / t;
        w.d_tilde = l1 * l2 * md * nd * l3 / t;
        w.a = 4.0 * l1 * l2 * l2 * md * md * nd / t;
        w.b = 4.0 * l2 * l1 * l1 * md * nd * nd / t;
        w.c = l3 / t;
    }
    w.m_cap = l2 * md - w.d_tilde;
    w.n_cap = l1 * nd - w.d_tilde;
    w.q_cap = -2.0 * w.d_tilde;
    const double g_denom = nd * w.m_cap * l1 + md * w.n_cap * l2;
    w.g = g_denom > 0.0 ? std::sqrt(md * nd / g_denom) : nan;
    if (w.m_cap > 0.0 && w.n_cap > 0.0) {
        const double rm = std::sqrt(w.m_cap);
        const double rn = std::sqrt(w.n_cap);
        w.m_bar = -((1.0 - w.d1) / rn + w.d1 / rm);
        w.n_bar = -((1.0 - w.d1) / rn - w.d1 / rm);
    } else {
        w.m_bar = nan;
        w.n_bar = nan;
    }
    return w;
}

bool selects(const FeatureWeights& w, double z, double h, double lambda4) {
    return w.m_cap * h * h + w.n_cap * z * z - w.q_cap * h * z > lambda4;
}

// Pr{ M H^2 + N Z^2 - Q H Z > lambda4 } for H ~ N(muH, sH^2), Z ~ N(muZ, sZ^2).
double selection_probability_weights(const FeatureWeights& w, double lambda4, double muZ,
                                     double sZ, double muH, double sH) {
    const double M = w.m_cap, N = w.n_cap, Q = w.q_cap;
    if (lambda4 <= 0.0) return M > 0.0 || N > 0.0 ? 1.0 : 0.0;
    const double eps = 1e-14 * (std::abs(M) + std::abs(N) + 1.0);
    if (M <= eps && N <= eps) return 0.0;
    if (M <= eps) {  // N Z^2 > lambda4
        const double t = std::sqrt(lambda4 / N);
        return 1.0 - (normal_cdf((t - muZ) / sZ) - normal_cdf((-t - muZ) / sZ));
    }
    if (N <= eps) {
        const double t = std::sqrt(lambda4 / M);
        return 1.0 - (normal_cdf((t - muH) / sH) - normal_cdf((-t - muH) / sH));
    }
    const double disc4 = 4.0 * M * N - Q * Q;
    if (disc4 <= 1e-12 * 4.0 * M * N) {
        // q = -2 (shared-coefficient limit): |sqrt(M) H + sqrt(N) Z| > sqrt(lambda4)
        const double mu = std::sqrt(M) * muH + std::sqrt(N) * muZ;
        const double sd = std::sqrt(M * sH * sH + N * sZ * sZ);
        const double t = std::sqrt(lambda4);
        return 1.0 - (normal_cdf((t - mu) / sd) - normal_cdf((-t - mu) / sd));
    }
    // non-selection requires |z| < zstar, where the quadratic has real roots in h
    const double zstar = std::sqrt(4.0 * M * lambda4 / disc4);
    const double lo = std::max(-zstar, muZ - 12.0 * sZ);
    const double hi = std::min(zstar, muZ + 12.0 * sZ);
    if (lo >= hi) return 1.0;
    const double miss = integrate(
        [&](double z) {
            const double disc = Q * Q * z * z - 4.0 * M * (N * z * z - lambda4);
            const double root = std::sqrt(std::max(disc, 0.0));
            const double h_plus = (Q * z + root) / (2.0 * M);
            const double h_minus = (Q * z - root) / (2.0 * M);
            const double inside =
                normal_cdf((h_plus - muH) / sH) - normal_cdf((h_minus - muH) / sH);
            return normal_pdf((z - muZ) / sZ) / sZ * inside;
        },
        lo, hi, 1e-8);
    return 1.0 - miss;
}

// Truncated raw moments of N(mu, s^2) on [lo, hi]: returns (E[1], E[X 1], E[X^2 1]).
struct TruncMoments {
    double m0, m1, m2;
};
TruncMoments truncated_moments(double mu, double s, double lo, double hi) {
    const double a = (lo - mu) / s;
    const double b = (hi - mu) / s;
    const double pa = normal_pdf(a), pb = normal_pdf(b);
    const double m0 = normal_cdf(b) - normal_cdf(a);
    const double u1 = pa - pb;                     // E[U 1] for standard U
    const double u2 = m0 - (b * pb - a * pa);      // E[U^2 1]
    return {m0, mu * m0 + s * u1, mu * mu * m0 + 2.0 * mu * s * u1 + s * s * u2};
}

// MSE correction from the non-selection event, closed in h given z.
// Used directly for the degenerate shapes and exposed for the generic case as
// the cross-check route (tlcp_mse itself integrates in the rotated plane).
double mse_second_conditional(const FeatureWeights& w, double beta, double delta, double s1,
                              double s2, double nd, double md, double lambda4) {
    if (lambda4 <= 0.0) return 0.0;
    const double M = w.m_cap, N = w.n_cap, Q = w.q_cap;
    const double muZ = beta, sZ = s1 / std::sqrt(nd);
    const double muH = beta + delta, sH = s2 / std::sqrt(md);
    const double eps = 1e-14 * (std::abs(M) + std::abs(N) + 1.0);
    if (M <= eps && N <= eps) return beta * beta;  // never selected
    if (M <= eps) {                                // miss iff |Z| <= t; estimator would be Z
        const double t = std::sqrt(lambda4 / N);
        const auto mm = truncated_moments(muZ, sZ, -t, t);
        const double sq_err = mm.m2 - 2.0 * beta * mm.m1 + beta * beta * mm.m0;
        return beta * beta * mm.m0 - sq_err;
    }
    if (N <= eps) {  // miss iff |H| <= t; estimator would be H
        const double t = std::sqrt(lambda4 / M);
        const auto mm = truncated_moments(muH, sH, -t, t);
        const double sq_err = mm.m2 - 2.0 * beta * mm.m1 + beta * beta * mm.m0;
        return beta * beta * mm.m0 - sq_err;
    }
    const double disc4 = 4.0 * M * N - Q * Q;
    double zstar = std::numeric_limits<double>::infinity();
    if (disc4 > 1e-12 * 4.0 * M * N) zstar = std::sqrt(4.0 * M * lambda4 / disc4);
    const double lo = std::max(-zstar, muZ - 12.0 * sZ);
    const double hi = std::min(zstar, muZ + 12.0 * sZ);
    if (lo >= hi) return 0.0;
    return integrate(
        [&](double z) {
            const double disc = Q * Q * z * z - 4.0 * M * (N * z * z - lambda4);
            if (disc <= 0.0) return 0.0;
            const double root = std::sqrt(disc);
            const double h_minus = (Q * z - root) / (2.0 * M);
            const double h_plus = (Q * z + root) / (2.0 * M);
            const auto mm = truncated_moments(muH, sH, h_minus, h_plus);
            const double c0 = (1.0 - w.d1) * z - beta;  // would-be error is c0 + d1 h
            const double sq_err =
                c0 * c0 * mm.m0 + 2.0 * c0 * w.d1 * mm.m1 + w.d1 * w.d1 * mm.m2;
            return normal_pdf((z - muZ) / sZ) / sZ * (beta * beta * mm.m0 - sq_err);
        },
        lo, hi, 1e-9);
}

double mse_second_term(const FeatureWeights& w, double beta, double delta, double s1, double s2,
                       double nd, double md, double lambda4) {
    if (lambda4 <= 0.0) return 0.0;
    const double M = w.m_cap, N = w.n_cap;
    const double eps = 1e-14 * (std::abs(M) + std::abs(N) + 1.0);
    if (M <= eps || N <= eps) return mse_second_conditional(w, beta, delta, s1, s2, nd, md, lambda4);

    const double q = w.q_cap / std::sqrt(M * N);
    const double a = std::sqrt(lambda4 / (2.0 - q));
    const double muZ = beta, sZ = s1 / std::sqrt(nd);
    const double muH = beta + delta, sH = s2 / std::sqrt(md);
    // rotated coordinates: x + y = sqrt(N) Z, x - y = sqrt(M) H
    const double muU = 0.5 * (std::sqrt(N) * muZ + std::sqrt(M) * muH);
    const double sU = 0.5 * std::sqrt(N * sZ * sZ + M * sH * sH);
    const double muV = 0.5 * (std::sqrt(N) * muZ - std::sqrt(M) * muH);
    const double sV = sU;
    const double t_norm =
        std::sqrt(md * nd) / (std::numbers::pi * s1 * s2 * std::sqrt(M * N));

    auto integrand = [&](double x, double y) {
        const double e1 = nd * std::pow(x + y - std::sqrt(N) * beta, 2) / (N * s1 * s1);
        const double e2 =
            md * std::pow(x - y - std::sqrt(M) * (beta + delta), 2) / (M * s2 * s2);
        const double dens = t_norm * std::exp(-0.5 * (e1 + e2));
        const double err = w.m_bar * x + w.n_bar * y + beta;  // magnitude of the would-be error
        return (beta * beta - err * err) * dens;
    };

    const double xlo = std::max(-a, muU - 12.0 * sU);
    const double xhi = std::min(a, muU + 12.0 * sU);
    if (xlo >= xhi) return 0.0;
    return integrate(
        [&](double x) {
            double g = std::numeric_limits<double>::infinity();
            if (2.0 + q > 1e-9)
                g = std::sqrt(std::max(0.0, lambda4 - (2.0 - q) * x * x) / (2.0 + q));
            const double ylo = std::max(-g, muV - 12.0 * sV);
            const double yhi = std::min(g, muV + 12.0 * sV);
            if (ylo >= yhi) return 0.0;
            return integrate([&](double y) { return integrand(x, y); }, ylo, yhi, 1e-10);
        },
        xlo, xhi, 1e-8);
}

}  // namespace

DerivedCoefficients derived_coefficients(const TlcpHyperParams& params, int n, int m) {
    DerivedCoefficients dc;
    dc.per_feature.reserve(params.lambda3.size());
    for (Eigen::Index i = 0; i < params.lambda3.size(); ++i)
        dc.per_feature.push_back(weights_for(params.lambda1, params.lambda2, params.lambda3(i),
                                             static_cast<double>(n), static_cast<double>(m)));
    return dc;
}

TlcpHyperParams tune_tlcp(double sigma1, double sigma2, const Vector& delta, int n, int m,
                          double lambda) {
    if (lambda <= 0.0) lambda = 2.0 * sigma1 * sigma1;
    TlcpHyperParams p;
    p.lambda1 = sigma2 * sigma2;
    p.lambda2 = sigma1 * sigma1;
    p.lambda3.resize(delta.size());
    for (Eigen::Index i = 0; i < delta.size(); ++i)
        p.lambda3(i) = std::abs(delta(i)) < 1e-12
                           ? INF_LAMBDA
                           : 4.0 * sigma1 * sigma1 * sigma2 * sigma2 / (delta(i) * delta(i));
    const auto dc = derived_coefficients(p, n, m);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& w : dc.per_feature) {
        const double q = w.q_cap / std::sqrt(w.m_cap * w.n_cap);
        best = std::min(best, lambda * (2.0 - q) / (4.0 * sigma1 * sigma1 * w.g * w.g));
    }
    p.lambda4 = best;
    return p;
}

std::pair<Estimate, Estimate> solve_orthogonal_tlcp(const TaskPair& pair,
                                                    const TlcpHyperParams& params) {
    const auto n = pair.target.n();
    const auto m = pair.source.n();
    const auto k = pair.target.k();
    if (pair.source.k() != k) throw Error("task designs have different feature counts");
    if (params.lambda3.size() != k) throw Error("lambda3 length does not match feature count");
    require_orthogonal(pair.target.design, static_cast<double>(n));
    require_orthogonal(pair.source.design, static_cast<double>(m));

    const auto dc = derived_coefficients(params, static_cast<int>(n), static_cast<int>(m));
    const Vector z = pair.target.design.transpose() * pair.target.response / static_cast<double>(n);
    const Vector h = pair.source.design.transpose() * pair.source.response / static_cast<double>(m);

    Estimate target, source;
    target.method = source.method = Method::closed_form;
    target.coefficients = Vector::Zero(k);
    source.coefficients = Vector::Zero(k);
    target.support.assign(k, false);

    double penalty = 0.0;
    int p = 0;
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto& w = dc.per_feature[i];
        if (!selects(w, z(i), h(i), params.lambda4)) continue;
        target.coefficients(i) = (1.0 - w.d1) * z(i) + w.d1 * h(i);
        source.coefficients(i) = (1.0 - w.d2) * h(i) + w.d2 * z(i);
        target.support[i] = true;
        ++p;
        if (!std::isinf(params.lambda3(i))) {
            const double v = w.d3 * (h(i) - z(i));  // v1 = -v, v2 = +v
            penalty += 0.5 * params.lambda3(i) * 2.0 * v * v;
        }
    }
    source.support = target.support;

    const double objective =
        params.lambda1 * (pair.target.response - pair.target.design * target.coefficients).squaredNorm() +
        params.lambda2 * (pair.source.response - pair.source.design * source.coefficients).squaredNorm() +
        penalty + params.lambda4 * p;
    target.objective = source.objective = objective;
    return {target, source};
}

std::pair<Estimate, Estimate> solve_exhaustive_tlcp(const TaskPair& pair,
                                                    const TlcpHyperParams& params) {
    const int k = static_cast<int>(pair.target.k());
    if (k > EXHAUSTIVE_GUARD) throw TooManyFeatures(k, EXHAUSTIVE_GUARD);
    if (pair.source.k() != k) throw Error("task designs have different feature counts");
    if (params.lambda3.size() != k) throw Error("lambda3 length does not match feature count");

    const double l1 = params.lambda1, l2 = params.lambda2;
    const Matrix g1 = pair.target.design.transpose() * pair.target.design;
    const Matrix g2 = pair.source.design.transpose() * pair.source.design;
    const Vector b1 = pair.target.design.transpose() * pair.target.response;
    const Vector b2 = pair.source.design.transpose() * pair.source.response;
    const double yty1 = pair.target.response.squaredNorm();
    const double yty2 = pair.source.response.squaredNorm();

    double best_obj = l1 * yty1 + l2 * yty2;  // empty support
    std::vector<int> best_idx;
    Vector best_w1, best_w2;
    int skipped = 0;

    for (std::uint32_t mask = 1; mask < (1u << k); ++mask) {
        std::vector<int> idx;
        for (int i = 0; i < k; ++i)
            if (mask & (1u << i)) idx.push_back(i);
        const int p = static_cast<int>(idx.size());

        std::vector<int> fin;  // local positions with finite coupling
        for (int a = 0; a < p; ++a)
            if (!std::isinf(params.lambda3(idx[a]))) fin.push_back(a);
        const int f = static_cast<int>(fin.size());

        Matrix g1t(p, p), g2t(p, p);
        Vector b1t(p), b2t(p);
        for (int a = 0; a < p; ++a) {
            b1t(a) = b1(idx[a]);
            b2t(a) = b2(idx[a]);
            for (int c = 0; c < p; ++c) {
                g1t(a, c) = g1(idx[a], idx[c]);
                g2t(a, c) = g2(idx[a], idx[c]);
            }
        }

        const int dim = p + 2 * f;
        Matrix sys = Matrix::Zero(dim, dim);
        Vector rhs(dim);
        sys.block(0, 0, p, p) = l1 * g1t + l2 * g2t;
        rhs.head(p) = l1 * b1t + l2 * b2t;
        for (int a = 0; a < f; ++a) {
            const int la = fin[a];
            const double l3 = params.lambda3(idx[la]);
            sys.block(0, p + a, p, 1) = l1 * g1t.col(la);
            sys.block(0, p + f + a, p, 1) = l2 * g2t.col(la);
            sys.block(p + a, 0, 1, p) = l1 * g1t.row(la);
            sys.block(p + f + a, 0, 1, p) = l2 * g2t.row(la);
            for (int c = 0; c < f; ++c) {
                sys(p + a, p + c) = l1 * g1t(la, fin[c]);
                sys(p + f + a, p + f + c) = l2 * g2t(la, fin[c]);
            }
            sys(p + a, p + a) += 0.5 * l3;
            sys(p + f + a, p + f + a) += 0.5 * l3;
            rhs(p + a) = l1 * b1t(la);
            rhs(p + f + a) = l2 * b2t(la);
        }

        Eigen::FullPivLU<Matrix> lu(sys);
        lu.setThreshold(1e-10);
        if (!lu.isInvertible()) {
            ++skipped;
            continue;
        }
        const Vector u = lu.solve(rhs);
        Vector w1 = u.head(p), w2 = u.head(p);
        double penalty = 0.0;
        for (int a = 0; a < f; ++a) {
            w1(fin[a]) += u(p + a);
            w2(fin[a]) += u(p + f + a);
            const double l3 = params.lambda3(idx[fin[a]]);
            penalty += 0.5 * l3 * (u(p + a) * u(p + a) + u(p + f + a) * u(p + f + a));
        }
        const double rss1 = yty1 - 2.0 * w1.dot(b1t) + w1.dot(g1t * w1);
        const double rss2 = yty2 - 2.0 * w2.dot(b2t) + w2.dot(g2t * w2);
        const double obj = l1 * rss1 + l2 * rss2 + penalty + params.lambda4 * p;
        if (exhaustive_prefers(obj, idx, best_obj, best_idx)) {
            best_obj = obj;
            best_idx = idx;
            best_w1 = w1;
            best_w2 = w2;
        }
    }

    Estimate target, source;
    target.method = source.method = Method::exhaustive;
    target.coefficients = Vector::Zero(k);
    source.coefficients = Vector::Zero(k);
    for (std::size_t a = 0; a < best_idx.size(); ++a) {
        target.coefficients(best_idx[a]) = best_w1(static_cast<Eigen::Index>(a));
        source.coefficients(best_idx[a]) = best_w2(static_cast<Eigen::Index>(a));
    }
    target.support.assign(k, false);
    source.support.assign(k, false);
    for (int i = 0; i < k; ++i) {
        target.support[i] = target.coefficients(i) != 0.0;
        source.support[i] = source.coefficients(i) != 0.0;
    }
    target.objective = source.objective = best_obj;
    target.skipped_subsets = source.skipped_subsets = skipped;
    return {target, source};
}

Estimate solve_approx_tlcp(const TaskPair& pair, const TlcpHyperParams& params) {
    auto transform_for = [](const Dataset& d) {
        if (d.n() >= d.k()) {
            try {
                return orthogonalize(d.design);
            } catch (const RankDeficient&) {
                return project_highdim(d.design);
            }
        }
        return project_highdim(d.design);
    };
    const auto o1 = transform_for(pair.target);
    const auto o2 = transform_for(pair.source);
    const auto r = o1.transformed_design.cols();
    if (o2.transformed_design.cols() != r)
        throw RankDeficient(std::min<long>(r, o2.transformed_design.cols()),
                            "target and source transforms disagree on rank");
    if (params.lambda3.size() != r)
        throw Error("lambda3 length does not match the transformed dimension");

    const Vector z = o1.transformed_design.transpose() * pair.target.response / o1.scale;
    const Vector h = o2.transformed_design.transpose() * pair.source.response / o2.scale;

    TlcpHyperParams tp = params;
    const auto dc =
        derived_coefficients(tp, static_cast<int>(o1.scale), static_cast<int>(o2.scale));

    Vector w1bar = Vector::Zero(r), w2bar = Vector::Zero(r);
    double penalty = 0.0;
    int p = 0;
    for (Eigen::Index i = 0; i < r; ++i) {
        const auto& w = dc.per_feature[i];
        if (!selects(w, z(i), h(i), params.lambda4)) continue;
        w1bar(i) = (1.0 - w.d1) * z(i) + w.d1 * h(i);
        w2bar(i) = (1.0 - w.d2) * h(i) + w.d2 * z(i);
        ++p;
        if (!std::isinf(params.lambda3(i))) {
            const double v = w.d3 * (h(i) - z(i));
            penalty += 0.5 * params.lambda3(i) * 2.0 * v * v;
        }
    }

    Estimate est;
    est.method = Method::approximate;
    est.coefficients = o1.transform * w1bar;
    const auto k = pair.target.k();
    est.support.assign(k, false);
    for (Eigen::Index i = 0; i < k; ++i) est.support[i] = std::abs(est.coefficients(i)) > PRUNE;
    est.objective =
        params.lambda1 * (pair.target.response - o1.transformed_design * w1bar).squaredNorm() +
        params.lambda2 * (pair.source.response - o2.transformed_design * w2bar).squaredNorm() +
        penalty + params.lambda4 * p;
    return est;
}

double tlcp_selection_probability(double beta_i, double delta_i, double sigma1, double sigma2,
                                  int n, int m, const TlcpHyperParams& params) {
    if (params.lambda3.size() < 1) throw Error("lambda3 must hold the feature's penalty");
    const auto w = weights_for(params.lambda1, params.lambda2, params.lambda3(0),
                               static_cast<double>(n), static_cast<double>(m));
    return selection_probability_weights(w, params.lambda4, beta_i,
                                         sigma1 / std::sqrt(static_cast<double>(n)),
                                         beta_i + delta_i,
                                         sigma2 / std::sqrt(static_cast<double>(m)));
}

TlcpAnalytics tlcp_mse(const ModelTruth& truth, int n, int m, const TlcpHyperParams& params) {
    const auto k = truth.beta.size();
    if (params.lambda3.size() != k) throw Error("lambda3 length does not match feature count");
    const auto dc = derived_coefficients(params, n, m);
    const double nd = static_cast<double>(n), md = static_cast<double>(m);
    const double s1 = truth.sigma1, s2 = truth.sigma2;

    TlcpAnalytics a;
    a.selection_probability.resize(k);
    a.mse_first_term.resize(k);
    Accumulator total;
    for (Eigen::Index i = 0; i < k; ++i) {
        const auto& w = dc.per_feature[i];
        const double beta = truth.beta(i), delta = truth.delta(i);
        double first, second;
        if (params.lambda1 <= 0.0 && params.lambda2 <= 0.0) {
            first = 0.0;
            second = beta * beta;  // nothing is ever selected
        } else {
            first = w.d1 * w.d1 * (delta * delta + s1 * s1 / nd + s2 * s2 / md) -
                    2.0 * w.d1 * s1 * s1 / nd + s1 * s1 / nd;
            second = mse_second_term(w, beta, delta, s1, s2, nd, md, params.lambda4);
        }
        a.mse_first_term(i) = first;
        total.add(first + second);
        a.selection_probability(i) = selection_probability_weights(
            w, params.lambda4, beta, s1 / std::sqrt(nd), beta + delta, s2 / std::sqrt(md));
    }
    a.mse = total.total();
    a.dominance_region = tlcp_dominance_check(truth, n, m).tags;
    return a;
}

DominanceResult tlcp_dominance_check(const ModelTruth& truth, int n, int m) {
    const double s1sq_n = truth.sigma1 * truth.sigma1 / static_cast<double>(n);
    const double s2sq_m = truth.sigma2 * truth.sigma2 / static_cast<double>(m);
    DominanceResult res;
    res.k_ratio = s1sq_n / (s1sq_n + s2sq_m);
    const double root = std::sqrt(-std::log(std::sqrt(std::numbers::pi) * res.k_ratio / 8.0));
    res.threshold = 2.0 * s1sq_n * (1.0 + root) * (1.0 + root);
    res.tags.reserve(truth.beta.size());
    for (Eigen::Index i = 0; i < truth.beta.size(); ++i)
        res.tags.push_back(truth.beta(i) * truth.beta(i) >= res.threshold ? Dominance::large
                                                                          : Dominance::undetermined);
    return res;
}

DissimilarityEstimate estimate_dissimilarity(const TaskPair& pair) {
    if (pair.source.k() != pair.target.k()) throw Error("task designs have different feature counts");
    const Vector mu_t = least_squares(pair.target.design, pair.target.response);
    const Vector mu_s = least_squares(pair.source.design, pair.source.response);
    DissimilarityEstimate est;
    est.delta_hat = mu_s - mu_t;
    const double target_norm = mu_t.norm();
    if (target_norm < 1e-12) throw ZeroTarget();
    est.relative = est.delta_hat.norm() / target_norm;
    est.tlcp_recommended = est.relative < 3.0;
    return est;
}

double estimate_sigma(const Dataset& data) {
    const auto n = data.n();
    const auto k = data.k();
    if (n <= k) throw InsufficientSamples(n, k);
    const Vector coef = least_squares(data.design, data.response);
    const double rss = (data.response - data.design * coef).squaredNorm();
    return rss / static_cast<double>(n - k);
}

// test hook: exact conditional route for the MSE correction term
double tlcp_mse_second_conditional(const TlcpHyperParams& params, int n, int m, double beta,
                                   double delta, double sigma1, double sigma2) {
    const auto w = weights_for(params.lambda1, params.lambda2, params.lambda3(0),
                               static_cast<double>(n), static_cast<double>(m));
    return mse_second_conditional(w, beta, delta, sigma1, sigma2, static_cast<double>(n),
                                  static_cast<double>(m), params.lambda4);
}

}  // namespace tlcp
