#pragma once

#include <limits>
#include <utility>
#include <vector>

#include "tlcp/cp.hpp"
#include "tlcp/foundation.hpp"

namespace tlcp {

// Per-feature individual-part penalties use +infinity as the shared-coefficient
// sentinel (v1 = v2 = 0); every closed form below takes the analytic limit there.
constexpr double INF_LAMBDA = std::numeric_limits<double>::infinity();

struct TlcpHyperParams {
    double lambda1 = 1.0;  // target loss weight
    double lambda2 = 1.0;  // source loss weight
    Vector lambda3;        // length k, positive or INF_LAMBDA
    double lambda4 = 0.0;  // complexity penalty
};

// Closed-form weights for one feature. d* mix the two task statistics into the
// estimates, (a,b,c) and (m_cap,n_cap,q_cap) are two equivalent forms of the
// selection quadratic, g feeds the lambda4 tuning rule and (m_bar,n_bar) the MSE
// integrand. g uses lambda1, lambda2 as stand-ins for sigma2^2, sigma1^2 - exact
// at tuned parameters, which is the only place g is consumed.
struct FeatureWeights {
    double d1, d2, d3, d_tilde;
    double a, b, c;
    double m_cap, n_cap, q_cap;
    double g;
    double m_bar, n_bar;  // NaN when m_cap or n_cap is not positive
};

struct DerivedCoefficients {
    std::vector<FeatureWeights> per_feature;
};

enum class Dominance { large, small, undetermined };

struct DominanceResult {
    std::vector<Dominance> tags;
    double threshold;  // squared-coefficient level certifying "large"
    double k_ratio;    // (sigma1^2/n) / (sigma1^2/n + sigma2^2/m)
};

struct TlcpAnalytics {
    Vector selection_probability;
    double mse = 0.0;
    Vector mse_first_term;                  // per-feature always-selected term
    std::vector<Dominance> dominance_region;
};

struct DissimilarityEstimate {
    Vector delta_hat;       // per-feature source-minus-target fitted coefficients
    double relative;        // ||delta_hat|| / ||target fit||
    bool tlcp_recommended;  // relative < 3
};

// Evaluates every closed-form weight; INF_LAMBDA entries use the analytic limits.
DerivedCoefficients derived_coefficients(const TlcpHyperParams& params, int n, int m);

// The explicit tuning rule: lambda1 = sigma2^2, lambda2 = sigma1^2,
// lambda3_i = 4 sigma1^2 sigma2^2 / delta_i^2 (INF_LAMBDA under |delta_i| < 1e-12),
// lambda4 = min_i lambda (2 - q_i*) / (4 sigma1^2 g_i*^2) at the starred weights.
// lambda <= 0 means "use 2 sigma1^2".
TlcpHyperParams tune_tlcp(double sigma1, double sigma2, const Vector& delta, int n, int m,
                          double lambda = 0.0);

// Closed-form orthogonal solver. Per feature: Z = W'y/n, H = W~'y~/m; select iff
// m_cap H^2 + n_cap Z^2 - q_cap H Z > lambda4; target coefficient (1-d1) Z + d1 H,
// source coefficient (1-d2) H + d2 Z, zero in both tasks otherwise. Objectives of
// both returned estimates equal the joint criterion value.
std::pair<Estimate, Estimate> solve_orthogonal_tlcp(const TaskPair& pair,
                                                    const TlcpHyperParams& params);

// Joint-support enumeration; per support the stationarity system in
// (w0, v1, v2) restricted to the support (INF_LAMBDA features drop their v rows).
// Singular restricted systems are skipped and counted in skipped_subsets.
// Guard k <= 20.
std::pair<Estimate, Estimate> solve_exhaustive_tlcp(const TaskPair& pair,
                                                    const TlcpHyperParams& params);

// Orthogonalizes both tasks independently, applies the closed form with the two
// transform scales as effective sample sizes, back-transforms the target vector.
// params.lambda3 must match the transformed dimension (= k for full-rank tall
// designs). Support pruned at 1e-4; the objective is the orthogonalized
// problem's value at the returned point.
Estimate solve_approx_tlcp(const TaskPair& pair, const TlcpHyperParams& params);

// Pr{ m_cap H^2 + n_cap Z^2 - q_cap H Z > lambda4 } for independent
// H ~ N(beta+delta, sigma2^2/m), Z ~ N(beta, sigma1^2/n). Exact 1D reduction:
// adaptive quadrature over z of the conditional normal probability between the
// quadratic's real roots in h (absolute tolerance 1e-8); degenerate shapes
// (lambda2 = 0, lambda1 = 0, lambda3 = INF) use their closed forms.
// params.lambda3 entry 0 is the feature's penalty.
double tlcp_selection_probability(double beta_i, double delta_i, double sigma1, double sigma2,
                                  int n, int m, const TlcpHyperParams& params);

// Per-feature MSE: closed-form first term
// d1^2 (delta^2 + s1^2/n + s2^2/m) - 2 d1 s1^2/n + s1^2/n, plus the bounded 2D
// integral of [beta^2 - (m_bar x + n_bar y + beta)^2] against the rotated
// density over the non-selection ellipse (absolute tolerance 1e-8). Also fills
// selection probabilities and dominance tags.
TlcpAnalytics tlcp_mse(const ModelTruth& truth, int n, int m, const TlcpHyperParams& params);

// Certifies features with beta^2 >= (2 s1^2/n) (1 + sqrt(-ln(sqrt(pi) K / 8)))^2
// as "large" (TLCp dominates Cp there); everything below is "undetermined"
// because the matching small-coefficient constant is non-constructive.
DominanceResult tlcp_dominance_check(const ModelTruth& truth, int n, int m);

// Per-task least-squares fits; delta_hat = source fit - target fit.
DissimilarityEstimate estimate_dissimilarity(const TaskPair& pair);

// Residual variance RSS/(n-k) of the full least-squares fit. Note: returns the
// variance (sigma^2), not the standard deviation.
double estimate_sigma(const Dataset& data);

// Alternate evaluation of the miss-event MSE correction for one feature,
// integrating the source statistic out in closed form conditional on the
// target statistic. Kept as an independent route against tlcp_mse's rotated
// plane quadrature; lambda3(0) holds the feature's coupling strength.
double tlcp_mse_second_conditional(const TlcpHyperParams& params, int n, int m, double beta,
                                   double delta, double sigma1, double sigma2);

}  // namespace tlcp
