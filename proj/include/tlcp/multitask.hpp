#pragma once

#include <array>
#include <vector>

#include "tlcp/transfer.hpp"

namespace tlcp {

// Joint estimation problem: one target task plus any number of source tasks
// sharing the feature space. Task t's coefficients are w_t = alpha0 + v_t and
// the deviations v_t are penalized per feature by gamma.
struct MultiTaskBundle {
    Dataset target;
    std::vector<Dataset> sources;
    Vector weights;                  // per-task loss weights, target first; all >= 0
    Vector gamma;                    // per-feature coupling strength, positive or INF_LAMBDA
    double lambda_complexity = 0.0;  // penalty per selected feature
};

// Tuned parameters for the two-source model.
struct MultiTaskParams {
    Vector weights;  // (lambda1, lambda2, lambda3)
    Vector gamma;    // per feature
    double lambda_complexity = 0.0;
    bool heuristic = true;  // the tuning rule is a conjecture; reports flag it
};

// Per-feature combining weights of the two-source closed form: the target
// coefficient is s1*Z1 + s2*H1 + s3*H2, and s1 + s2 + s3 = 1.
struct ThreeTaskWeights {
    double s1, s2, s3;
};
ThreeTaskWeights tlcp3_weights(double l1, double l2, double l3, double gamma, int n, int m2,
                               int m3);

// Closed-form solver for one target plus exactly two source tasks, all on
// orthogonal designs. Returns the target-task estimate; the objective is the
// full joint value across the three tasks.
Estimate solve_orthogonal_tlcp3(const MultiTaskBundle& bundle);

// Tuning rule for the two-source model: weights from the noise levels, gamma
// from the summed dissimilarities, complexity penalty from the worst feature.
MultiTaskParams tune_tlcp3(const std::array<double, 3>& sigmas, const Vector& delta1,
                           const Vector& delta2, int n, int m2, int m3);

// Joint-support enumeration for any task count (<= 5, k <= 15): solves the
// stationarity system in (alpha0, v_1..v_ell) per support and keeps the best
// penalized objective. Supports whose system is singular are skipped and
// counted in skipped_subsets.
Estimate solve_exhaustive_general(const MultiTaskBundle& bundle);

}  // namespace tlcp
