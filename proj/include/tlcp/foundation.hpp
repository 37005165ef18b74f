#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tlcp/errors.hpp"

namespace tlcp {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

struct Dataset {
    Matrix design;                            // n x k
    Vector response;                          // n
    std::vector<std::string> feature_names;   // k labels, header order
    bool standardized = false;

    Eigen::Index n() const { return design.rows(); }
    Eigen::Index k() const { return design.cols(); }
};

// Ground truth driving generators and the analytic formulas.
// delta is the per-feature source-minus-target coefficient shift.
struct ModelTruth {
    Vector beta;
    Vector delta;
    double sigma1 = 1.0;  // target noise std
    double sigma2 = 1.0;  // source noise std
};

struct TaskPair {
    Dataset target;  // n samples
    Dataset source;  // m samples, same k and feature order
};

// transform maps transformed coordinates back to original ones:
// original_coefficients = transform * transformed_coefficients.
// Invariant: transformed_design' * transformed_design = scale * I (max-entry 1e-8).
struct OrthogonalizationResult {
    Matrix transform;           // k x r, invertible when r == k
    Matrix transformed_design;  // n x r
    double scale;               // n on the square path, r on the projection path
};

// CSV with a header row; every non-response column becomes a feature, header order.
// "." decimal separator regardless of locale.
Dataset load_csv(const std::string& path, const std::string& response_column);

// z-scores each non-skipped design column with the (n-1)-divisor sample std.
// The response is left untouched. Idempotent to 1e-12.
Dataset standardize(const Dataset& data, const std::vector<std::string>& skip = {});

// Orthogonal synthetic task pair: designs are Gram-Schmidt-whitened standard
// Gaussian matrices scaled so X'X = nI (target) and m*I (source); responses are
// y = X b + eps, y~ = X~ (b + delta) + eta. Bitwise deterministic in seed.
TaskPair gen_synthetic(const ModelTruth& truth, int n, int m, std::uint64_t seed);

// Gram-Schmidt transform (column order preserved) with scale = n.
// Pivot below 1e-10 of the original column norm raises RankDeficient.
OrthogonalizationResult orthogonalize(const Matrix& design);

// Eigen-decomposition projection for rank-deficient / wide designs: keeps the r
// eigenpairs of X'X above 1e-10 of the largest eigenvalue, scale = r. Columns
// ordered by descending eigenvalue. Accepts square full-rank inputs (r = k).
OrthogonalizationResult project_highdim(const Matrix& design);

// Minimum-norm least squares (pseudo-inverse semantics).
Vector least_squares(const Matrix& design, const Vector& response);

// Sample Pearson correlation of each column against the response.
Vector pearson(const Matrix& design, const Vector& response);

// Shared internal helper: modified Gram-Schmidt with one re-orthogonalization
// pass. Returns orthonormal Q (n x k) and upper-triangular R with X = Q R.
// Throws RankDeficient(j) when column j's pivot falls under rel_tol of its norm.
std::pair<Matrix, Matrix> gram_schmidt(const Matrix& x, double rel_tol = 1e-10);

}  // namespace tlcp
