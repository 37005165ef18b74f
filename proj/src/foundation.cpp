#include "tlcp/foundation.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tlcp/rng.hpp"

namespace tlcp {
namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::stringstream ss(line);
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& raw, double& out) {
    const std::string s = trim(raw);
    if (s.empty()) return false;
    const char* first = s.data();
    const char* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last && std::isfinite(out);
}

Matrix gaussian_matrix(Rng& rng, int rows, int cols) {
    Matrix z(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) z(i, j) = rng.normal();
    return z;
}

// One orthogonal design: X = sqrt(n) * Q from a fresh Gaussian base. Retries a
// numerically dependent base up to 3 times before giving up.
Matrix orthogonal_design(std::uint64_t seed, std::string_view tag, int n, int k) {
    for (int attempt = 0; attempt < 3; ++attempt) {
        Rng rng(seed, tag, static_cast<std::uint64_t>(attempt));
        const Matrix z = gaussian_matrix(rng, n, k);
        try {
            const auto [q, r] = gram_schmidt(z);
            return std::sqrt(static_cast<double>(n)) * q;
        } catch (const RankDeficient&) {
            continue;  // astronomically unlikely for Gaussian draws; retry per contract
        }
    }
    throw RankDeficient(0, "random base matrix stayed numerically singular after 3 draws");
}

}  // namespace

std::pair<Matrix, Matrix> gram_schmidt(const Matrix& x, double rel_tol) {
    const Eigen::Index n = x.rows();
    const Eigen::Index k = x.cols();
    Matrix q(n, k);
    Matrix r = Matrix::Zero(k, k);
    for (Eigen::Index j = 0; j < k; ++j) {
        const double col_norm = x.col(j).norm();
        Vector v = x.col(j);
        for (int pass = 0; pass < 2; ++pass) {  // re-orthogonalization pass keeps Q'Q ~ I to machine eps
            for (Eigen::Index i = 0; i < j; ++i) {
                const double proj = q.col(i).dot(v);
                v -= proj * q.col(i);
                r(i, j) += proj;
            }
        }
        const double pivot = v.norm();
        if (pivot < rel_tol * col_norm || col_norm == 0.0)
            throw RankDeficient(static_cast<long>(j));
        r(j, j) = pivot;
        q.col(j) = v / pivot;
    }
    return {q, r};
}

Dataset load_csv(const std::string& path, const std::string& response_column) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw Error("empty file: " + path);
    std::vector<std::string> header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    long response_idx = -1;
    for (std::size_t i = 0; i < header.size(); ++i)
        if (header[i] == response_column) response_idx = static_cast<long>(i);
    if (response_idx < 0) throw UnknownColumn(response_column);

    std::vector<std::vector<double>> rows;
    long row_no = 0;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        ++row_no;
        auto cells = split_csv_line(line);
        std::vector<double> row(header.size());
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c >= cells.size() || !parse_double(cells[c], row[c]))
                throw MissingValue(row_no, header[c]);
        }
        rows.push_back(std::move(row));
    }

    Dataset data;
    const long n = static_cast<long>(rows.size());
    const long k = static_cast<long>(header.size()) - 1;
    data.design.resize(n, k);
    data.response.resize(n);
    for (std::size_t i = 0; i < header.size(); ++i)
        if (static_cast<long>(i) != response_idx) data.feature_names.push_back(header[i]);
    for (long i = 0; i < n; ++i) {
        long col = 0;
        for (long c = 0; c < static_cast<long>(header.size()); ++c) {
            if (c == response_idx)
                data.response(i) = rows[i][c];
            else
                data.design(i, col++) = rows[i][c];
        }
    }
    return data;
}

Dataset standardize(const Dataset& data, const std::vector<std::string>& skip) {
    Dataset out = data;
    const Eigen::Index n = data.n();
    if (n < 2) throw InsufficientSamples(n, 1);
    for (Eigen::Index j = 0; j < data.k(); ++j) {
        const std::string& name = data.feature_names.empty() ? "" : data.feature_names[j];
        if (std::find(skip.begin(), skip.end(), name) != skip.end()) continue;
        const double mean = data.design.col(j).mean();
        const double sd =
            std::sqrt((data.design.col(j).array() - mean).square().sum() / static_cast<double>(n - 1));
        if (sd < 1e-12 * std::max(1.0, std::abs(mean)))
            throw DegenerateColumn(name.empty() ? "column " + std::to_string(j) : name);
        out.design.col(j) = (data.design.col(j).array() - mean) / sd;
    }
    out.standardized = true;
    return out;
}

TaskPair gen_synthetic(const ModelTruth& truth, int n, int m, std::uint64_t seed) {
    const int k = static_cast<int>(truth.beta.size());
    if (truth.delta.size() != k) throw Error("beta and delta lengths differ");
    if (n < k) throw InsufficientSamples(n, k - 1);
    if (m < k) throw InsufficientSamples(m, k - 1);

    TaskPair pair;
    pair.target.design = orthogonal_design(seed, "gen-target", n, k);
    pair.source.design = orthogonal_design(seed, "gen-source", m, k);

    Rng eps(seed, "gen-target-noise");
    Rng eta(seed, "gen-source-noise");
    pair.target.response = pair.target.design * truth.beta;
    for (int i = 0; i < n; ++i) pair.target.response(i) += eps.normal(0.0, truth.sigma1);
    pair.source.response = pair.source.design * (truth.beta + truth.delta);
    for (int i = 0; i < m; ++i) pair.source.response(i) += eta.normal(0.0, truth.sigma2);

    for (int j = 0; j < k; ++j) {
        pair.target.feature_names.push_back("x" + std::to_string(j + 1));
        pair.source.feature_names.push_back("x" + std::to_string(j + 1));
    }
    return pair;
}

OrthogonalizationResult orthogonalize(const Matrix& design) {
    const auto n = design.rows();
    const auto [q, r] = gram_schmidt(design);
    const double root_n = std::sqrt(static_cast<double>(n));

    OrthogonalizationResult res;
    // X = Q R  =>  X * (sqrt(n) R^-1) = sqrt(n) Q, whose Gram matrix is n I.
    res.transform = root_n * r.triangularView<Eigen::Upper>().solve(Matrix::Identity(r.rows(), r.cols()));
    res.transformed_design = root_n * q;
    res.scale = static_cast<double>(n);
    return res;
}

OrthogonalizationResult project_highdim(const Matrix& design) {
    const auto n = design.rows();
    const auto k = design.cols();

    // Eigen-decompose the smaller Gram matrix; nonzero spectra coincide.
    Matrix vectors;          // k x r eigenvectors of X'X, descending eigenvalue
    std::vector<double> eigenvalues;
    if (k <= n) {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(design.transpose() * design);
        const Vector& vals = eig.eigenvalues();  // ascending
        const double max_val = vals(k - 1);
        if (!(max_val > 0.0)) throw ZeroMatrix();
        const double cutoff = 1e-10 * max_val;
        std::vector<Eigen::Index> keep;
        for (Eigen::Index j = k - 1; j >= 0; --j)
            if (vals(j) > cutoff) keep.push_back(j);
        vectors.resize(k, static_cast<Eigen::Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c) {
            vectors.col(static_cast<Eigen::Index>(c)) = eig.eigenvectors().col(keep[c]);
            eigenvalues.push_back(vals(keep[c]));
        }
    } else {
        Eigen::SelfAdjointEigenSolver<Matrix> eig(design * design.transpose());
        const Vector& vals = eig.eigenvalues();
        const double max_val = vals(n - 1);
        if (!(max_val > 0.0)) throw ZeroMatrix();
        const double cutoff = 1e-10 * max_val;
        std::vector<Eigen::Index> keep;
        for (Eigen::Index j = n - 1; j >= 0; --j)
            if (vals(j) > cutoff) keep.push_back(j);
        vectors.resize(k, static_cast<Eigen::Index>(keep.size()));
        for (std::size_t c = 0; c < keep.size(); ++c) {
            // right singular vector from the left one: v = X'u / sqrt(lambda)
            vectors.col(static_cast<Eigen::Index>(c)) =
                design.transpose() * eig.eigenvectors().col(keep[c]) / std::sqrt(vals(keep[c]));
            eigenvalues.push_back(vals(keep[c]));
        }
    }

    const auto r = vectors.cols();
    OrthogonalizationResult res;
    res.transform.resize(k, r);
    const double root_r = std::sqrt(static_cast<double>(r));
    for (Eigen::Index j = 0; j < r; ++j)
        res.transform.col(j) = vectors.col(j) * (root_r / std::sqrt(eigenvalues[j]));
    res.transformed_design = design * res.transform;
    res.scale = static_cast<double>(r);
    return res;
}

Vector least_squares(const Matrix& design, const Vector& response) {
    if (design.rows() != response.size()) throw Error("design/response row mismatch");
    Eigen::CompleteOrthogonalDecomposition<Matrix> cod(design);
    return cod.solve(response);
}

Vector pearson(const Matrix& design, const Vector& response) {
    const auto n = design.rows();
    if (n < 2) throw InsufficientSamples(n, 1);
    const double y_mean = response.mean();
    const Vector yc = response.array() - y_mean;
    const double y_ss = yc.squaredNorm();
    if (y_ss <= 0.0) throw DegenerateColumn("<response>");

    Vector r(design.cols());
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
        const double x_mean = design.col(j).mean();
        const Vector xc = design.col(j).array() - x_mean;
        const double x_ss = xc.squaredNorm();
        if (x_ss <= 0.0) throw DegenerateColumn("column " + std::to_string(j));
        r(j) = std::clamp(xc.dot(yc) / std::sqrt(x_ss * y_ss), -1.0, 1.0);
    }
    return r;
}

}  // namespace tlcp
