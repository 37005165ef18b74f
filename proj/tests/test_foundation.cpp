#include <cstdio>
#include <fstream>
#include <string>

#include "doctest.h"
#include "tlcp/foundation.hpp"
#include "tlcp/rng.hpp"

using namespace tlcp;

namespace {

std::string write_temp(const std::string& name, const std::string& body) {
    const std::string path = "/tmp/tlcp_test_" + name;
    std::ofstream out(path, std::ios::binary);
    out << body;
    return path;
}

Matrix random_matrix(int n, int k, std::uint64_t seed) {
    Rng rng(seed, "test-design");
    Matrix x(n, k);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < k; ++j) x(i, j) = rng.normal();
    return x;
}

double ortho_residual(const Matrix& x, double scale) {
    Matrix g = x.transpose() * x;
    g.diagonal().array() -= scale;
    return g.cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("load_csv dimensions, header order, and error reporting") {
    const auto path = write_temp("ok.csv", "x1,x2,y\n1,2,3\n4,5,6\n7,8,9\n");
    const Dataset d = load_csv(path, "y");
    CHECK(d.n() == 3);
    CHECK(d.k() == 2);
    REQUIRE(d.feature_names.size() == 2);
    CHECK(d.feature_names[0] == "x1");
    CHECK(d.feature_names[1] == "x2");
    CHECK(d.design(1, 0) == 4.0);
    CHECK(d.response(2) == 9.0);
    CHECK_FALSE(d.standardized);

    const auto blank = write_temp("blank.csv", "x1,x2,y\n1,2,3\n4,,6\n");
    CHECK_THROWS_AS(load_csv(blank, "y"), MissingValue);
    try {
        load_csv(blank, "y");
    } catch (const MissingValue& e) {
        CHECK(e.row == 2);
        CHECK(e.column == "x2");
    }

    CHECK_THROWS_AS(load_csv(path, "z"), UnknownColumn);
    std::remove(path.c_str());
    std::remove(blank.c_str());
}

TEST_CASE("standardize centers, scales, skips, and is idempotent") {
    Dataset d;
    d.design.resize(3, 2);
    d.design << 1.0, 7.0, 2.0, 7.5, 3.0, 9.5;
    d.response.resize(3);
    d.response << 1.0, 2.0, 3.0;
    d.feature_names = {"a", "b"};

    const Dataset z = standardize(d);
    CHECK(z.standardized);
    CHECK(z.design(0, 0) == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(z.design(1, 0) == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(z.design(2, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(z.response(1) == 2.0);  // response untouched

    const Dataset zz = standardize(z);
    CHECK((zz.design - z.design).cwiseAbs().maxCoeff() <= 1e-12);

    Dataset constant = d;
    constant.design.col(1).setConstant(5.0);
    CHECK_THROWS_AS(standardize(constant), DegenerateColumn);
    const Dataset skipped = standardize(constant, {"b"});
    CHECK(skipped.design(0, 1) == 5.0);
}

TEST_CASE("standardize preserves Pearson correlations") {
    Rng rng(11, "pearson-pres");
    Dataset d;
    d.design = random_matrix(40, 3, 11);
    d.response.resize(40);
    for (int i = 0; i < 40; ++i)
        d.response(i) = 0.8 * d.design(i, 0) - 0.3 * d.design(i, 2) + 0.5 * rng.normal();
    d.feature_names = {"a", "b", "c"};
    const Vector before = pearson(d.design, d.response);
    const Dataset z = standardize(d);
    const Vector after = pearson(z.design, z.response);
    CHECK((before - after).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("gen_synthetic meets the orthogonality contract and is deterministic") {
    ModelTruth truth;
    truth.beta.resize(4);
    truth.beta << 1.0, -0.2, 0.0, 0.4;
    truth.delta = Vector::Zero(4);

    const TaskPair p = gen_synthetic(truth, 20, 30, 7);
    CHECK(ortho_residual(p.target.design, 20.0) <= 1e-8);
    CHECK(ortho_residual(p.source.design, 30.0) <= 1e-8);
    CHECK(p.target.n() == 20);
    CHECK(p.source.n() == 30);

    const TaskPair q = gen_synthetic(truth, 20, 30, 7);
    CHECK((p.target.design - q.target.design).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p.target.response - q.target.response).cwiseAbs().maxCoeff() == 0.0);
    CHECK((p.source.response - q.source.response).cwiseAbs().maxCoeff() == 0.0);

    const TaskPair r = gen_synthetic(truth, 20, 30, 8);
    CHECK((p.target.response - r.target.response).cwiseAbs().maxCoeff() > 0.0);

    CHECK_THROWS_AS(gen_synthetic(truth, 3, 30, 7), InsufficientSamples);
}

TEST_CASE("orthogonalize: identity on orthogonal input, rank failure, contract") {
    ModelTruth truth;
    truth.beta = Vector::Zero(5);
    truth.delta = Vector::Zero(5);
    const TaskPair p = gen_synthetic(truth, 24, 24, 3);

    const auto id = orthogonalize(p.target.design);
    CHECK(id.scale == 24.0);
    Matrix eye = id.transform;
    eye.diagonal().array() -= 1.0;
    CHECK(eye.cwiseAbs().maxCoeff() <= 1e-8);

    Matrix dup = random_matrix(20, 6, 5);
    dup.col(4) = dup.col(1);
    CHECK_THROWS_AS(orthogonalize(dup), RankDeficient);
    try {
        orthogonalize(dup);
    } catch (const RankDeficient& e) {
        CHECK(e.rank == 4);  // pivot index where dependence is discovered
    }

    const Matrix x = random_matrix(20, 6, 9);
    const auto res = orthogonalize(x);
    CHECK(ortho_residual(res.transformed_design, res.scale) <= 1e-8);

    // fitted values are transform-invariant
    Rng rng(13, "coef");
    Vector c(6);
    for (int i = 0; i < 6; ++i) c(i) = rng.normal();
    const Vector lhs = x * (res.transform * c);
    const Vector rhs = res.transformed_design * c;
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() <= 1e-10);
}

TEST_CASE("project_highdim handles wide, zero, and square designs") {
    const Matrix wide = random_matrix(30, 60, 21);
    const auto res = project_highdim(wide);
    CHECK(res.scale == 30.0);
    CHECK(res.transform.rows() == 60);
    CHECK(res.transform.cols() == 30);
    CHECK(ortho_residual(res.transformed_design, 30.0) <= 1e-8);

    CHECK_THROWS_AS(project_highdim(Matrix::Zero(10, 20)), ZeroMatrix);

    const Matrix square = random_matrix(8, 8, 33);
    const auto sq = project_highdim(square);
    CHECK(sq.scale == 8.0);
    CHECK(ortho_residual(sq.transformed_design, 8.0) <= 1e-8);
}

TEST_CASE("least_squares: identity, minimum norm, planted recovery, residual orthogonality") {
    Matrix eye = Matrix::Identity(3, 3);
    Vector y(3);
    y << 1.0, 2.0, 3.0;
    CHECK((least_squares(eye, y) - y).cwiseAbs().maxCoeff() <= 1e-12);

    Matrix row(1, 2);
    row << 1.0, 1.0;
    Vector one(1);
    one << 2.0;
    const Vector split = least_squares(row, one);
    CHECK(split(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(split(1) == doctest::Approx(1.0).epsilon(1e-12));

    const Matrix x = random_matrix(50, 4, 17);
    Vector planted(4);
    planted << 0.3, -1.1, 0.0, 2.2;
    const Vector fit = least_squares(x, x * planted);
    CHECK((fit - planted).cwiseAbs().maxCoeff() <= 1e-8);

    Rng rng(19, "noise");
    Vector noisy = x * planted;
    for (int i = 0; i < 50; ++i) noisy(i) += rng.normal();
    const Vector coef = least_squares(x, noisy);
    CHECK((x.transpose() * (noisy - x * coef)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("pearson endpoints") {
    Dataset d;
    d.design = random_matrix(25, 2, 29);
    d.response = d.design.col(0);
    d.design.col(1) = -d.response;
    const Vector r = pearson(d.design, d.response);
    CHECK(r(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r(1) == doctest::Approx(-1.0).epsilon(1e-12));

    // column orthogonal to the centered response
    Matrix design(4, 1);
    design << 1.0, -1.0, 1.0, -1.0;  // zero-mean column
    Vector resp(4);
    resp << 1.0, 1.0, -1.0, -1.0;  // zero-mean, orthogonal to the column
    const Vector z = pearson(design, resp);
    CHECK(std::abs(z(0)) <= 1e-12);
}
