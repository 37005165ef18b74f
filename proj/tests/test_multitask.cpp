#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "tlcp/cp.hpp"
#include "tlcp/foundation.hpp"
#include "tlcp/multitask.hpp"
#include "tlcp/rng.hpp"
#include "tlcp/transfer.hpp"

using namespace tlcp;

namespace {

// One target and two sources with planted per-task shifts, all orthogonal.
MultiTaskBundle synthetic_bundle(const Vector& beta, const Vector& d1, const Vector& d2, int n,
                                 int m2, int m3, std::uint64_t seed) {
    ModelTruth t1;
    t1.beta = beta;
    t1.delta = d1;
    const TaskPair a = gen_synthetic(t1, n, m2, seed);
    ModelTruth t2;
    t2.beta = beta;
    t2.delta = d2;
    const TaskPair b = gen_synthetic(t2, n, m3, seed + 1);

    MultiTaskBundle bundle;
    bundle.target = a.target;
    bundle.sources = {a.source, b.source};
    bundle.weights = Vector::Ones(3);
    bundle.gamma = Vector::Constant(beta.size(), 2.0);
    bundle.lambda_complexity = 2.0;
    return bundle;
}

}  // namespace

TEST_CASE("combining weights sum to one, including the shared limit") {
    for (const double gamma : {0.5, 2.0, 17.0, INF_LAMBDA}) {
        const ThreeTaskWeights w = tlcp3_weights(1.0, 0.7, 1.4, gamma, 20, 25, 30);
        CHECK(std::abs(w.s1 + w.s2 + w.s3 - 1.0) <= 1e-10);
        CHECK(w.s1 > 0.0);
        CHECK(w.s2 > 0.0);
        CHECK(w.s3 > 0.0);
    }

    // infinite coupling with equal weights: sample-size pooling across tasks
    const ThreeTaskWeights pooled = tlcp3_weights(1.0, 1.0, 1.0, INF_LAMBDA, 20, 30, 50);
    CHECK(pooled.s1 == doctest::Approx(0.2).epsilon(1e-10));
    CHECK(pooled.s2 == doctest::Approx(0.3).epsilon(1e-10));
    CHECK(pooled.s3 == doctest::Approx(0.5).epsilon(1e-10));
}

TEST_CASE("closed form requires exactly two sources") {
    const Vector beta = Vector::Constant(2, 0.5);
    MultiTaskBundle bundle = synthetic_bundle(beta, Vector::Zero(2), Vector::Zero(2), 16, 16, 16, 17);
    bundle.sources.pop_back();
    CHECK_THROWS_AS(solve_orthogonal_tlcp3(bundle), WrongSourceCount);
    try {
        solve_orthogonal_tlcp3(bundle);
    } catch (const WrongSourceCount& e) {
        CHECK(e.got == 1);
        CHECK(e.want == 2);
    }
}

TEST_CASE("infinite coupling with identical source data acts like pooling") {
    const Vector beta = (Vector(3) << 1.0, 0.0, 0.45).finished();
    MultiTaskBundle bundle =
        synthetic_bundle(beta, Vector::Zero(3), Vector::Zero(3), 20, 24, 36, 501);
    bundle.gamma = Vector::Constant(3, INF_LAMBDA);

    const Estimate fit = solve_orthogonal_tlcp3(bundle);
    // selected coefficients equal the weight-combined task statistics
    const ThreeTaskWeights w = tlcp3_weights(1.0, 1.0, 1.0, INF_LAMBDA, 20, 24, 36);
    const Vector z = bundle.target.design.transpose() * bundle.target.response / 20.0;
    const Vector h1 = bundle.sources[0].design.transpose() * bundle.sources[0].response / 24.0;
    const Vector h2 = bundle.sources[1].design.transpose() * bundle.sources[1].response / 36.0;
    for (int i = 0; i < 3; ++i) {
        if (!fit.support[i]) continue;
        const double pooled = w.s1 * z(i) + w.s2 * h1(i) + w.s3 * h2(i);
        CHECK(fit.coefficients(i) == doctest::Approx(pooled).epsilon(1e-10));
    }
}

TEST_CASE("closed form matches the general enumerator") {
    Rng rng(89, "mt-oracle");
    int checked = 0;
    for (int trial = 0; trial < 12; ++trial) {
        const int k = 2 + static_cast<int>(rng.next_u64() % 3);  // 2..4
        Vector beta(k), d1(k), d2(k);
        for (int i = 0; i < k; ++i) {
            beta(i) = rng.normal(0.0, 0.6);
            d1(i) = rng.normal(0.0, 0.25);
            d2(i) = rng.normal(0.0, 0.25);
        }
        MultiTaskBundle bundle = synthetic_bundle(beta, d1, d2, 16, 20, 24, 6000 + trial);
        bundle.weights << 0.4 + 1.2 * rng.uniform(), 0.4 + 1.2 * rng.uniform(),
            0.4 + 1.2 * rng.uniform();
        for (int i = 0; i < k; ++i)
            bundle.gamma(i) = (rng.uniform() < 0.2) ? INF_LAMBDA : 0.5 + 3.5 * rng.uniform();
        bundle.lambda_complexity = 0.5 + 2.0 * rng.uniform();

        const Estimate closed = solve_orthogonal_tlcp3(bundle);
        const Estimate brute = solve_exhaustive_general(bundle);
        if (std::abs(closed.objective - brute.objective) <=
            1e-9 * (1.0 + std::abs(brute.objective))) {
            CHECK(closed.support == brute.support);
            CHECK((closed.coefficients - brute.coefficients).cwiseAbs().maxCoeff() <= 1e-8);
            ++checked;
        }
        CHECK(closed.objective <= brute.objective + 1e-9 * (1.0 + std::abs(brute.objective)));
    }
    CHECK(checked >= 10);
}

TEST_CASE("a zero-weight third task reduces to the two-task solver") {
    const Vector beta = (Vector(3) << 0.8, 0.0, -0.4).finished();
    const Vector delta = (Vector(3) << 0.2, 0.1, 0.0).finished();
    ModelTruth t;
    t.beta = beta;
    t.delta = delta;
    const TaskPair pair = gen_synthetic(t, 20, 28, 701);

    MultiTaskBundle bundle;
    bundle.target = pair.target;
    ModelTruth spare;
    spare.beta = beta;
    spare.delta = Vector::Zero(3);
    bundle.sources = {pair.source, gen_synthetic(spare, 20, 24, 703).source};
    bundle.weights.resize(3);
    bundle.weights << 0.9, 1.3, 0.0;
    bundle.gamma = Vector::Constant(3, 2.4);
    bundle.lambda_complexity = 1.7;

    TlcpHyperParams two;
    two.lambda1 = 0.9;
    two.lambda2 = 1.3;
    two.lambda3 = Vector::Constant(3, 2.4);
    two.lambda4 = 1.7;

    const Estimate three = solve_orthogonal_tlcp3(bundle);
    const auto [target, source] = solve_orthogonal_tlcp(pair, two);
    CHECK(three.support == target.support);
    CHECK((three.coefficients - target.coefficients).cwiseAbs().maxCoeff() <= 1e-9);
    (void)source;
}

TEST_CASE("tuning rule for the two-source model") {
    const Vector zero = Vector::Zero(2);
    const MultiTaskParams same = tune_tlcp3({1.0, 1.0, 1.0}, zero, zero, 20, 20, 20);
    CHECK(same.weights(0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.weights(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(same.weights(2) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::isinf(same.gamma(0)));
    CHECK(std::isinf(same.gamma(1)));
    CHECK(same.lambda_complexity == doctest::Approx(2.0).epsilon(1e-9));
    CHECK(same.heuristic);

    // unequal noise levels: each weight is the product of the other two variances
    const MultiTaskParams mixed = tune_tlcp3({1.0, 2.0, 0.5}, zero, zero, 20, 25, 30);
    CHECK(mixed.weights(0) == doctest::Approx(4.0 * 0.25).epsilon(1e-12));
    CHECK(mixed.weights(1) == doctest::Approx(1.0 * 0.25).epsilon(1e-12));
    CHECK(mixed.weights(2) == doctest::Approx(1.0 * 4.0).epsilon(1e-12));

    // finite dissimilarity: gamma_i = 12 prod sigma^2 / (delta1_i + delta2_i)^2
    Vector d1(1), d2(1);
    d1 << 0.3;
    d2 << 0.1;
    const MultiTaskParams far = tune_tlcp3({1.0, 1.0, 1.0}, d1, d2, 20, 20, 20);
    CHECK(far.gamma(0) == doctest::Approx(12.0 / 0.16).epsilon(1e-9));
}

TEST_CASE("general enumerator degenerate task counts") {
    const Vector beta = (Vector(2) << 0.7, 0.1).finished();
    ModelTruth t;
    t.beta = beta;
    t.delta = (Vector(2) << 0.15, 0.0).finished();
    const TaskPair pair = gen_synthetic(t, 16, 20, 811);

    // two tasks: matches the dedicated joint enumerator
    MultiTaskBundle duo;
    duo.target = pair.target;
    duo.sources = {pair.source};
    duo.weights.resize(2);
    duo.weights << 1.1, 0.8;
    duo.gamma = Vector::Constant(2, 3.0);
    duo.lambda_complexity = 1.4;

    TlcpHyperParams params;
    params.lambda1 = 1.1;
    params.lambda2 = 0.8;
    params.lambda3 = Vector::Constant(2, 3.0);
    params.lambda4 = 1.4;

    const Estimate general = solve_exhaustive_general(duo);
    const auto [target, source] = solve_exhaustive_tlcp(pair, params);
    CHECK(general.support == target.support);
    CHECK((general.coefficients - target.coefficients).cwiseAbs().maxCoeff() <= 1e-9);
    CHECK(general.objective == doctest::Approx(target.objective).epsilon(1e-9));
    (void)source;

    // one task: plain subset search at lambda = lambda_complexity / weight
    MultiTaskBundle solo;
    solo.target = pair.target;
    solo.weights = Vector::Constant(1, 2.0);
    solo.gamma = Vector::Constant(2, 1.0);
    solo.lambda_complexity = 3.0;
    const Estimate lone = solve_exhaustive_general(solo);
    const Estimate direct = solve_exhaustive_cp(pair.target, 1.5);
    CHECK(lone.support == direct.support);
    CHECK((lone.coefficients - direct.coefficients).cwiseAbs().maxCoeff() <= 1e-9);

    // empty model objective is the weighted sum of response energies
    MultiTaskBundle heavy = duo;
    heavy.lambda_complexity = 1e9;
    const Estimate empty = solve_exhaustive_general(heavy);
    const double expected = 1.1 * pair.target.response.squaredNorm() +
                            0.8 * pair.source.response.squaredNorm();
    CHECK(empty.support == std::vector<bool>{false, false});
    CHECK(empty.objective == doctest::Approx(expected).epsilon(1e-9));

    // the chosen model never loses to the empty one
    CHECK(general.objective <= expected + 1e-9);
}
