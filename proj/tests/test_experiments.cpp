#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"
#include "tlcp/cp.hpp"
#include "tlcp/experiments.hpp"
#include "tlcp/foundation.hpp"
#include "tlcp/transfer.hpp"

using namespace tlcp;

namespace {

const CellStats* find_cell(const Report& r, const std::string& method, double axis1,
                           double axis2) {
    for (const auto& c : r.cells)
        if (c.method == method && c.axis1 == axis1 && c.axis2 == axis2) return &c;
    return nullptr;
}

}  // namespace

TEST_CASE("scenario names round-trip") {
    for (const Scenario s :
         {Scenario::critical_mse, Scenario::probability_bars, Scenario::mse_vs_similarity,
          Scenario::contour_sweep, Scenario::convergence, Scenario::highdim_table,
          Scenario::benchmark}) {
        CHECK(parse_scenario(scenario_name(s)) == s);
    }
    CHECK_THROWS_AS(parse_scenario("no_such_scenario"), Error);
}

TEST_CASE("runs are reproducible and worker-count invariant") {
    ExperimentConfig config;
    config.scenario = Scenario::critical_mse;
    config.sample_grid = {{12, 0}, {20, 0}};
    config.replicates = 10;
    config.seed = 99;
    config.workers = 1;
    const Report a = run_experiment(config);
    const Report b = run_experiment(config);
    CHECK(report_to_json(a) == report_to_json(b));

    config.workers = 3;
    const Report c = run_experiment(config);
    CHECK(report_to_json(a) == report_to_json(c));

    // wall time may differ without breaking file identity
    CHECK(a.cells.size() == c.cells.size());
}

TEST_CASE("selection frequencies match the analytic probabilities") {
    ExperimentConfig config;
    config.scenario = Scenario::probability_bars;
    config.dissimilarity_grid = {0.0};
    config.replicates = 4000;
    config.seed = 17;
    const Report r = run_experiment(config);

    const CellStats* cp = find_cell(r, "cp", 0.0, 0.0);
    const CellStats* tl = find_cell(r, "tlcp", 0.0, 0.0);
    REQUIRE(cp != nullptr);
    REQUIRE(tl != nullptr);
    REQUIRE(cp->selection_frequency.size() > 0);
    REQUIRE(tl->selection_frequency.size() == cp->selection_frequency.size());

    // the scenario's default truth; n = m = 20, lambda = 2
    const int n = 20;
    TlcpHyperParams tuned =
        tune_tlcp(1.0, 1.0, Vector::Zero(cp->selection_frequency.size()), n, n, 0.0);
    for (int i = 0; i < cp->selection_frequency.size(); ++i) {
        CHECK(cp->selection_frequency(i) >= 0.0);
        CHECK(cp->selection_frequency(i) <= 1.0);
    }
    CHECK(cp->selection_frequency(0) > 0.95);  // unit coefficient at n = 20
    CHECK(tl->selection_frequency(0) > 0.95);

    // identical tasks: a superfluous feature is kept at the chi-square rate by
    // both solvers (second coefficient of the default truth is 0.01 ~ null)
    CHECK(std::abs(cp->selection_frequency(1) -
                   cp_selection_probability(0.01, 1.0, n, 2.0)) <= 4.0 * 0.006 + 0.005);
    CHECK(std::abs(tl->selection_frequency(1) -
                   tlcp_selection_probability(0.01, 0.0, 1.0, 1.0, n, n, tuned)) <=
          4.0 * 0.006 + 0.005);

    const CellStats* correct = find_cell(r, "cp", 0.0, 0.0);
    CHECK(correct->correct_identification >= 0.0);
    CHECK(correct->correct_identification <= double(cp->selection_frequency.size()));
}

TEST_CASE("held-out benchmark on synthetic data") {
    ModelTruth truth;
    truth.beta = (Vector(5) << 1.0, 0.6, 0.0, 0.0, 0.3).finished();
    truth.delta = Vector::Zero(5);
    const TaskPair raw = gen_synthetic(truth, 60, 60, 303);
    TaskPair pair;
    pair.target = standardize(raw.target);
    pair.source = standardize(raw.source);

    ExperimentConfig config;
    config.scenario = Scenario::benchmark;
    config.replicates = 8;
    config.seed = 5;
    config.workers = 1;
    const Report r = run_benchmark(pair, config);

    bool saw_ideal = false;
    for (const auto& c : r.cells) {
        if (c.method == "ideal") saw_ideal = true;
        CHECK(std::isfinite(c.mean_mse));
        if (c.method != "ideal") CHECK(std::isfinite(c.std_error));
        CHECK(std::isfinite(c.unexplained_variance));
        CHECK(c.unexplained_variance >= 0.0);
    }
    CHECK(saw_ideal);

    config.workers = 3;
    const Report r3 = run_benchmark(pair, config);
    CHECK(report_to_json(r) == report_to_json(r3));
}

TEST_CASE("report serialization") {
    Report r;
    r.scenario = "critical_mse";
    r.axis1_name = "n";
    r.axis2_name = "unused";
    r.axis1 = {10.0, 20.0};
    r.axis2 = {0.0};
    r.seed = 7;
    r.replicates = 3;
    CellStats c;
    c.axis1 = 10.0;
    c.axis2 = 0.0;
    c.method = "cp";
    c.mean_mse = 0.125;
    c.std_error = 0.5;
    r.cells.push_back(c);

    const std::string json = report_to_json(r);
    CHECK(json.find("\"critical_mse\"") != std::string::npos);
    CHECK(json.find("\"cp\"") != std::string::npos);
    CHECK(json.find("0.125") != std::string::npos);
    CHECK(json.find("wall_time") == std::string::npos);
    CHECK(json.find("workers") == std::string::npos);
    CHECK(json.back() == '\n');

    const std::string csv = report_to_csv(r);
    std::istringstream lines(csv);
    std::string header;
    std::getline(lines, header);
    CHECK(header ==
          "scenario,axis1,axis2,method,mean_mse,std_error,correct_identification,"
          "unexplained_variance,selection_frequency,mean_coefficients");
    std::string row;
    std::getline(lines, row);
    CHECK(row.find("critical_mse,10.0,0.0,cp,0.125,0.5") == 0);

    const std::string path = "/tmp/tlcp_test_report.json";
    write_report(r, path, "json");
    std::ifstream in(path, std::ios::binary);
    std::stringstream buf;
    buf << in.rdbuf();
    CHECK(buf.str() == json);
    std::remove(path.c_str());

    CHECK_THROWS_AS(write_report(r, "/tmp/tlcp_test_report.xml", "xml"), Error);
}

TEST_CASE("approximation error shrinks with sample size") {
    ExperimentConfig config;
    config.scenario = Scenario::convergence;
    config.sample_grid = {{32, 0}, {64, 0}, {128, 0}};
    config.replicates = 3;
    config.seed = 23;
    const Report r = run_experiment(config);

    bool slope_note = false;
    for (const auto& note : r.notes)
        if (note.find("loglog_slope") != std::string::npos) slope_note = true;
    CHECK(slope_note);

    double first = 0.0, last = 0.0;
    for (const auto& c : r.cells) {
        if (c.method != "approximate") continue;
        if (c.axis1 == 32.0) first = c.mean_mse;
        if (c.axis1 == 128.0) last = c.mean_mse;
    }
    CHECK(first > 0.0);
    CHECK(last < first);

    ExperimentConfig wide = config;
    wide.truth.beta = Vector::Ones(9);
    wide.truth.delta = Vector::Zero(9);
    CHECK_THROWS_AS(run_experiment(wide), TooManyFeatures);
}

TEST_CASE("projection regime smoke run") {
    ExperimentConfig config;
    config.scenario = Scenario::highdim_table;
    config.sample_grid = {{30, 60}};
    config.dissimilarity_grid = {0.0};
    config.replicates = 3;
    config.seed = 41;
    const Report r = run_experiment(config);

    int finite = 0;
    for (const auto& c : r.cells) {
        CHECK(std::isfinite(c.mean_mse));
        ++finite;
    }
    CHECK(finite == 3);  // least squares, single-task, transfer
}

TEST_CASE("similarity sweep smoke run") {
    ExperimentConfig config;
    config.scenario = Scenario::mse_vs_similarity;
    config.sample_grid = {{20, 20}};
    config.dissimilarity_grid = {0.0, 1.0};
    config.replicates = 4;
    config.seed = 43;
    const Report r = run_experiment(config);
    CHECK(r.cells.size() == 6);  // three methods x two levels

    bool effective_note = false;
    for (const auto& note : r.notes)
        if (note.find("effective_n") != std::string::npos) effective_note = true;
    CHECK(effective_note);
}
