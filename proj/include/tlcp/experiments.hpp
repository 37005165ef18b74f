#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "tlcp/foundation.hpp"

namespace tlcp {

enum class Scenario {
    critical_mse,
    probability_bars,
    mse_vs_similarity,
    contour_sweep,
    convergence,
    highdim_table,
    benchmark
};

std::string scenario_name(Scenario s);
Scenario parse_scenario(const std::string& name);

struct ExperimentConfig {
    Scenario scenario = Scenario::critical_mse;
    ModelTruth truth;                              // empty beta -> scenario default
    std::vector<std::pair<int, int>> sample_grid;  // (n,m) pairs; highdim reads (n,k)
    std::vector<double> dissimilarity_grid;        // scenario default when empty
    int replicates = 0;                            // 0 -> scenario default
    std::uint64_t seed = 0;
    std::vector<std::string> methods;              // scenario default when empty
    int workers = 1;
};

struct CellStats {
    double axis1 = 0.0;
    double axis2 = 0.0;
    std::string method;
    double mean_mse = 0.0;
    double std_error = 0.0;
    Vector selection_frequency;  // per feature; empty when untracked
    Vector mean_coefficients;    // per feature; empty when untracked
    double correct_identification = std::numeric_limits<double>::quiet_NaN();
    double unexplained_variance = std::numeric_limits<double>::quiet_NaN();
};

struct Report {
    std::string scenario;
    std::string axis1_name;
    std::string axis2_name;
    std::vector<double> axis1;
    std::vector<double> axis2;
    std::vector<CellStats> cells;
    std::uint64_t seed = 0;
    int replicates = 0;
    std::vector<std::string> notes;
    // informational only; excluded from serialization so identical runs
    // produce identical files
    double wall_time_seconds = 0.0;
    int workers = 1;
};

// Dispatches on config.scenario. The benchmark scenario needs data and must go
// through run_benchmark directly.
Report run_experiment(const ExperimentConfig& config);

// Coefficient MSE of closed-form selection vs plain least squares across a
// sample-size sweep whose truth sits near the selection threshold.
Report run_critical_mse(const ExperimentConfig& config);

// Per-feature selection frequencies and mean coefficients for the
// single-task and transfer solvers across a dissimilarity-norm grid.
Report run_probability_bars(const ExperimentConfig& config);

// (n, relative dissimilarity) grid comparing tuned transfer selection,
// randomly tuned transfer selection, and single-task selection.
Report run_mse_sweep(const ExperimentConfig& config);

// Convergence of the orthogonalized approximation on non-orthogonal designs:
// squared distances to the truth and to the exhaustive solution vs n.
Report run_convergence(const ExperimentConfig& config);

// k >> n regime via projection: least squares, approximate single-task, and
// approximate transfer selection across feature counts and dissimilarities.
Report run_highdim_table(const ExperimentConfig& config);

// Repeated random train/test splits of a real task pair; per-method mean and
// std error of unexplained variance on the held-out fraction.
Report run_benchmark(const TaskPair& pair, const ExperimentConfig& config);

std::string report_to_json(const Report& report);
std::string report_to_csv(const Report& report);
void write_report(const Report& report, const std::string& path, const std::string& format);

}  // namespace tlcp
