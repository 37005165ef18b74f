#include "tlcp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <mutex>
#include <thread>

#include "json.hpp"

#include "tlcp/baselines.hpp"
#include "tlcp/cp.hpp"
#include "tlcp/numeric.hpp"
#include "tlcp/rng.hpp"
#include "tlcp/transfer.hpp"

namespace tlcp {
namespace {

using nlohmann::json;

ModelTruth base_truth(const ExperimentConfig& config, const Vector& fallback) {
    ModelTruth t = config.truth;
    if (t.beta.size() == 0) t.beta = fallback;
    if (t.delta.size() != t.beta.size()) t.delta = Vector::Zero(t.beta.size());
    return t;
}

std::uint64_t packed_index(int cell, int replicate) {
    return (static_cast<std::uint64_t>(cell) << 32) | static_cast<std::uint32_t>(replicate);
}

std::uint64_t sub_seed(std::uint64_t seed, const char* tag, int cell, int replicate) {
    Rng r(seed, tag, packed_index(cell, replicate));
    return r.next_u64();
}

// Runs body(0..replicates-1), claiming indices from a shared counter. Every
// replicate derives its randomness from its own index, so the schedule cannot
// affect results.
void parallel_for(int replicates, int workers, const std::function<void(int)>& body) {
    if (workers <= 1 || replicates <= 1) {
        for (int r = 0; r < replicates; ++r) body(r);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mutex;
    auto work = [&] {
        for (;;) {
            const int r = next.fetch_add(1);
            if (r >= replicates) return;
            try {
                body(r);
            } catch (...) {
                const std::lock_guard<std::mutex> lock(err_mutex);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    const int count = std::min(workers, replicates);
    pool.reserve(count);
    for (int w = 0; w < count; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
}

double fold_mean(const std::vector<double>& xs) {
    if (xs.empty()) return 0.0;
    Accumulator acc;
    for (const double x : xs) acc.add(x);
    return acc.total() / static_cast<double>(xs.size());
}

double fold_se(const std::vector<double>& xs, double mean) {
    const auto n = xs.size();
    if (n < 2) return 0.0;
    Accumulator acc;
    for (const double x : xs) acc.add((x - mean) * (x - mean));
    return std::sqrt(acc.total() / (static_cast<double>(n - 1) * static_cast<double>(n)));
}

Vector fold_mean_vec(const std::vector<Vector>& vs) {
    if (vs.empty()) return Vector();
    const auto k = vs.front().size();
    Vector out(k);
    for (Eigen::Index i = 0; i < k; ++i) {
        Accumulator acc;
        for (const auto& v : vs) acc.add(v(i));
        out(i) = acc.total() / static_cast<double>(vs.size());
    }
    return out;
}

Vector fold_freq(const std::vector<std::vector<bool>>& sel) {
    if (sel.empty()) return Vector();
    const auto k = sel.front().size();
    Vector out = Vector::Zero(static_cast<Eigen::Index>(k));
    for (const auto& s : sel)
        for (std::size_t i = 0; i < k; ++i)
            if (s[i]) out(static_cast<Eigen::Index>(i)) += 1.0;
    return out / static_cast<double>(sel.size());
}

double correct_count(const std::vector<bool>& support, const Vector& beta) {
    int correct = 0;
    for (Eigen::Index i = 0; i < beta.size(); ++i)
        if (support[static_cast<std::size_t>(i)] == (beta(i) != 0.0)) ++correct;
    return static_cast<double>(correct);
}

Vector unit_direction(Rng& rng, Eigen::Index k) {
    Vector u(k);
    for (Eigen::Index i = 0; i < k; ++i) u(i) = rng.normal();
    const double norm = u.norm();
    if (norm <= 0.0) return Vector::Zero(k);
    return u / norm;
}

bool wants(const ExperimentConfig& config, const char* method) {
    if (config.methods.empty()) return true;
    return std::find(config.methods.begin(), config.methods.end(), std::string(method)) !=
           config.methods.end();
}

CellStats make_cell(double a1, double a2, std::string method, const std::vector<double>& mse) {
    CellStats c;
    c.axis1 = a1;
    c.axis2 = a2;
    c.method = std::move(method);
    c.mean_mse = fold_mean(mse);
    c.std_error = fold_se(mse, c.mean_mse);
    return c;
}

std::string num(double x) { return json(x).dump(); }

std::vector<double> linspace(double lo, double hi, int points) {
    std::vector<double> out;
    out.reserve(points);
    for (int i = 0; i < points; ++i)
        out.push_back(points == 1 ? lo : lo + (hi - lo) * i / (points - 1.0));
    return out;
}

double sample_variance(const Vector& y) {
    const auto n = y.size();
    if (n < 2) return 0.0;
    const double mean = y.mean();
    return (y.array() - mean).square().sum() / static_cast<double>(n - 1);
}

double log_uniform(Rng& rng) { return 1e-2 * std::exp(rng.uniform() * std::log(1e4)); }

}  // namespace

std::string scenario_name(Scenario s) {
    switch (s) {
        case Scenario::critical_mse: return "critical_mse";
        case Scenario::probability_bars: return "probability_bars";
        case Scenario::mse_vs_similarity: return "mse_vs_similarity";
        case Scenario::contour_sweep: return "contour_sweep";
        case Scenario::convergence: return "convergence";
        case Scenario::highdim_table: return "highdim_table";
        case Scenario::benchmark: return "benchmark";
    }
    return "unknown";
}

Scenario parse_scenario(const std::string& name) {
    for (const Scenario s :
         {Scenario::critical_mse, Scenario::probability_bars, Scenario::mse_vs_similarity,
          Scenario::contour_sweep, Scenario::convergence, Scenario::highdim_table,
          Scenario::benchmark})
        if (scenario_name(s) == name) return s;
    throw Error("unknown scenario: " + name);
}

Report run_critical_mse(const ExperimentConfig& config) {
    Vector fallback(6);
    fallback << 1.0, -0.01, 0.2, -0.21, 0.19, 0.02;
    const ModelTruth truth = base_truth(config, fallback);
    const int k = static_cast<int>(truth.beta.size());
    std::vector<int> ns;
    if (!config.sample_grid.empty())
        for (const auto& [n, m] : config.sample_grid) ns.push_back(n);
    else
        for (int n = 10; n <= 100; n += 5) ns.push_back(n);
    const int reps = config.replicates > 0 ? config.replicates : 5000;
    const double lambda = 2.0 * truth.sigma1 * truth.sigma1;

    Report rep;
    rep.scenario = scenario_name(Scenario::critical_mse);
    rep.axis1_name = "n";
    rep.seed = config.seed;
    rep.replicates = reps;
    rep.workers = config.workers;
    for (const int n : ns) rep.axis1.push_back(n);

    for (std::size_t ci = 0; ci < ns.size(); ++ci) {
        const int n = ns[ci];
        std::vector<double> mse_cp(reps), mse_ls(reps), correct(reps);
        std::vector<Vector> coef_cp(reps), coef_ls(reps);
        std::vector<std::vector<bool>> sel(reps);
        parallel_for(reps, config.workers, [&](int r) {
            const auto pair =
                gen_synthetic(truth, n, k, sub_seed(config.seed, "critical", static_cast<int>(ci), r));
            const auto cp = solve_orthogonal_cp(pair.target, lambda);
            const Vector ls = least_squares(pair.target.design, pair.target.response);
            mse_cp[r] = (cp.coefficients - truth.beta).squaredNorm();
            mse_ls[r] = (ls - truth.beta).squaredNorm();
            coef_cp[r] = cp.coefficients;
            coef_ls[r] = ls;
            sel[r] = cp.support;
            correct[r] = correct_count(cp.support, truth.beta);
        });
        if (wants(config, "cp")) {
            CellStats c = make_cell(n, 0.0, "cp", mse_cp);
            c.selection_frequency = fold_freq(sel);
            c.mean_coefficients = fold_mean_vec(coef_cp);
            c.correct_identification = fold_mean(correct);
            rep.cells.push_back(std::move(c));
        }
        if (wants(config, "ls")) {
            CellStats c = make_cell(n, 0.0, "ls", mse_ls);
            c.mean_coefficients = fold_mean_vec(coef_ls);
            rep.cells.push_back(std::move(c));
        }
    }
    return rep;
}

Report run_probability_bars(const ExperimentConfig& config) {
    Vector fallback(6);
    fallback << 1.0, 0.01, 0.005, 0.3, 0.32, 0.08;
    const ModelTruth truth = base_truth(config, fallback);
    const int k = static_cast<int>(truth.beta.size());
    const int n = config.sample_grid.empty() ? 20 : config.sample_grid.front().first;
    const int m = config.sample_grid.empty() ? 20 : config.sample_grid.front().second;
    const std::vector<double> levels =
        config.dissimilarity_grid.empty() ? linspace(0.0, 5.0, 29) : config.dissimilarity_grid;
    const int reps = config.replicates > 0 ? config.replicates : 5000;
    const double lambda = 2.0 * truth.sigma1 * truth.sigma1;

    Report rep;
    rep.scenario = scenario_name(Scenario::probability_bars);
    rep.axis1_name = "dissimilarity_norm";
    rep.axis1 = levels;
    rep.seed = config.seed;
    rep.replicates = reps;
    rep.workers = config.workers;
    rep.notes.push_back(
        "transfer tuning uses the true noise levels and the cell's dissimilarity vector");

    for (std::size_t ci = 0; ci < levels.size(); ++ci) {
        const double level = levels[ci];
        Rng dir(config.seed, "delta-direction", ci);
        ModelTruth cell_truth = truth;
        cell_truth.delta = level > 0.0 ? Vector(level * unit_direction(dir, k)) : Vector::Zero(k);
        const auto params =
            tune_tlcp(truth.sigma1, truth.sigma2, cell_truth.delta, n, m, 0.0);

        std::vector<double> mse_cp(reps), mse_tl(reps), corr_cp(reps), corr_tl(reps);
        std::vector<Vector> coef_cp(reps), coef_tl(reps);
        std::vector<std::vector<bool>> sel_cp(reps), sel_tl(reps);
        parallel_for(reps, config.workers, [&](int r) {
            const auto pair = gen_synthetic(cell_truth, n, m,
                                            sub_seed(config.seed, "bars", static_cast<int>(ci), r));
            const auto cp = solve_orthogonal_cp(pair.target, lambda);
            const auto tl = solve_orthogonal_tlcp(pair, params).first;
            mse_cp[r] = (cp.coefficients - truth.beta).squaredNorm();
            mse_tl[r] = (tl.coefficients - truth.beta).squaredNorm();
            coef_cp[r] = cp.coefficients;
            coef_tl[r] = tl.coefficients;
            sel_cp[r] = cp.support;
            sel_tl[r] = tl.support;
            corr_cp[r] = correct_count(cp.support, truth.beta);
            corr_tl[r] = correct_count(tl.support, truth.beta);
        });
        if (wants(config, "cp")) {
            CellStats c = make_cell(level, 0.0, "cp", mse_cp);
            c.selection_frequency = fold_freq(sel_cp);
            c.mean_coefficients = fold_mean_vec(coef_cp);
            c.correct_identification = fold_mean(corr_cp);
            rep.cells.push_back(std::move(c));
        }
        if (wants(config, "tlcp")) {
            CellStats c = make_cell(level, 0.0, "tlcp", mse_tl);
            c.selection_frequency = fold_freq(sel_tl);
            c.mean_coefficients = fold_mean_vec(coef_tl);
            c.correct_identification = fold_mean(corr_tl);
            rep.cells.push_back(std::move(c));
        }
    }
    return rep;
}

Report run_mse_sweep(const ExperimentConfig& config) {
    const bool contour = config.scenario == Scenario::contour_sweep;
    Vector fallback;
    if (contour) {
        fallback.resize(10);
        fallback << 0.24, 0.01, 0.005, 0.3, 0.32, 0.08, 0.0, 0.26, 0.25, 0.0;
    } else {
        fallback.resize(6);
        fallback << 1.0, 0.01, 0.005, 0.3, 0.32, 0.08;
    }
    const ModelTruth truth = base_truth(config, fallback);
    const int k = static_cast<int>(truth.beta.size());
    std::vector<std::pair<int, int>> grid = config.sample_grid;
    if (grid.empty())
        for (int n = 20; n <= 180; n += 16) grid.emplace_back(n, 20);
    const std::vector<double> rels =
        config.dissimilarity_grid.empty() ? linspace(0.0, 4.0, 11) : config.dissimilarity_grid;
    const int reps = config.replicates > 0 ? config.replicates : 1000;
    const double lambda = 2.0 * truth.sigma1 * truth.sigma1;
    const double beta_norm = truth.beta.norm();

    Report rep;
    rep.scenario = scenario_name(config.scenario);
    rep.axis1_name = "n";
    rep.axis2_name = "relative_dissimilarity";
    for (const auto& [n, m] : grid) rep.axis1.push_back(n);
    rep.axis2 = rels;
    rep.seed = config.seed;
    rep.replicates = reps;
    rep.workers = config.workers;
    rep.notes.push_back(
        "random transfer parameters drawn log-uniformly from [1e-2,1e2], one draw per cell");

    for (std::size_t ni = 0; ni < grid.size(); ++ni) {
        for (std::size_t di = 0; di < rels.size(); ++di) {
            const int ci = static_cast<int>(ni * rels.size() + di);
            const int n = grid[ni].first, m = grid[ni].second;
            const double rel = rels[di];
            Rng dir(config.seed, "sweep-direction", ci);
            ModelTruth cell_truth = truth;
            cell_truth.delta =
                rel > 0.0 ? Vector(rel * beta_norm * unit_direction(dir, k)) : Vector::Zero(k);
            const auto tuned =
                tune_tlcp(truth.sigma1, truth.sigma2, cell_truth.delta, n, m, 0.0);
            Rng rand_src(config.seed, "random-params", ci);
            TlcpHyperParams random;
            random.lambda1 = log_uniform(rand_src);
            random.lambda2 = log_uniform(rand_src);
            random.lambda3.resize(k);
            for (int i = 0; i < k; ++i) random.lambda3(i) = log_uniform(rand_src);
            random.lambda4 = log_uniform(rand_src);

            std::vector<double> mse_cp(reps), mse_tl(reps), mse_rn(reps);
            std::vector<double> corr_cp(reps), corr_tl(reps), corr_rn(reps);
            std::vector<std::vector<bool>> sel_cp(reps), sel_tl(reps);
            parallel_for(reps, config.workers, [&](int r) {
                const auto pair =
                    gen_synthetic(cell_truth, n, m, sub_seed(config.seed, "sweep", ci, r));
                const auto cp = solve_orthogonal_cp(pair.target, lambda);
                const auto tl = solve_orthogonal_tlcp(pair, tuned).first;
                const auto rn = solve_orthogonal_tlcp(pair, random).first;
                mse_cp[r] = (cp.coefficients - truth.beta).squaredNorm();
                mse_tl[r] = (tl.coefficients - truth.beta).squaredNorm();
                mse_rn[r] = (rn.coefficients - truth.beta).squaredNorm();
                corr_cp[r] = correct_count(cp.support, truth.beta);
                corr_tl[r] = correct_count(tl.support, truth.beta);
                corr_rn[r] = correct_count(rn.support, truth.beta);
                sel_cp[r] = cp.support;
                sel_tl[r] = tl.support;
            });
            if (wants(config, "cp")) {
                CellStats c = make_cell(n, rel, "cp", mse_cp);
                c.correct_identification = fold_mean(corr_cp);
                c.selection_frequency = fold_freq(sel_cp);
                rep.cells.push_back(std::move(c));
            }
            if (wants(config, "tlcp")) {
                CellStats c = make_cell(n, rel, "tlcp", mse_tl);
                c.correct_identification = fold_mean(corr_tl);
                c.selection_frequency = fold_freq(sel_tl);
                rep.cells.push_back(std::move(c));
            }
            if (wants(config, "tlcp_random")) {
                CellStats c = make_cell(n, rel, "tlcp_random", mse_rn);
                c.correct_identification = fold_mean(corr_rn);
                rep.cells.push_back(std::move(c));
            }
        }
    }

    // effective sample sizes: first grid n at which a method's mean MSE dips
    // below each contour level, per dissimilarity value
    for (const char* method : {"cp", "tlcp"}) {
        if (!wants(config, method)) continue;
        for (const double rel : rels)
            for (const double level : {0.05, 0.02, 0.01}) {
                int found = -1;
                for (const auto& c : rep.cells)
                    if (c.method == method && c.axis2 == rel && c.mean_mse <= level) {
                        found = static_cast<int>(c.axis1);
                        break;
                    }
                rep.notes.push_back(std::string("effective_n method=") + method +
                                    " dissim=" + num(rel) + " level=" + num(level) + " n=" +
                                    (found >= 0 ? std::to_string(found) : std::string("none")));
            }
    }
    return rep;
}

Report run_convergence(const ExperimentConfig& config) {
    Vector fallback(6);
    fallback << 1.0, 0.01, 0.005, 0.3, 0.32, 0.08;
    const ModelTruth truth = base_truth(config, fallback);
    const int k = static_cast<int>(truth.beta.size());
    if (k > 8) throw TooManyFeatures(k, 8);
    std::vector<int> ns;
    if (!config.sample_grid.empty())
        for (const auto& [n, m] : config.sample_grid) ns.push_back(n);
    else
        for (int n = 32; n <= 4096; n *= 2) ns.push_back(n);
    const int reps = config.replicates > 0 ? config.replicates : 2000;
    const double lambda = 2.0 * truth.sigma1 * truth.sigma1;

    Report rep;
    rep.scenario = scenario_name(Scenario::convergence);
    rep.axis1_name = "n";
    rep.seed = config.seed;
    rep.replicates = reps;
    rep.workers = config.workers;
    for (const int n : ns) rep.axis1.push_back(n);

    std::vector<double> mean_approx;
    for (std::size_t ci = 0; ci < ns.size(); ++ci) {
        const int n = ns[ci];
        std::vector<double> approx_err(reps), exact_err(reps), gap(reps);
        parallel_for(reps, config.workers, [&](int r) {
            const std::uint64_t packed = packed_index(static_cast<int>(ci), r);
            Rng rx(config.seed, "conv-design", packed);
            Rng re(config.seed, "conv-noise", packed);
            Matrix x(n, k);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < k; ++j) x(i, j) = rx.normal();
            Vector y = x * truth.beta;
            for (int i = 0; i < n; ++i) y(i) += truth.sigma1 * re.normal();
            Dataset d;
            d.design = std::move(x);
            d.response = std::move(y);
            const auto approx = solve_approx_cp(d, lambda);
            const auto exact = solve_exhaustive_cp(d, lambda);
            approx_err[r] = (approx.coefficients - truth.beta).squaredNorm();
            exact_err[r] = (exact.coefficients - truth.beta).squaredNorm();
            gap[r] = (approx.coefficients - exact.coefficients).squaredNorm();
        });
        rep.cells.push_back(make_cell(n, 0.0, "approximate", approx_err));
        mean_approx.push_back(rep.cells.back().mean_mse);
        rep.cells.push_back(make_cell(n, 0.0, "exhaustive", exact_err));
        rep.cells.push_back(make_cell(n, 0.0, "difference", gap));
    }

    // least-squares slope of log mean distance vs log n
    if (ns.size() >= 2) {
        Accumulator sx, sy, sxx, sxy;
        for (std::size_t i = 0; i < ns.size(); ++i) {
            const double lx = std::log(static_cast<double>(ns[i]));
            const double ly = std::log(mean_approx[i]);
            sx.add(lx);
            sy.add(ly);
            sxx.add(lx * lx);
            sxy.add(lx * ly);
        }
        const double count = static_cast<double>(ns.size());
        const double slope = (count * sxy.total() - sx.total() * sy.total()) /
                             (count * sxx.total() - sx.total() * sx.total());
        rep.notes.push_back("loglog_slope method=approximate slope=" + num(slope));
    }
    return rep;
}

Report run_highdim_table(const ExperimentConfig& config) {
    std::vector<std::pair<int, int>> grid = config.sample_grid;  // (n, k)
    if (grid.empty()) grid = {{30, 60}, {30, 90}, {30, 300}};
    const std::vector<double> levels = config.dissimilarity_grid.empty()
                                           ? std::vector<double>{0.0, 1.0 / 17.86, 1.0 / 8.93,
                                                                 1.0 / 4.47, 1.0 / 1.98,
                                                                 1.0 / 0.60}
                                           : config.dissimilarity_grid;
    const int reps = config.replicates > 0 ? config.replicates : 5000;
    const double s1 = 1.0, s2 = 1.0;

    Report rep;
    rep.scenario = scenario_name(Scenario::highdim_table);
    rep.axis1_name = "k";
    rep.axis2_name = "dissimilarity_norm";
    for (const auto& [n, kk] : grid) rep.axis1.push_back(kk);
    rep.axis2 = levels;
    rep.seed = config.seed;
    rep.replicates = reps;
    rep.workers = config.workers;
    rep.notes.push_back(
        "truth has 4 nonzero standard-normal entries at positions {1, k/4, k/2, 3k/4} "
        "(1-based), drawn once per k and held fixed");
    rep.notes.push_back("transfer tuning in the projected space is heuristic");

    for (std::size_t gi = 0; gi < grid.size(); ++gi) {
        const int n = grid[gi].first, kk = grid[gi].second;
        Vector beta = Vector::Zero(kk);
        Rng rb(config.seed, "highdim-beta", static_cast<std::uint64_t>(kk));
        for (const int pos : {0, kk / 4, kk / 2, 3 * kk / 4}) beta(pos) = rb.normal();

        for (std::size_t di = 0; di < levels.size(); ++di) {
            const int ci = static_cast<int>(gi * levels.size() + di);
            const double dn = levels[di];
            std::vector<double> mse_ls(reps), mse_cp(reps), mse_tl(reps);
            parallel_for(reps, config.workers, [&](int r) {
                const std::uint64_t packed = packed_index(ci, r);
                Rng rx(config.seed, "highdim-design", packed);
                Rng rd(config.seed, "highdim-delta", packed);
                Rng re1(config.seed, "highdim-noise1", packed);
                Rng re2(config.seed, "highdim-noise2", packed);
                Matrix x(n, kk);
                for (int i = 0; i < n; ++i)
                    for (int j = 0; j < kk; ++j) x(i, j) = rx.normal();
                const Vector delta =
                    dn > 0.0 ? Vector(dn * unit_direction(rd, kk)) : Vector::Zero(kk);
                Vector y1 = x * beta;
                for (int i = 0; i < n; ++i) y1(i) += s1 * re1.normal();
                Vector y2 = x * (beta + delta);
                for (int i = 0; i < n; ++i) y2(i) += s2 * re2.normal();

                mse_ls[r] = (least_squares(x, y1) - beta).squaredNorm();

                Dataset d1, d2;
                d1.design = x;
                d1.response = y1;
                d2.design = x;
                d2.response = y2;
                const auto cp = solve_approx_cp(d1, 2.0 * s1 * s1);
                mse_cp[r] = (cp.coefficients - beta).squaredNorm();

                // tune in the shared projected space, using the true
                // transformed dissimilarity
                const auto proj = project_highdim(x);
                const Vector delta_bar =
                    proj.transformed_design.transpose() * (x * delta) / proj.scale;
                const int eff = static_cast<int>(proj.scale);
                const auto params = tune_tlcp(s1, s2, delta_bar, eff, eff, 0.0);
                TaskPair tp;
                tp.target = d1;
                tp.source = d2;
                const auto tl = solve_approx_tlcp(tp, params);
                mse_tl[r] = (tl.coefficients - beta).squaredNorm();
            });
            if (wants(config, "ls")) rep.cells.push_back(make_cell(kk, dn, "ls", mse_ls));
            if (wants(config, "cp")) rep.cells.push_back(make_cell(kk, dn, "cp", mse_cp));
            if (wants(config, "tlcp")) rep.cells.push_back(make_cell(kk, dn, "tlcp", mse_tl));
        }
    }
    return rep;
}

Report run_benchmark(const TaskPair& pair, const ExperimentConfig& config) {
    const int reps = config.replicates > 0 ? config.replicates : 50;
    const auto n_total = pair.target.n();
    const int k = static_cast<int>(pair.target.k());
    int train_n, test_n;
    if (!config.sample_grid.empty()) {
        train_n = config.sample_grid.front().first;
        test_n = config.sample_grid.front().second;
    } else {
        train_n = static_cast<int>(n_total * 3 / 4);
        test_n = static_cast<int>(n_total) - train_n;
    }
    if (train_n + test_n > static_cast<long>(n_total) || test_n < 2)
        throw InsufficientSamples(static_cast<int>(n_total), train_n + test_n);
    if (train_n <= k) throw InsufficientSamples(train_n, k + 1);

    const double sigma_full = estimate_sigma(pair.target);
    const double var_full = sample_variance(pair.target.response);
    const double sigma2_sq = estimate_sigma(pair.source);
    const int m = static_cast<int>(pair.source.n());

    const std::vector<std::string> all_methods{"ls",         "cp",        "cp_approx",
                                               "tlcp",       "tlcp_approx", "aggregate_cp",
                                               "univariate", "stepwise"};
    std::vector<std::string> methods;
    for (const auto& name : all_methods)
        if (wants(config, name.c_str())) methods.push_back(name);

    std::vector<std::vector<double>> mse(methods.size(), std::vector<double>(reps));
    std::vector<std::vector<double>> uv(methods.size(), std::vector<double>(reps));

    parallel_for(reps, config.workers, [&](int r) {
        Rng rs(config.seed, "bench-split", static_cast<std::uint64_t>(r));
        std::vector<int> perm(n_total);
        for (std::size_t i = 0; i < static_cast<std::size_t>(n_total); ++i)
            perm[i] = static_cast<int>(i);
        for (long i = static_cast<long>(n_total) - 1; i > 0; --i) {
            const long j = static_cast<long>(rs.next_u64() % static_cast<std::uint64_t>(i + 1));
            std::swap(perm[i], perm[j]);
        }
        Dataset train;
        train.design.resize(train_n, k);
        train.response.resize(train_n);
        train.feature_names = pair.target.feature_names;
        train.standardized = pair.target.standardized;
        for (int i = 0; i < train_n; ++i) {
            train.design.row(i) = pair.target.design.row(perm[i]);
            train.response(i) = pair.target.response(perm[i]);
        }
        Matrix xtest(test_n, k);
        Vector ytest(test_n);
        for (int i = 0; i < test_n; ++i) {
            xtest.row(i) = pair.target.design.row(perm[train_n + i]);
            ytest(i) = pair.target.response(perm[train_n + i]);
        }
        const double var_test = sample_variance(ytest);

        const double s1sq = estimate_sigma(train);
        const double lambda = 2.0 * s1sq;
        TaskPair tp;
        tp.target = train;
        tp.source = pair.source;
        const auto dis = estimate_dissimilarity(tp);
        const auto params =
            tune_tlcp(std::sqrt(s1sq), std::sqrt(sigma2_sq), dis.delta_hat, train_n, m, 0.0);

        for (std::size_t mi = 0; mi < methods.size(); ++mi) {
            const auto& name = methods[mi];
            Vector coef;
            if (name == "ls") {
                coef = least_squares(train.design, train.response);
            } else if (name == "cp") {
                coef = (k <= 12 ? solve_exhaustive_cp(train, lambda)
                                : solve_approx_cp(train, lambda))
                           .coefficients;
            } else if (name == "cp_approx") {
                coef = solve_approx_cp(train, lambda).coefficients;
            } else if (name == "tlcp") {
                coef = k <= 10 ? solve_exhaustive_tlcp(tp, params).first.coefficients
                               : solve_approx_tlcp(tp, params).coefficients;
            } else if (name == "tlcp_approx") {
                coef = solve_approx_tlcp(tp, params).coefficients;
            } else if (name == "aggregate_cp") {
                Dataset pooled;
                pooled.design.resize(train_n + pair.source.n(), k);
                pooled.design << train.design, pair.source.design;
                pooled.response.resize(train_n + pair.source.n());
                pooled.response << train.response, pair.source.response;
                coef = (k <= 12 ? solve_exhaustive_cp(pooled, lambda)
                                : solve_approx_cp(pooled, lambda))
                           .coefficients;
            } else if (name == "univariate") {
                BaselineConfig bc;
                bc.method = BaselineMethod::univariate;
                coef = univariate_select(train, bc).coefficients;
            } else {
                BaselineConfig bc;
                bc.method = BaselineMethod::stepwise;
                coef = stepwise(train, bc).coefficients;
            }
            const double test_mse =
                (ytest - xtest * coef).squaredNorm() / static_cast<double>(test_n);
            mse[mi][r] = test_mse;
            uv[mi][r] = var_test > 0.0 ? test_mse / var_test
                                       : std::numeric_limits<double>::quiet_NaN();
        }
    });

    Report rep;
    rep.scenario = scenario_name(Scenario::benchmark);
    rep.axis1_name = "split";
    rep.axis1 = {0.0};
    rep.seed = config.seed;
    rep.replicates = reps;
    rep.workers = config.workers;
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
        CellStats c = make_cell(0.0, 0.0, methods[mi], mse[mi]);
        const double mean_uv = fold_mean(uv[mi]);
        c.unexplained_variance = mean_uv;
        c.std_error = fold_se(uv[mi], mean_uv);  // error bars on the reported ratio
        rep.cells.push_back(std::move(c));
    }
    CellStats ideal;
    ideal.method = "ideal";
    ideal.mean_mse = sigma_full;
    ideal.unexplained_variance = var_full > 0.0 ? sigma_full / var_full
                                                : std::numeric_limits<double>::quiet_NaN();
    rep.cells.push_back(std::move(ideal));
    rep.notes.push_back("ideal row: full-data residual variance over response variance");
    return rep;
}

Report run_experiment(const ExperimentConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    Report rep;
    switch (config.scenario) {
        case Scenario::critical_mse: rep = run_critical_mse(config); break;
        case Scenario::probability_bars: rep = run_probability_bars(config); break;
        case Scenario::mse_vs_similarity:
        case Scenario::contour_sweep: rep = run_mse_sweep(config); break;
        case Scenario::convergence: rep = run_convergence(config); break;
        case Scenario::highdim_table: rep = run_highdim_table(config); break;
        case Scenario::benchmark:
            throw Error("benchmark scenario requires run_benchmark with a task pair");
    }
    rep.wall_time_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep;
}

namespace {

json cell_to_json(const CellStats& c) {
    json j;
    j["axis1"] = c.axis1;
    j["axis2"] = c.axis2;
    j["method"] = c.method;
    j["mean_mse"] = c.mean_mse;
    j["std_error"] = c.std_error;
    if (c.selection_frequency.size() > 0)
        j["selection_frequency"] =
            std::vector<double>(c.selection_frequency.data(),
                                c.selection_frequency.data() + c.selection_frequency.size());
    if (c.mean_coefficients.size() > 0)
        j["mean_coefficients"] =
            std::vector<double>(c.mean_coefficients.data(),
                                c.mean_coefficients.data() + c.mean_coefficients.size());
    if (std::isfinite(c.correct_identification))
        j["correct_identification"] = c.correct_identification;
    if (std::isfinite(c.unexplained_variance))
        j["unexplained_variance"] = c.unexplained_variance;
    return j;
}

std::string join_vector(const Vector& v) {
    std::string out;
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) out += ';';
        out += num(v(i));
    }
    return out;
}

}  // namespace

std::string report_to_json(const Report& report) {
    json j;
    j["scenario"] = report.scenario;
    j["axes"] = {{"axis1_name", report.axis1_name},
                 {"axis1", report.axis1},
                 {"axis2_name", report.axis2_name},
                 {"axis2", report.axis2}};
    json cells = json::array();
    for (const auto& c : report.cells) cells.push_back(cell_to_json(c));
    j["cells"] = std::move(cells);
    j["metadata"] = {
        {"seed", report.seed}, {"replicates", report.replicates}, {"notes", report.notes}};
    return j.dump(2) + "\n";
}

std::string report_to_csv(const Report& report) {
    std::string out =
        "scenario,axis1,axis2,method,mean_mse,std_error,correct_identification,"
        "unexplained_variance,selection_frequency,mean_coefficients\n";
    for (const auto& c : report.cells) {
        out += report.scenario + ',' + num(c.axis1) + ',' + num(c.axis2) + ',' + c.method + ',' +
               num(c.mean_mse) + ',' + num(c.std_error) + ',';
        if (std::isfinite(c.correct_identification)) out += num(c.correct_identification);
        out += ',';
        if (std::isfinite(c.unexplained_variance)) out += num(c.unexplained_variance);
        out += ',';
        out += join_vector(c.selection_frequency);
        out += ',';
        out += join_vector(c.mean_coefficients);
        out += '\n';
    }
    return out;
}

void write_report(const Report& report, const std::string& path, const std::string& format) {
    std::string body;
    if (format == "json")
        body = report_to_json(report);
    else if (format == "csv")
        body = report_to_csv(report);
    else
        throw Error("unknown report format: " + format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    out << body;
}

}  // namespace tlcp
