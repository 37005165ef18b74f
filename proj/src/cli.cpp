#include "tlcp/cli.hpp"

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "tlcp/cp.hpp"
#include "tlcp/experiments.hpp"
#include "tlcp/multitask.hpp"
#include "tlcp/transfer.hpp"

namespace tlcp {
namespace {

using nlohmann::json;

constexpr double PRUNE = 1e-4;  // matches the approximate solvers' support threshold

int log_level() {
    const char* v = std::getenv("TLCP_LOG");
    if (!v || !*v) return 1;
    char* end = nullptr;
    const long lvl = std::strtol(v, &end, 10);
    return (end && *end == '\0') ? static_cast<int>(lvl) : 1;
}

void warn(const std::string& msg) {
    if (log_level() >= 1) std::cerr << "warning: " << msg << '\n';
}

void progress(const std::string& msg) {
    if (log_level() >= 2) std::cerr << "info: " << msg << '\n';
}

void emit(const std::string& body, const std::string& path) {
    if (path.empty()) {
        std::cout << body;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open output file: " + path);
    out << body;
}

std::string fmt(double x) { return json(x).dump(); }

json finite_or_tag(double v) {
    if (std::isinf(v)) return json(v > 0 ? "inf" : "-inf");
    return json(v);
}

json vec_json(const Vector& v, bool tag_inf = false) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i)
        arr.push_back(tag_inf ? finite_or_tag(v(i)) : json(v(i)));
    return arr;
}

const char* dominance_name(Dominance d) {
    switch (d) {
        case Dominance::large: return "large";
        case Dominance::small: return "small";
        default: return "undetermined";
    }
}

double response_variance(const Dataset& d) {
    const auto n = d.response.size();
    if (n < 2) throw InsufficientSamples(n, 2);
    const double mean = d.response.mean();
    return (d.response.array() - mean).square().sum() / static_cast<double>(n - 1);
}

// Residual variance when the fit leaves degrees of freedom, otherwise the
// (upward-biased) response variance.
double noise_variance(const Dataset& d, std::vector<std::string>* notes) {
    if (d.n() > d.k()) return estimate_sigma(d);
    if (notes)
        notes->push_back("noise variance fallback: response variance (n <= k leaves no "
                         "residual degrees of freedom)");
    return response_variance(d);
}

OrthogonalizationResult transform_of(const Matrix& x) {
    if (x.rows() >= x.cols()) {
        try {
            return orthogonalize(x);
        } catch (const RankDeficient&) {
        }
    }
    return project_highdim(x);
}

struct Options {
    std::string target, response = "y", out, format = "json";
    std::string criterion = "cp", method = "auto";
    std::vector<std::string> sources;
    double lambda = 0.0, lambda1 = 0.0, lambda2 = 0.0, lambda4 = 0.0;
    std::vector<double> lambda3;
    std::uint64_t seed = 0;
    int replicates = 0;
    int workers = 1;
    std::string scenario;
    std::vector<double> beta, delta;
    double sigma1 = 1.0, sigma2 = 1.0;
    int n = 0, m = 0;
};

struct SetFlags {
    CLI::Option* lambda = nullptr;
    CLI::Option* l1 = nullptr;
    CLI::Option* l2 = nullptr;
    CLI::Option* l3 = nullptr;
    CLI::Option* l4 = nullptr;
    bool has(const CLI::Option* o) const { return o && o->count() > 0; }
};

double criterion_lambda(const Options& opt, const SetFlags& set, double sigma1_sq, long n) {
    if (set.has(set.lambda)) return opt.lambda;
    return opt.criterion == "bic" ? bic_lambda(sigma1_sq, static_cast<int>(n))
                                  : 2.0 * sigma1_sq;
}

struct PathResult {
    Estimate est;
    std::string path;
};

PathResult solve_cp_path(const Dataset& d, double lambda, const std::string& method) {
    if (method == "orthogonal" || method == "auto") {
        try {
            return {solve_orthogonal_cp(d, lambda), "orthogonal"};
        } catch (const NotOrthogonal&) {
            if (method == "orthogonal") throw;
        }
    }
    if (method == "exhaustive" || (method == "auto" && d.k() <= 12 && d.n() > d.k()))
        return {solve_exhaustive_cp(d, lambda), "exhaustive"};
    return {solve_approx_cp(d, lambda), "approximate"};
}

json tuned_json(const TlcpHyperParams& p) {
    json j;
    j["lambda1"] = p.lambda1;
    j["lambda2"] = p.lambda2;
    j["lambda3"] = vec_json(p.lambda3, true);
    j["lambda4"] = p.lambda4;
    return j;
}

void apply_overrides(TlcpHyperParams& params, const Options& opt, const SetFlags& set) {
    if (set.has(set.l1)) params.lambda1 = opt.lambda1;
    if (set.has(set.l2)) params.lambda2 = opt.lambda2;
    if (set.has(set.l3)) {
        if (opt.lambda3.size() == 1)
            params.lambda3.setConstant(opt.lambda3.front());
        else if (static_cast<Eigen::Index>(opt.lambda3.size()) == params.lambda3.size())
            for (Eigen::Index i = 0; i < params.lambda3.size(); ++i)
                params.lambda3(i) = opt.lambda3[static_cast<std::size_t>(i)];
        else
            throw Error("--lambda3 takes one value or one per feature");
    }
    if (set.has(set.l4)) params.lambda4 = opt.lambda4;
}

std::string select_csv(const Dataset& data, const Estimate& est,
                       const std::vector<bool>& selected) {
    std::string out = "feature,coefficient,selected\n";
    for (Eigen::Index i = 0; i < data.k(); ++i) {
        out += data.feature_names[static_cast<std::size_t>(i)] + ',' +
               fmt(est.coefficients(i)) + ',' + (selected[static_cast<std::size_t>(i)] ? "1" : "0") +
               '\n';
    }
    return out;
}

int run_select(const Options& opt, const SetFlags& set) {
    if (opt.sources.size() > 2)
        throw Error("select supports at most two source tasks");
    Dataset target = standardize(load_csv(opt.target, opt.response));
    std::vector<Dataset> sources;
    for (const auto& path : opt.sources)
        sources.push_back(standardize(load_csv(path, opt.response)));

    std::vector<std::string> notes;
    const long n = target.n(), k = target.k();
    const double s1sq = noise_variance(target, &notes);
    const double lambda = criterion_lambda(opt, set, s1sq, n);

    json result;
    result["command"] = "select";
    result["target"] = opt.target;
    result["response"] = opt.response;
    result["criterion"] = opt.criterion;
    result["lambda"] = lambda;
    result["n"] = n;
    result["k"] = k;
    result["sigma1_sq"] = s1sq;

    // dissimilarity gate: keep a source only while transfer is advisable
    struct Kept {
        Dataset data;
        Vector delta_hat;
        double sigma_sq;
    };
    std::vector<Kept> kept;
    json gate = json::array();
    for (std::size_t i = 0; i < sources.size(); ++i) {
        TaskPair probe;
        probe.target = target;
        probe.source = sources[i];
        const auto dis = estimate_dissimilarity(probe);
        gate.push_back({{"source", opt.sources[i]},
                        {"relative", dis.relative},
                        {"transfer_recommended", dis.tlcp_recommended}});
        if (dis.tlcp_recommended) {
            kept.push_back({sources[i], dis.delta_hat, noise_variance(sources[i], nullptr)});
        } else {
            warn("source " + opt.sources[i] + " dropped: relative dissimilarity " +
                 fmt(dis.relative) + " is not below 3");
            notes.push_back("source " + opt.sources[i] +
                            " dropped by the dissimilarity gate (relative " + fmt(dis.relative) +
                            ")");
        }
    }
    if (!sources.empty()) result["dissimilarity"] = gate;

    PathResult solved;
    if (kept.empty()) {
        result["model"] = "cp";
        solved = solve_cp_path(target, lambda, opt.method);
    } else if (kept.size() == 1) {
        result["model"] = "tlcp";
        TaskPair pair;
        pair.target = target;
        pair.source = kept.front().data;
        const double s2 = std::sqrt(kept.front().sigma_sq);
        TlcpHyperParams params;
        bool solved_direct = false;
        if (opt.method != "approximate") {
            params = tune_tlcp(std::sqrt(s1sq), s2, kept.front().delta_hat,
                               static_cast<int>(n), static_cast<int>(pair.source.n()), lambda);
            apply_overrides(params, opt, set);
            if (opt.method == "orthogonal" || opt.method == "auto") {
                try {
                    solved = {solve_orthogonal_tlcp(pair, params).first, "orthogonal"};
                    solved_direct = true;
                } catch (const NotOrthogonal&) {
                    if (opt.method == "orthogonal") throw;
                }
            }
            if (!solved_direct && (opt.method == "exhaustive" ||
                                   (opt.method == "auto" && k <= 10 && n > k))) {
                solved = {solve_exhaustive_tlcp(pair, params).first, "exhaustive"};
                solved_direct = true;
            }
        }
        if (!solved_direct) {
            // approximate path: tune in the shared orthogonalized coordinates
            const auto pt = transform_of(pair.target.design);
            const auto ps = transform_of(pair.source.design);
            const Vector delta_bar = pt.transformed_design.transpose() *
                                     (pair.target.design * kept.front().delta_hat) / pt.scale;
            params = tune_tlcp(std::sqrt(s1sq), s2, delta_bar, static_cast<int>(pt.scale),
                               static_cast<int>(ps.scale), lambda);
            apply_overrides(params, opt, set);
            solved = {solve_approx_tlcp(pair, params), "approximate"};
            notes.push_back("transfer parameters tuned in the orthogonalized coordinates");
        }
        result["tuned"] = tuned_json(params);
    } else {
        result["model"] = "tlcp3";
        const double s2sq = kept[0].sigma_sq, s3sq = kept[1].sigma_sq;
        auto mt = tune_tlcp3({std::sqrt(s1sq), std::sqrt(s2sq), std::sqrt(s3sq)},
                             kept[0].delta_hat, kept[1].delta_hat, static_cast<int>(n),
                             static_cast<int>(kept[0].data.n()),
                             static_cast<int>(kept[1].data.n()));
        if (set.has(set.l4)) mt.lambda_complexity = opt.lambda4;
        if (set.has(set.l1) || set.has(set.l2) || set.has(set.l3))
            warn("--lambda1/--lambda2/--lambda3 overrides apply to the single-source model "
                 "only; ignored here");
        MultiTaskBundle bundle;
        bundle.target = target;
        bundle.sources = {kept[0].data, kept[1].data};
        bundle.weights = mt.weights;
        bundle.gamma = mt.gamma;
        bundle.lambda_complexity = mt.lambda_complexity;
        bool solved_direct = false;
        if (opt.method == "orthogonal" || opt.method == "auto") {
            try {
                solved = {solve_orthogonal_tlcp3(bundle), "orthogonal"};
                solved_direct = true;
            } catch (const NotOrthogonal&) {
                if (opt.method == "orthogonal") throw;
            }
        }
        if (!solved_direct) {
            if (opt.method == "approximate")
                throw Error("no approximate path exists for two source tasks");
            solved = {solve_exhaustive_general(bundle), "exhaustive"};
        }
        json tuned;
        tuned["weights"] = vec_json(mt.weights);
        tuned["gamma"] = vec_json(mt.gamma, true);
        tuned["lambda_complexity"] = mt.lambda_complexity;
        tuned["heuristic"] = mt.heuristic;
        result["tuned"] = tuned;
    }

    // prune: a feature counts as selected when it is in the support and its
    // coefficient survives the reporting threshold
    std::vector<bool> selected(static_cast<std::size_t>(k));
    json features = json::array();
    std::vector<std::string> names;
    for (Eigen::Index i = 0; i < k; ++i) {
        const bool keep = solved.est.support[static_cast<std::size_t>(i)] &&
                          std::abs(solved.est.coefficients(i)) >= PRUNE;
        selected[static_cast<std::size_t>(i)] = keep;
        const auto& name = target.feature_names[static_cast<std::size_t>(i)];
        features.push_back(
            {{"name", name}, {"coefficient", solved.est.coefficients(i)}, {"selected", keep}});
        if (keep) names.push_back(name);
    }
    result["path"] = solved.path;
    result["features"] = features;
    result["selected_features"] = names;
    result["objective"] = solved.est.objective;
    result["notes"] = notes;

    emit(opt.format == "csv" ? select_csv(target, solved.est, selected)
                             : result.dump(2) + "\n",
         opt.out);
    return 0;
}

int run_tune(const Options& opt, const SetFlags& set) {
    if (opt.sources.empty() || opt.sources.size() > 2)
        throw Error("tune needs one or two --source files");
    Dataset target = standardize(load_csv(opt.target, opt.response));
    std::vector<std::string> notes;
    const double s1sq = noise_variance(target, &notes);
    const double lambda = criterion_lambda(opt, set, s1sq, target.n());

    json result;
    result["command"] = "tune";
    result["criterion"] = opt.criterion;
    result["lambda"] = lambda;
    result["sigma1_sq"] = s1sq;
    std::string csv = "parameter,value\n";
    csv += "lambda," + fmt(lambda) + '\n';

    if (opt.sources.size() == 1) {
        Dataset source = standardize(load_csv(opt.sources.front(), opt.response));
        TaskPair pair;
        pair.target = target;
        pair.source = source;
        const auto dis = estimate_dissimilarity(pair);
        const double s2sq = noise_variance(source, nullptr);
        const auto params =
            tune_tlcp(std::sqrt(s1sq), std::sqrt(s2sq), dis.delta_hat,
                      static_cast<int>(target.n()), static_cast<int>(source.n()), lambda);
        result["sigma2_sq"] = s2sq;
        result["relative_dissimilarity"] = dis.relative;
        result["transfer_recommended"] = dis.tlcp_recommended;
        result["tuned"] = tuned_json(params);
        csv += "lambda1," + fmt(params.lambda1) + '\n';
        csv += "lambda2," + fmt(params.lambda2) + '\n';
        std::string l3;
        for (Eigen::Index i = 0; i < params.lambda3.size(); ++i)
            l3 += (i ? ";" : "") + (std::isinf(params.lambda3(i)) ? std::string("inf")
                                                                  : fmt(params.lambda3(i)));
        csv += "lambda3," + l3 + '\n';
        csv += "lambda4," + fmt(params.lambda4) + '\n';
    } else {
        Dataset s2 = standardize(load_csv(opt.sources[0], opt.response));
        Dataset s3 = standardize(load_csv(opt.sources[1], opt.response));
        TaskPair p2, p3;
        p2.target = target;
        p2.source = s2;
        p3.target = target;
        p3.source = s3;
        const auto d2 = estimate_dissimilarity(p2);
        const auto d3 = estimate_dissimilarity(p3);
        const auto mt = tune_tlcp3(
            {std::sqrt(s1sq), std::sqrt(noise_variance(s2, nullptr)),
             std::sqrt(noise_variance(s3, nullptr))},
            d2.delta_hat, d3.delta_hat, static_cast<int>(target.n()),
            static_cast<int>(s2.n()), static_cast<int>(s3.n()));
        json tuned;
        tuned["weights"] = vec_json(mt.weights);
        tuned["gamma"] = vec_json(mt.gamma, true);
        tuned["lambda_complexity"] = mt.lambda_complexity;
        tuned["heuristic"] = mt.heuristic;
        result["tuned"] = tuned;
        for (int t = 0; t < 3; ++t)
            csv += "weight" + std::to_string(t + 1) + ',' + fmt(mt.weights(t)) + '\n';
        std::string g;
        for (Eigen::Index i = 0; i < mt.gamma.size(); ++i)
            g += (i ? ";" : "") +
                 (std::isinf(mt.gamma(i)) ? std::string("inf") : fmt(mt.gamma(i)));
        csv += "gamma," + g + '\n';
        csv += "lambda_complexity," + fmt(mt.lambda_complexity) + '\n';
    }
    result["notes"] = notes;
    emit(opt.format == "csv" ? csv : result.dump(2) + "\n", opt.out);
    return 0;
}

int run_analyze(const Options& opt, const SetFlags& set) {
    ModelTruth truth;
    int n = 0, m = 0;
    std::vector<std::string> names;
    std::vector<std::string> notes;
    bool transfer = false;

    if (!opt.beta.empty()) {
        if (opt.n <= 0) {
            std::cerr << "error: --beta requires --n\n";
            return 1;
        }
        truth.beta = Eigen::Map<const Vector>(opt.beta.data(),
                                              static_cast<Eigen::Index>(opt.beta.size()));
        if (!opt.delta.empty()) {
            if (opt.delta.size() != opt.beta.size())
                throw Error("--delta must have the same length as --beta");
            truth.delta = Eigen::Map<const Vector>(opt.delta.data(),
                                                   static_cast<Eigen::Index>(opt.delta.size()));
            transfer = true;
        } else {
            truth.delta = Vector::Zero(truth.beta.size());
        }
        truth.sigma1 = opt.sigma1;
        truth.sigma2 = opt.sigma2;
        n = opt.n;
        m = opt.m > 0 ? opt.m : opt.n;
        transfer = transfer || opt.m > 0;
        for (Eigen::Index i = 0; i < truth.beta.size(); ++i)
            names.push_back("x" + std::to_string(i + 1));
    } else if (!opt.target.empty()) {
        Dataset target = standardize(load_csv(opt.target, opt.response));
        truth.beta = least_squares(target.design, target.response);
        truth.sigma1 = std::sqrt(noise_variance(target, &notes));
        n = static_cast<int>(target.n());
        names = target.feature_names;
        if (!opt.sources.empty()) {
            Dataset source = standardize(load_csv(opt.sources.front(), opt.response));
            TaskPair pair;
            pair.target = target;
            pair.source = source;
            truth.delta = estimate_dissimilarity(pair).delta_hat;
            truth.sigma2 = std::sqrt(noise_variance(source, nullptr));
            m = static_cast<int>(source.n());
            transfer = true;
        } else {
            truth.delta = Vector::Zero(truth.beta.size());
        }
        notes.push_back("truth taken from least-squares fits of the supplied data");
    } else {
        std::cerr << "error: analyze needs --target or --beta\n";
        return 1;
    }

    const double s1sq = truth.sigma1 * truth.sigma1;
    const double lambda = criterion_lambda(opt, set, s1sq, n);
    const auto cp_view = cp_test_view(lambda, truth.sigma1, n, truth.beta);
    const double cp_total = cp_mse(truth, n, lambda);

    json result;
    result["command"] = "analyze";
    result["n"] = n;
    result["lambda"] = lambda;
    result["sigma1"] = truth.sigma1;
    result["beta"] = vec_json(truth.beta);
    json cp_block;
    cp_block["selection_probability"] = vec_json(cp_view.selection_probability);
    cp_block["mse"] = cp_total;
    cp_block["significance"] = cp_view.significance;
    result["cp"] = cp_block;

    TlcpAnalytics tl;
    TlcpHyperParams params;
    if (transfer) {
        if (m <= 0) m = n;
        params = tune_tlcp(truth.sigma1, truth.sigma2, truth.delta, n, m, lambda);
        apply_overrides(params, opt, set);
        tl = tlcp_mse(truth, n, m, params);
        result["m"] = m;
        result["sigma2"] = truth.sigma2;
        result["delta"] = vec_json(truth.delta);
        json tb;
        tb["selection_probability"] = vec_json(tl.selection_probability);
        tb["mse"] = tl.mse;
        tb["mse_first_term"] = vec_json(tl.mse_first_term);
        json dom = json::array();
        for (const auto d : tl.dominance_region) dom.push_back(dominance_name(d));
        tb["dominance"] = dom;
        tb["tuned"] = tuned_json(params);
        result["tlcp"] = tb;
    }
    result["notes"] = notes;

    if (opt.format == "csv") {
        std::string csv =
            "feature,beta,delta,cp_selection_probability,tlcp_selection_probability,"
            "dominance,cp_mse_total,tlcp_mse_total\n";
        for (Eigen::Index i = 0; i < truth.beta.size(); ++i) {
            csv += names[static_cast<std::size_t>(i)] + ',' + fmt(truth.beta(i)) + ',' +
                   fmt(truth.delta(i)) + ',' + fmt(cp_view.selection_probability(i)) + ',';
            if (transfer) csv += fmt(tl.selection_probability(i));
            csv += ',';
            if (transfer) csv += dominance_name(tl.dominance_region[static_cast<std::size_t>(i)]);
            csv += ',' + fmt(cp_total) + ',';
            if (transfer) csv += fmt(tl.mse);
            csv += '\n';
        }
        emit(csv, opt.out);
    } else {
        emit(result.dump(2) + "\n", opt.out);
    }
    return 0;
}

int run_simulate(const Options& opt) {
    Scenario scenario;
    try {
        scenario = parse_scenario(opt.scenario);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    if (scenario == Scenario::benchmark) {
        std::cerr << "error: the benchmark scenario runs on real data; use the benchmark "
                     "subcommand\n";
        return 1;
    }
    ExperimentConfig config;
    config.scenario = scenario;
    config.seed = opt.seed;
    config.replicates = opt.replicates;
    config.workers = opt.workers;
    const Report report = run_experiment(config);
    progress("scenario " + report.scenario + " finished in " +
             fmt(report.wall_time_seconds) + " s");
    emit(opt.format == "csv" ? report_to_csv(report) : report_to_json(report), opt.out);
    return 0;
}

int run_benchmark_cmd(const Options& opt) {
    if (opt.sources.size() != 1) throw Error("benchmark needs exactly one --source file");
    TaskPair pair;
    pair.target = standardize(load_csv(opt.target, opt.response));
    pair.source = standardize(load_csv(opt.sources.front(), opt.response));
    ExperimentConfig config;
    config.scenario = Scenario::benchmark;
    config.seed = opt.seed;
    config.replicates = opt.replicates;
    config.workers = opt.workers;
    const Report report = run_benchmark(pair, config);
    emit(opt.format == "csv" ? report_to_csv(report) : report_to_json(report), opt.out);
    return 0;
}

}  // namespace

int dispatch(const std::vector<std::string>& args) {
    Options opt;
    SetFlags set;
    CLI::App app{
        "tlcp 1.0.0 — subset selection by penalized least squares, with optional\n"
        "transfer from related tasks. Exit codes: 0 success, 1 usage error, 2 data error.\n"
        "TLCP_LOG={0,1,2} controls diagnostics on the error stream."};
    app.require_subcommand(1);
    app.set_version_flag("--version", "tlcp 1.0.0");

    const auto add_io = [&](CLI::App* cmd, bool need_target) {
        auto* t = cmd->add_option("--target", opt.target, "target-task CSV (header row)");
        if (need_target) t->required();
        cmd->add_option("--response", opt.response, "response column name (default y)");
        cmd->add_option("--out", opt.out, "output file (default: standard output)");
        cmd->add_option("--format", opt.format, "output format")
            ->check(CLI::IsMember({"json", "csv"}));
    };
    const auto add_criterion = [&](CLI::App* cmd) {
        cmd->add_option("--criterion", opt.criterion,
                        "penalty rule: cp = 2 sigma^2, bic = sigma^2 log n")
            ->check(CLI::IsMember({"cp", "bic"}));
        set.lambda = cmd->add_option("--lambda", opt.lambda,
                                     "explicit penalty level (overrides --criterion)");
    };
    const auto add_tlcp_overrides = [&](CLI::App* cmd) {
        set.l1 = cmd->add_option("--lambda1", opt.lambda1, "target loss weight override");
        set.l2 = cmd->add_option("--lambda2", opt.lambda2, "source loss weight override");
        set.l3 = cmd->add_option("--lambda3", opt.lambda3,
                                 "coupling penalty override: one value or one per feature")
                     ->delimiter(',');
        set.l4 = cmd->add_option("--lambda4", opt.lambda4, "complexity penalty override");
    };

    auto* sel = app.add_subcommand(
        "select",
        "end-to-end selection: standardize, gate sources on relative dissimilarity < 3, "
        "pick the solver path by design shape, tune, solve, report");
    add_io(sel, true);
    sel->add_option("--source", opt.sources, "source-task CSV (repeatable, at most 2)");
    add_criterion(sel);
    add_tlcp_overrides(sel);
    sel->add_option("--method", opt.method, "solver path (default auto)")
        ->check(CLI::IsMember({"auto", "orthogonal", "exhaustive", "approximate"}));
    sel->add_option("--seed", opt.seed,
                    "accepted for interface uniformity; select is deterministic");

    auto* tun = app.add_subcommand("tune",
                                   "estimate noise and dissimilarity from data and print "
                                   "the tuned transfer parameters");
    add_io(tun, true);
    tun->add_option("--source", opt.sources, "source-task CSV (1 or 2 required)");
    add_criterion(tun);

    auto* ana = app.add_subcommand("analyze",
                                   "analytic selection probabilities, risk, and dominance "
                                   "tags, from data or from literal --beta/--delta");
    add_io(ana, false);
    ana->add_option("--source", opt.sources, "source-task CSV (optional, first is used)");
    add_criterion(ana);
    add_tlcp_overrides(ana);
    ana->add_option("--beta", opt.beta, "literal target coefficients")->delimiter(',');
    ana->add_option("--delta", opt.delta, "literal source-minus-target shifts")->delimiter(',');
    ana->add_option("--sigma1", opt.sigma1, "target noise std (literal mode)");
    ana->add_option("--sigma2", opt.sigma2, "source noise std (literal mode)");
    ana->add_option("--n", opt.n, "target sample count (literal mode)");
    ana->add_option("--m", opt.m, "source sample count (literal mode)");

    auto* sim = app.add_subcommand("simulate", "run a seeded Monte Carlo scenario");
    sim->add_option("scenario", opt.scenario,
                    "one of: critical_mse, probability_bars, mse_vs_similarity, "
                    "contour_sweep, convergence, highdim_table")
        ->required();
    sim->add_option("--seed", opt.seed, "stream seed (default 0)");
    sim->add_option("--replicates", opt.replicates, "replicates per cell (0 = scenario default)");
    sim->add_option("--workers", opt.workers, "worker threads (results are identical)");
    sim->add_option("--out", opt.out, "output file (default: standard output)");
    sim->add_option("--format", opt.format, "output format")
        ->check(CLI::IsMember({"json", "csv"}));

    auto* ben = app.add_subcommand("benchmark",
                                   "repeated-split comparison of every method on one "
                                   "target/source pair");
    add_io(ben, true);
    ben->add_option("--source", opt.sources, "source-task CSV (exactly 1)");
    ben->add_option("--seed", opt.seed, "split seed (default 0)");
    ben->add_option("--replicates", opt.replicates, "number of splits (0 = 50)");
    ben->add_option("--workers", opt.workers, "worker threads (results are identical)");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (sel->parsed()) return run_select(opt, set);
        if (tun->parsed()) return run_tune(opt, set);
        if (ana->parsed()) return run_analyze(opt, set);
        if (sim->parsed()) return run_simulate(opt);
        if (ben->parsed()) return run_benchmark_cmd(opt);
        std::cerr << "error: no subcommand\n";
        return 1;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace tlcp
