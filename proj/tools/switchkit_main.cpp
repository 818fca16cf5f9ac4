// switchkit: simulate asymmetric switch processes, compute their analytic
// characteristics, estimate them by Monte Carlo, and recover switching-time
// distributions from expected-value curves.
//
// Exit codes: 0 success, 2 usage/config, 3 numeric/precision, 4 validation.

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "switchkit/switchkit.hpp"

using nlohmann::json;
using namespace switchkit;

namespace {

struct GlobalOptions {
    std::uint64_t seed = 12345;
    int threads = 1;
    int gs_order = kGsDefaultOrder;
    double tail_eps = 1e-4;
};

struct OutputFile {
    std::ofstream file;
    std::ostream* os = &std::cout;

    explicit OutputFile(const std::string& path) {
        if (path != "-") {
            file.open(path);
            if (!file) throw parameter_error("cannot open output file '" + path + "'");
            os = &file;
        }
    }
    std::ostream& stream() { return *os; }
};

json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw parameter_error("cannot open config file '" + path + "'");
    return json::parse(in);  // json::parse_error carries line/byte diagnostics
}

struct RunConfig {
    ProcessSpec spec;
    std::optional<std::uint64_t> seed;
};

RunConfig load_config(const std::string& path) {
    const json j = load_json(path);
    RunConfig cfg;
    cfg.spec = process_spec_from_json(j);
    if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
    return cfg;
}

std::uint64_t effective_seed(const GlobalOptions& g, const RunConfig& cfg, bool seed_flag_given) {
    if (!seed_flag_given && cfg.seed) return *cfg.seed;
    return g.seed;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const parameter_error*>(&e)) return 2;
    if (dynamic_cast<const json::exception*>(&e)) return 2;
    if (dynamic_cast<const monotonicity_error*>(&e) != nullptr ||
        dynamic_cast<const validation_error*>(&e) != nullptr ||
        dynamic_cast<const density_error*>(&e) != nullptr)
        return 4;
    if (dynamic_cast<const error*>(&e)) return 3;
    return 1;
}

// ---------------------------------------------------------------- simulate

int cmd_simulate(const RunConfig& cfg, std::uint64_t seed, double horizon, bool stationary,
                 bool two_sided, std::optional<double> t_min_opt, const std::string& out_path) {
    Rng rng = path_rng(seed, 0);
    Trajectory traj;
    if (stationary) {
        const double t_min = t_min_opt.value_or(-horizon);
        traj = simulate_stationary(cfg.spec, t_min, horizon, rng);
    } else if (two_sided) {
        const double t_min = t_min_opt.value_or(-horizon);
        traj = simulate_two_sided(cfg.spec, t_min, horizon, rng);
    } else {
        traj = simulate_nonstationary(cfg.spec, horizon, rng);
    }
    OutputFile out(out_path);
    write_trajectory_csv(out.stream(), traj);
    return 0;
}

// ---------------------------------------------------------- characteristics

double invert_char(const TransformFn& F, double t, const GlobalOptions& g, bool talbot) {
    return talbot ? invert_talbot(F, t) : invert(F, t, g.gs_order);
}

int cmd_characteristics(const GlobalOptions& g, const RunConfig& cfg, double t_max, int t_points,
                        const std::string& s_grid_arg, bool talbot, const std::string& out_path) {
    const CharacteristicSet cs = build_characteristics(cfg.spec);
    OutputFile out(out_path);
    auto& os = out.stream();

    if (!s_grid_arg.empty()) {
        double lo = 0, hi = 0;
        int n = 0;
        char c1 = 0, c2 = 0;
        std::istringstream iss(s_grid_arg);
        if (!(iss >> lo >> c1 >> hi >> c2 >> n) || c1 != ':' || c2 != ':' || !(lo > 0) || !(hi > lo) || n < 2)
            throw parameter_error("--s-grid wants 'lo:hi:n' with 0 < lo < hi and n >= 2");
        os << "# schema: switchkit/transforms/v1\n";
        os << "s,LE_plus,LE_minus,LP_plus,LP_minus,LPt_plus,LPt_minus,LR\n";
        for (double s : log_spaced(lo, hi, n))
            os << format_double(s) << ',' << format_double(cs.LE_plus(s)) << ','
               << format_double(cs.LE_minus(s)) << ',' << format_double(cs.LP_plus(s)) << ','
               << format_double(cs.LP_minus(s)) << ',' << format_double(cs.LPt_plus(s)) << ','
               << format_double(cs.LPt_minus(s)) << ',' << format_double(cs.LR(s)) << '\n';
        return 0;
    }

    os << "# schema: switchkit/characteristics/v1\n";
    os << "t,E_plus,E_minus,P_plus,P_minus,Pt_plus,Pt_minus,R\n";
    for (double t : linspace(0.0, t_max, t_points)) {
        double ep, em, pp, pm, ptp, ptm, r;
        if (t == 0.0) {
            ep = 1.0;
            em = -1.0;
            pp = 1.0;
            pm = 0.0;
            ptp = 1.0;
            ptm = 0.0;
            r = variance_D(cs.gamma);
        } else {
            ep = invert_char(cs.LE_plus, t, g, talbot);
            em = invert_char(cs.LE_minus, t, g, talbot);
            pp = invert_char(cs.LP_plus, t, g, talbot);
            pm = invert_char(cs.LP_minus, t, g, talbot);
            ptp = invert_char(cs.LPt_plus, t, g, talbot);
            ptm = invert_char(cs.LPt_minus, t, g, talbot);
            r = invert_char(cs.LR, t, g, talbot);
        }
        os << format_double(t) << ',' << format_double(ep) << ',' << format_double(em) << ','
           << format_double(pp) << ',' << format_double(pm) << ',' << format_double(ptp) << ','
           << format_double(ptm) << ',' << format_double(r) << '\n';
    }
    return 0;
}

// ----------------------------------------------------------------- estimate

int cmd_estimate(const GlobalOptions& g, const RunConfig& cfg, std::uint64_t seed,
                 const std::string& kind, long long n_paths, double t_max, int t_points,
                 double base_point, double pmf_t, int k_max, const std::string& out_path) {
    OutputFile out(out_path);
    auto& os = out.stream();
    if (kind == "pmf") {
        const PmfEstimate pmf = estimate_pmf_N(cfg.spec, pmf_t, k_max, n_paths, +1, seed);
        os << "# schema: switchkit/pmf/v1\n";
        os << "k,probability,se,n_paths\n";
        for (std::size_t k = 0; k < pmf.probability.size(); ++k)
            os << k << ',' << format_double(pmf.probability[k]) << ',' << format_double(pmf.se[k])
               << ',' << pmf.n_paths << '\n';
        return 0;
    }

    const auto grid = linspace(0.0, t_max, t_points);
    EstimateTable table;
    if (kind == "E_plus")
        table = estimate_E(cfg.spec, +1, grid, n_paths, seed, g.threads);
    else if (kind == "E_minus")
        table = estimate_E(cfg.spec, -1, grid, n_paths, seed, g.threads);
    else if (kind == "P_plus")
        table = estimate_P(cfg.spec, +1, grid, n_paths, seed, g.threads);
    else if (kind == "P_minus")
        table = estimate_P(cfg.spec, -1, grid, n_paths, seed, g.threads);
    else if (kind == "stationary_mean")
        table = estimate_stationary_mean(cfg.spec, grid, n_paths, seed, g.threads);
    else if (kind == "R") {
        table = estimate_R(cfg.spec, grid, n_paths, base_point, seed, g.threads);
    } else {
        throw parameter_error("unknown estimate kind '" + kind + "'");
    }
    write_estimate_csv(os, table);
    return 0;
}

// ------------------------------------------------------------------ recover

json cm_report_json(const CmReport& rep) {
    return json{{"verdict", to_string(rep.verdict)},
                {"violations", rep.violations.size()},
                {"supported", rep.points_supported},
                {"indeterminate", rep.points_indeterminate}};
}

int cmd_recover(const GlobalOptions& g, const std::string& e_plus_path,
                const std::string& e_minus_path, const std::string& out_dir, int window,
                double eps_noise, const std::string& verdict_path) {
    const auto load_table = [](const std::string& path) {
        std::ifstream in(path);
        if (!in) throw parameter_error("cannot open estimate CSV '" + path + "'");
        return read_estimate_csv(in);
    };
    const EstimateTable tab_p = load_table(e_plus_path);
    const EstimateTable tab_m = load_table(e_minus_path);

    GridFunction ep{tab_p.grid, tab_p.mean, 0.0, tab_p.se};
    GridFunction em{tab_m.grid, tab_m.mean, 0.0, tab_m.se};
    const GridFunction dep = smooth_derivative(tab_p, window);
    const GridFunction dem = smooth_derivative(tab_m, window);

    ValidateOptions vopt;
    vopt.tail_eps = g.tail_eps;
    const PairValidation validation = validate_pair(ep, em, vopt);

    json verdict;
    verdict["limits_ok"] = validation.limits_ok;
    if (!validation.limit_reason.empty()) verdict["limit_reason"] = validation.limit_reason;
    verdict["pair_verdict"] = to_string(validation.verdict);
    verdict["monotone"] = to_string(validation.monotone);
    verdict["gamma"] = validation.gamma;
    verdict["cm_probe"] = json{{"pair_plus", cm_report_json(validation.cm_pair_plus)},
                               {"pair_minus", cm_report_json(validation.cm_pair_minus)},
                               {"divisor_x", cm_report_json(validation.cm_divisor_x)},
                               {"divisor_y", cm_report_json(validation.cm_divisor_y)}};

    const auto write_verdict = [&](int code) {
        OutputFile vf(verdict_path.empty() ? out_dir + "/verdict.json" : verdict_path);
        vf.stream() << verdict.dump(2) << '\n';
        return code;
    };

    ExtractOptions xopt;
    xopt.tail_eps = g.tail_eps;
    if (eps_noise > 0.0) xopt.eps_noise = eps_noise;
    RecoveredPair pair;
    try {
        pair = extract_divisors(ep, em, dep, dem, xopt);
    } catch (const error& e) {
        verdict["extraction_error"] = e.what();
        write_verdict(0);
        throw;
    }

    verdict["alpha"] = pair.alpha;
    verdict["beta"] = pair.beta;
    verdict["alpha_from_integral"] = pair.alpha_from_integral;
    verdict["renorm_factors"] = json{{"f_x", pair.mass_x}, {"f_y", pair.mass_y}};

    {
        std::ofstream fx(out_dir + "/f_x.csv");
        write_grid_csv(fx, pair.f_x, "f_x");
        std::ofstream fy(out_dir + "/f_y.csv");
        write_grid_csv(fy, pair.f_y, "f_y");
        std::ofstream psi(out_dir + "/psi.csv");
        psi << "# schema: switchkit/psi/v1\n";
        psi << "s,psi_plus,psi_minus\n";
        for (double s : log_spaced(std::max(0.1, pair.psi_plus.s_min), 10.0, 33))
            psi << format_double(s) << ',' << format_double(pair.psi_plus(s)) << ','
                << format_double(pair.psi_minus(s)) << '\n';
    }
    return write_verdict(0);
}

// ------------------------------------------------------------------ example

int example_common_divisor(const GlobalOptions& g, double alpha, double divisor_mean,
                           const std::string& out_dir) {
    const SwitchingLaw divisor = make_exponential(divisor_mean);
    const ProcessSpec spec{make_geometric_divisible({divisor, alpha}),
                           make_geometric_divisible({divisor, 1.0 - alpha}), 0.5};
    const CharacteristicSet cs = build_characteristics(spec);
    const double target = -alpha / (1.0 - alpha);

    std::ofstream csv(out_dir + "/common_divisor.csv");
    csv << "# schema: switchkit/example/common_divisor/v1\n";
    csv << "t,E_plus,E_minus,centered_ratio\n";
    double worst = 0.0;
    for (double t : linspace(0.1, 12.0, 120)) {
        const double ep = invert(cs.LE_plus, t, g.gs_order);
        const double em = invert(cs.LE_minus, t, g.gs_order);
        const double ratio = (ep - cs.gamma) / (em - cs.gamma);
        worst = std::max(worst, std::abs(ratio - target));
        csv << format_double(t) << ',' << format_double(ep) << ',' << format_double(em) << ','
            << format_double(ratio) << '\n';
    }
    std::cout << "common_divisor: max |(E+sub tail)/(E-sub tail) - (" << format_double(target)
              << ")| = " << format_double(worst) << " (expected < 1e-4)\n";
    return worst < 1e-4 ? 0 : 3;
}

int example_scaled_common(const GlobalOptions& g, double a, double b, double alpha,
                          double divisor_mean, const std::string& out_dir) {
    const SwitchingLaw divisor = make_exponential(divisor_mean);
    const auto [plus, minus] = make_scaled_common_divisor(a, b, alpha, divisor);
    const ProcessSpec spec{plus, minus, 0.5};
    const CharacteristicSet cs = build_characteristics(spec);
    const double beta = 1.0 - alpha;
    const double denom = a / alpha + b / beta;

    std::ofstream csv(out_dir + "/scaled_common.csv");
    csv << "# schema: switchkit/example/scaled_common/v1\n";
    csv << "t,dE_plus,dE_plus_formula,dE_minus,dE_minus_formula\n";
    double worst = 0.0;
    for (double t : linspace(0.1, 8.0, 80)) {
        const double dep = invert(cs.LEd_plus, t, g.gs_order);
        const double dem = invert(cs.LEd_minus, t, g.gs_order);
        const double dep_formula = -2.0 * (a + b * (1.0 / beta - 1.0)) / denom * divisor.density(t / b) / b;
        const double dem_formula = 2.0 * (b + a * (1.0 / alpha - 1.0)) / denom * divisor.density(t / a) / a;
        worst = std::max({worst, std::abs(dep - dep_formula), std::abs(dem - dem_formula)});
        csv << format_double(t) << ',' << format_double(dep) << ',' << format_double(dep_formula)
            << ',' << format_double(dem) << ',' << format_double(dem_formula) << '\n';
    }

    // the a = b = 1 case collapses onto the plain common-divisor compounds
    const auto [p1, m1] = make_scaled_common_divisor(1.0, 1.0, alpha, divisor);
    const SwitchingLaw gd = make_geometric_divisible({divisor, alpha});
    double degenerate = 0.0;
    for (double s : log_spaced(0.1, 10.0, 17))
        degenerate = std::max(degenerate, std::abs(p1.laplace(s) - gd.laplace(s)));

    std::cout << "scaled_common: max |dE - printed formula| = " << format_double(worst)
              << "; a=b=1 degeneracy gap = " << format_double(degenerate) << "\n";
    return worst < 1e-4 && degenerate < 1e-10 ? 0 : 3;
}

int example_gamma_nonmonotone(const GlobalOptions&, const std::string& out_dir) {
    const ProcessSpec spec{make_gamma(2.0, 2.0), make_gamma(3.0, 1.0), 0.5};
    const CharacteristicSet cs = build_characteristics(spec);
    std::ofstream csv(out_dir + "/gamma_nonmonotone.csv");
    csv << "# schema: switchkit/example/gamma_nonmonotone/v1\n";
    csv << "t,dE_plus,dE_minus\n";
    int sign_changes = 0;
    double prev = 0.0;
    bool have_prev = false;
    std::vector<double> crossings;
    for (double t : linspace(0.05, 20.0, 400)) {
        const double dep = invert_talbot(cs.LEd_plus, t);
        const double dem = invert_talbot(cs.LEd_minus, t);
        if (have_prev && ((prev < 0.0 && dep >= 0.0) || (prev >= 0.0 && dep < 0.0))) {
            ++sign_changes;
            crossings.push_back(t);
        }
        prev = dep;
        have_prev = true;
        csv << format_double(t) << ',' << format_double(dep) << ',' << format_double(dem) << '\n';
    }
    std::cout << "gamma_nonmonotone: dE_plus sign changes on (0,20): " << sign_changes << " at t ~ ";
    for (double c : crossings) std::cout << format_double(c) << ' ';
    std::cout << "\n";
    return sign_changes >= 1 ? 0 : 3;
}

// ----------------------------------------------------------------- pipeline

int cmd_pipeline(const GlobalOptions& g, const RunConfig& cfg, std::uint64_t seed,
                 long long n_paths, double t_max_arg, int t_points, double tol, int window,
                 const std::string& out_path) {
    json verdict;
    std::string stage = "setup";
    try {
        const double mu_sum = cfg.spec.plus.mean + cfg.spec.minus.mean;
        const double t_max = t_max_arg > 0.0 ? t_max_arg : 4.0 * mu_sum;
        const auto grid = linspace(0.0, t_max, t_points);

        stage = "estimate";
        const EstimateTable tab_p = estimate_E(cfg.spec, +1, grid, n_paths, seed, g.threads);
        const EstimateTable tab_m = estimate_E(cfg.spec, -1, grid, n_paths, seed ^ 0x9e3779b9, g.threads);

        stage = "smooth";
        const GridFunction dep = smooth_derivative(tab_p, window);
        const GridFunction dem = smooth_derivative(tab_m, window);
        GridFunction ep{tab_p.grid, tab_p.mean, 0.0, tab_p.se};
        GridFunction em{tab_m.grid, tab_m.mean, 0.0, tab_m.se};

        stage = "recover";
        ExtractOptions xopt;
        xopt.tail_eps = std::max(g.tail_eps, 6.0 / std::sqrt(static_cast<double>(n_paths)));
        const RecoveredPair pair = extract_divisors(ep, em, dep, dem, xopt);

        stage = "rebuild";
        const auto [rplus, rminus] = rebuild_switching_laws(pair);

        stage = "compare";
        double worst = 0.0, worst_s = 0.0;
        for (double s : log_spaced(0.1, 10.0, 33)) {
            const double dp = std::abs(rplus.laplace(s) - cfg.spec.plus.laplace(s));
            const double dm = std::abs(rminus.laplace(s) - cfg.spec.minus.laplace(s));
            if (std::max(dp, dm) > worst) {
                worst = std::max(dp, dm);
                worst_s = s;
            }
        }
        const double alpha_true = cfg.spec.minus.mean / mu_sum;
        const bool pass = worst <= tol && std::abs(pair.alpha - alpha_true) <= 0.02;

        verdict["pass"] = pass;
        verdict["max_transform_error"] = worst;
        verdict["worst_s"] = worst_s;
        verdict["tolerance"] = tol;
        verdict["alpha"] = pair.alpha;
        verdict["alpha_true"] = alpha_true;
        verdict["gamma"] = pair.gamma;
        verdict["n_paths"] = n_paths;
        verdict["renorm_factors"] = json{{"f_x", pair.mass_x}, {"f_y", pair.mass_y}};
        if (!pass && n_paths < 100000)
            verdict["hint"] = "n_paths is small; Monte Carlo noise likely dominates the curves";
        OutputFile out(out_path);
        out.stream() << verdict.dump(2) << '\n';
        return pass ? 0 : 4;
    } catch (const error& e) {
        verdict["pass"] = false;
        verdict["stage"] = stage;
        verdict["error"] = e.what();
        if (n_paths < 100000)
            verdict["hint"] = "n_paths is small; Monte Carlo noise likely dominates the curves";
        OutputFile out(out_path);
        out.stream() << verdict.dump(2) << '\n';
        std::cerr << "pipeline failed at stage '" << stage << "': " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"asymmetric switch process toolkit"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    GlobalOptions g;
    auto* seed_opt = app.add_option("--seed", g.seed, "RNG seed (deterministic outputs per seed)");
    app.add_option("--threads", g.threads, "worker threads for estimation")->check(CLI::PositiveNumber);
    app.add_option("--gs-order", g.gs_order, "Gaver-Stehfest order (even; >18 needs extended precision)");
    app.add_option("--tail-eps", g.tail_eps, "tail convergence threshold for forward transforms");

    // simulate
    auto* sim = app.add_subcommand("simulate", "draw one trajectory and dump it as CSV");
    std::string sim_config, sim_out = "-";
    double sim_horizon = 10.0;
    bool sim_stationary = false, sim_two_sided = false;
    std::optional<double> sim_t_min;
    sim->add_option("--config", sim_config, "process JSON config")->required();
    sim->add_option("--horizon", sim_horizon, "simulation horizon (t_max)")
        ->check(CLI::PositiveNumber);
    sim->add_flag("--stationary", sim_stationary, "simulate the stationary version");
    sim->add_flag("--two-sided", sim_two_sided, "extend the non-stationary process left of zero");
    sim->add_option("--t-min", sim_t_min, "left end of the span (default -horizon)");
    sim->add_option("--out", sim_out, "output file ('-' for stdout)");

    // characteristics
    auto* chr = app.add_subcommand("characteristics", "analytic curves via numerical inversion");
    std::string chr_config, chr_out = "-", chr_sgrid;
    double chr_tmax = 10.0;
    int chr_tpoints = 101;
    bool chr_talbot = false;
    chr->add_option("--config", chr_config)->required();
    chr->add_option("--t-max", chr_tmax)->check(CLI::PositiveNumber);
    chr->add_option("--t-points", chr_tpoints)->check(CLI::Range(2, 1000000));
    chr->add_option("--s-grid", chr_sgrid, "dump transforms on 'lo:hi:n' instead of time curves");
    chr->add_flag("--talbot", chr_talbot, "use deformed-contour inversion (oscillatory originals)");
    chr->add_option("--out", chr_out);

    // estimate
    auto* est = app.add_subcommand("estimate", "Monte Carlo estimates as CSV tables");
    std::string est_config, est_out = "-", est_kind = "E_plus";
    long long est_paths = 100000;
    double est_tmax = 10.0, est_base = 0.0, est_pmf_t = 1.0;
    int est_tpoints = 101, est_kmax = 10;
    est->add_option("--config", est_config)->required();
    est->add_option("--kind", est_kind,
                    "E_plus|E_minus|P_plus|P_minus|R|stationary_mean|pmf");
    est->add_option("--n-paths", est_paths)->check(CLI::PositiveNumber);
    est->add_option("--t-max", est_tmax)->check(CLI::PositiveNumber);
    est->add_option("--t-points", est_tpoints)->check(CLI::Range(2, 1000000));
    est->add_option("--base-point", est_base, "base point u for R");
    est->add_option("--t", est_pmf_t, "time for the pmf kind");
    est->add_option("--k-max", est_kmax, "largest switch count for the pmf kind");
    est->add_option("--out", est_out);

    // recover
    auto* rec = app.add_subcommand("recover", "switching-law recovery from E+ / E- tables");
    std::string rec_ep, rec_em, rec_dir = ".", rec_verdict;
    int rec_window = 9;
    double rec_eps = 0.0;
    rec->add_option("--e-plus", rec_ep, "E_plus estimate CSV")->required();
    rec->add_option("--e-minus", rec_em, "E_minus estimate CSV")->required();
    rec->add_option("--out-dir", rec_dir);
    rec->add_option("--window", rec_window, "smoothing window (odd)");
    rec->add_option("--eps-noise", rec_eps,
                    "monotonicity allowance override (default: 3x propagated SE)");
    rec->add_option("--verdict", rec_verdict, "verdict JSON path (default <out-dir>/verdict.json)");

    // example
    auto* exm = app.add_subcommand("example", "reproduce the worked example families");
    std::string exm_name, exm_dir = ".";
    double exm_a = 1.0, exm_b = 2.0, exm_alpha = 1.0 / 3.0, exm_mean = 1.0;
    exm->add_option("--name", exm_name, "common_divisor|scaled_common|gamma_nonmonotone")->required();
    exm->add_option("--out-dir", exm_dir);
    exm->add_option("--a", exm_a)->check(CLI::PositiveNumber);
    exm->add_option("--b", exm_b)->check(CLI::PositiveNumber);
    exm->add_option("--alpha", exm_alpha);
    exm->add_option("--divisor-mean", exm_mean)->check(CLI::PositiveNumber);

    // pipeline
    auto* pip = app.add_subcommand("pipeline", "simulate -> estimate -> recover -> rebuild -> compare");
    std::string pip_config, pip_out = "-";
    long long pip_paths = 1000000;
    double pip_tmax = 0.0, pip_tol = 5e-2;
    int pip_tpoints = 384, pip_window = 9;
    pip->add_option("--config", pip_config)->required();
    pip->add_option("--n-paths", pip_paths)->check(CLI::PositiveNumber);
    pip->add_option("--t-max", pip_tmax, "estimation horizon (default 4 (mu+ + mu-))");
    pip->add_option("--t-points", pip_tpoints)->check(CLI::Range(64, 1000000));
    pip->add_option("--tol", pip_tol, "pass threshold on the rebuilt transform error");
    pip->add_option("--window", pip_window);
    pip->add_option("--out", pip_out, "verdict JSON ('-' for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (*sim) {
            const RunConfig cfg = load_config(sim_config);
            return cmd_simulate(cfg, effective_seed(g, cfg, seed_opt->count() > 0), sim_horizon,
                                sim_stationary, sim_two_sided, sim_t_min, sim_out);
        }
        if (*chr) {
            const RunConfig cfg = load_config(chr_config);
            return cmd_characteristics(g, cfg, chr_tmax, chr_tpoints, chr_sgrid, chr_talbot, chr_out);
        }
        if (*est) {
            const RunConfig cfg = load_config(est_config);
            return cmd_estimate(g, cfg, effective_seed(g, cfg, seed_opt->count() > 0), est_kind,
                                est_paths, est_tmax, est_tpoints, est_base, est_pmf_t, est_kmax,
                                est_out);
        }
        if (*rec) return cmd_recover(g, rec_ep, rec_em, rec_dir, rec_window, rec_eps, rec_verdict);
        if (*exm) {
            if (exm_name == "common_divisor")
                return example_common_divisor(g, exm_alpha, exm_mean, exm_dir);
            if (exm_name == "scaled_common")
                return example_scaled_common(g, exm_a, exm_b, exm_alpha, exm_mean, exm_dir);
            if (exm_name == "gamma_nonmonotone") return example_gamma_nonmonotone(g, exm_dir);
            throw parameter_error("unknown example '" + exm_name +
                                  "'; choose common_divisor, scaled_common or gamma_nonmonotone");
        }
        if (*pip) {
            const RunConfig cfg = load_config(pip_config);
            return cmd_pipeline(g, cfg, effective_seed(g, cfg, seed_opt->count() > 0), pip_paths,
                                pip_tmax, pip_tpoints, pip_tol, pip_window, pip_out);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
    return 2;
}
