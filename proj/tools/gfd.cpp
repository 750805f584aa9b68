#include <CLI11.hpp>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "gfd/dimension_law.hpp"
#include "gfd/optimizer.hpp"
#include "gfd/prebasis.hpp"
#include "gfd/risks.hpp"
#include "gfd/verify.hpp"

namespace {

struct ExperimentConfig {
    std::string experiment;
    std::string config_file;
    std::uint64_t seed = 1;
    int iterations = 200;
    double step = 0.6;
    std::string law_kind = "shifted_poisson";
    double law_param = 100.0;
    double c = 2.0;
    std::string lambda_kind = "tail";
    double nu = 2.5;
    double eta = 20.0;
    int max_centers = 0;  // pre-assemble the Gram this far (0 = grow on demand)
    unsigned interior_nodes = 1u << 14;
    unsigned boundary_nodes = 1u << 11;
    unsigned gram_nodes = 1u << 14;
    unsigned error_nodes = 1u << 12;
    std::string out_dir = "out";
    int grid = 101;
    int log_every = 1;
    std::string gram_cache;
};

gfd::DimensionLaw make_law(const ExperimentConfig& cfg) {
    if (cfg.law_kind == "shifted_poisson") return gfd::DimensionLaw::shifted_poisson(cfg.law_param);
    if (cfg.law_kind == "geometric") return gfd::DimensionLaw::geometric(cfg.law_param);
    if (cfg.law_kind == "deterministic")
        return gfd::DimensionLaw::deterministic(static_cast<int>(cfg.law_param));
    throw gfd::ConfigError("unknown law kind: " + cfg.law_kind);
}

gfd::PreconditionSchedule make_schedule(const ExperimentConfig& cfg) {
    if (cfg.lambda_kind == "tail") return gfd::PreconditionSchedule::tail_ceil(cfg.c);
    if (cfg.lambda_kind == "unit") {
        auto s = gfd::PreconditionSchedule::tail_ceil(cfg.c);
        s.lambda_kind = gfd::PreconditionSchedule::Lambda::Unit;
        return s;
    }
    throw gfd::ConfigError("unknown lambda kind: " + cfg.lambda_kind);
}

void add_common_flags(CLI::App* sub, ExperimentConfig& cfg) {
    sub->add_option("--seed", cfg.seed, "RNG seed");
    sub->add_option("--iterations", cfg.iterations, "number of descent iterations");
    sub->add_option("--step", cfg.step, "constant step size");
    sub->add_option("--law", cfg.law_kind, "dimension law: shifted_poisson | geometric");
    sub->add_option("--law-param", cfg.law_param, "law parameter (rate or q)");
    sub->add_option("--c", cfg.c, "sample-size divisor in M_k = ceil(k/c)");
    sub->add_option("--lambda", cfg.lambda_kind, "preconditioner: tail | unit");
    sub->add_option("--nu", cfg.nu, "kernel smoothness");
    sub->add_option("--eta", cfg.eta, "kernel bandwidth");
    sub->add_option("--max-centers", cfg.max_centers, "pre-assemble the Gram to this size");
    sub->add_option("--interior-nodes", cfg.interior_nodes, "interior quadrature nodes");
    sub->add_option("--boundary-nodes", cfg.boundary_nodes, "per-face boundary nodes");
    sub->add_option("--gram-nodes", cfg.gram_nodes, "quadrature nodes for the Gram matrix");
    sub->add_option("--error-nodes", cfg.error_nodes, "quadrature nodes for error metrics");
    sub->add_option("--out", cfg.out_dir, "output directory");
    sub->add_option("--grid", cfg.grid, "grid resolution for solution dumps");
    sub->add_option("--log-every", cfg.log_every, "cadence of the error metric column");
    sub->add_option("--gram-cache", cfg.gram_cache, "Gram cache file to load/save");
    sub->add_option("--config", cfg.config_file, "key=value config file; flags override");
}

// Plain key=value config file; lines starting with # are comments. Keys match
// the long flag names. Values given on the command line win.
void apply_config_file(const CLI::App* sub, ExperimentConfig& cfg) {
    if (cfg.config_file.empty()) return;
    std::ifstream in(cfg.config_file);
    if (!in) throw gfd::ConfigError("cannot open config file " + cfg.config_file);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto start = line.find_first_not_of(" \t");
        if (start == std::string::npos || line[start] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw gfd::ConfigError("config line " + std::to_string(lineno) + ": expected key=value");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t\r");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (sub->count("--" + key) > 0) continue;  // flag overrides
        try {
            if (key == "seed") cfg.seed = std::stoull(val);
            else if (key == "iterations") cfg.iterations = std::stoi(val);
            else if (key == "step") cfg.step = std::stod(val);
            else if (key == "law") cfg.law_kind = val;
            else if (key == "law-param") cfg.law_param = std::stod(val);
            else if (key == "c") cfg.c = std::stod(val);
            else if (key == "lambda") cfg.lambda_kind = val;
            else if (key == "nu") cfg.nu = std::stod(val);
            else if (key == "eta") cfg.eta = std::stod(val);
            else if (key == "max-centers") cfg.max_centers = std::stoi(val);
            else if (key == "interior-nodes") cfg.interior_nodes = std::stoul(val);
            else if (key == "boundary-nodes") cfg.boundary_nodes = std::stoul(val);
            else if (key == "gram-nodes") cfg.gram_nodes = std::stoul(val);
            else if (key == "error-nodes") cfg.error_nodes = std::stoul(val);
            else if (key == "out") cfg.out_dir = val;
            else if (key == "grid") cfg.grid = std::stoi(val);
            else if (key == "log-every") cfg.log_every = std::stoi(val);
            else if (key == "gram-cache") cfg.gram_cache = val;
            else throw gfd::ConfigError("config line " + std::to_string(lineno) +
                                        ": unknown key " + key);
        } catch (const std::invalid_argument&) {
            throw gfd::ConfigError("config line " + std::to_string(lineno) + ": bad value for " +
                                   key);
        }
    }
}

void validate(const ExperimentConfig& cfg) {
    if (cfg.iterations < 1 || cfg.step <= 0.0 || cfg.c <= 0.0 || cfg.law_param <= 0.0 ||
        cfg.nu <= 0.0 || cfg.eta <= 0.0 || cfg.grid < 2 || cfg.log_every < 1 ||
        cfg.interior_nodes < 1 || cfg.boundary_nodes < 1 || cfg.gram_nodes < 1 ||
        cfg.error_nodes < 1)
        throw gfd::ConfigError("all numeric config fields must be positive");
    if (cfg.lambda_kind != "tail" && cfg.lambda_kind != "unit")
        throw gfd::ConfigError("lambda must be tail or unit");
}

void write_meta(const ExperimentConfig& cfg, double runtime_sec, int exit_code) {
    std::ofstream out(cfg.out_dir + "/meta.txt");
    out.precision(17);
    out << "experiment=" << cfg.experiment << "\n"
        << "seed=" << cfg.seed << "\n"
        << "iterations=" << cfg.iterations << "\n"
        << "step=" << cfg.step << "\n"
        << "law=" << cfg.law_kind << "\n"
        << "law-param=" << cfg.law_param << "\n"
        << "c=" << cfg.c << "\n"
        << "lambda=" << cfg.lambda_kind << "\n"
        << "nu=" << cfg.nu << "\n"
        << "eta=" << cfg.eta << "\n"
        << "max-centers=" << cfg.max_centers << "\n"
        << "interior-nodes=" << cfg.interior_nodes << "\n"
        << "boundary-nodes=" << cfg.boundary_nodes << "\n"
        << "gram-nodes=" << cfg.gram_nodes << "\n"
        << "error-nodes=" << cfg.error_nodes << "\n"
        << "grid=" << cfg.grid << "\n"
        << "log-every=" << cfg.log_every << "\n"
        << "gram-cache=" << cfg.gram_cache << "\n"
        << "runtime-seconds=" << runtime_sec << "\n"
        << "exit-code=" << exit_code << "\n";
}

void write_solution_grid(const ExperimentConfig& cfg, const gfd::PreBasisExpansion& h,
                         const gfd::BoxDomain& dom) {
    std::ofstream out(cfg.out_dir + "/solution.csv");
    out.precision(17);
    out << "t,x,u\n";
    for (int i = 0; i < cfg.grid; ++i) {
        const double t = dom.lower[0] + (dom.upper[0] - dom.lower[0]) * i / (cfg.grid - 1);
        for (int j = 0; j < cfg.grid; ++j) {
            const double x = dom.lower[1] + (dom.upper[1] - dom.lower[1]) * j / (cfg.grid - 1);
            out << t << "," << x << "," << gfd::evaluate(h, {t, x}) << "\n";
        }
    }
}

int run_heat(ExperimentConfig cfg) {
    validate(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    gfd::PreBasis pb(gfd::MaternParams{cfg.nu, cfg.eta}, gfd::HeatRisk::make_domain(1.0), 2,
                     cfg.gram_nodes);
    if (!cfg.gram_cache.empty() && std::filesystem::exists(cfg.gram_cache))
        pb.load_gram_cache(cfg.gram_cache);
    if (cfg.max_centers > 0) pb.ensure(cfg.max_centers);

    gfd::HeatRisk risk(&pb, 1.0, cfg.interior_nodes, cfg.boundary_nodes);
    const gfd::DimensionLaw law = make_law(cfg);
    const gfd::PreconditionSchedule sched = make_schedule(cfg);

    const gfd::Quadrature errq = gfd::interior_quadrature(pb.domain(), cfg.error_nodes);
    const double exact_norm =
        gfd::l2_distance(gfd::PreBasisExpansion(&pb), gfd::HeatRisk::exact_solution, errq);
    auto rel_l2 = [&](const gfd::PreBasisExpansion& h) {
        return gfd::l2_distance(h, gfd::HeatRisk::exact_solution, errq) / exact_norm;
    };

    gfd::GfdConfig gcfg;
    gcfg.iterations = cfg.iterations;
    gcfg.step = cfg.step;
    gcfg.seed = cfg.seed;
    gcfg.log_every = cfg.log_every;
    const gfd::RunRecord rec = gfd::run_descent(risk, pb, law, sched, gcfg, rel_l2);

    {
        std::ofstream out(cfg.out_dir + "/curve.csv");
        out.precision(17);
        out << "n,risk,l2_error_to_exact,k_sampled,grad_norm\n";
        for (const auto& row : rec.rows)
            out << row.n << "," << row.risk << "," << row.extra << "," << row.k << ","
                << row.grad_norm << "\n";
    }
    write_solution_grid(cfg, rec.final_iterate, pb.domain());
    if (!cfg.gram_cache.empty()) pb.save_gram_cache(cfg.gram_cache);

    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int code = rec.diverged ? 2 : 0;
    write_meta(cfg, dt, code);
    std::cout << (rec.diverged ? "diverged at iteration " + std::to_string(rec.abort_iteration)
                               : "completed " + std::to_string(cfg.iterations) + " iterations")
              << "\n";
    return code;
}

int run_hjb(ExperimentConfig cfg) {
    validate(cfg);
    std::filesystem::create_directories(cfg.out_dir);
    const auto t0 = std::chrono::steady_clock::now();

    const gfd::HjbParams hp;
    gfd::PreBasis pb(gfd::MaternParams{cfg.nu, cfg.eta}, gfd::HjbRisk::make_domain(hp), 1,
                     cfg.gram_nodes);
    if (!cfg.gram_cache.empty() && std::filesystem::exists(cfg.gram_cache))
        pb.load_gram_cache(cfg.gram_cache);
    if (cfg.max_centers > 0) pb.ensure(cfg.max_centers);

    gfd::HjbRisk risk(&pb, hp, cfg.interior_nodes, cfg.boundary_nodes);
    const gfd::DimensionLaw law = make_law(cfg);
    const gfd::PreconditionSchedule sched = make_schedule(cfg);

    auto terminal = [&](const gfd::PreBasisExpansion& h) { return risk.terminal_error(h); };

    gfd::GfdConfig gcfg;
    gcfg.iterations = cfg.iterations;
    gcfg.step = cfg.step;
    gcfg.seed = cfg.seed;
    gcfg.log_every = cfg.log_every;
    const gfd::RunRecord rec = gfd::run_descent(risk, pb, law, sched, gcfg, terminal);

    {
        std::ofstream out(cfg.out_dir + "/curve.csv");
        out.precision(17);
        out << "n,risk,terminal_error,k_sampled\n";
        for (const auto& row : rec.rows)
            out << row.n << "," << row.risk << "," << row.extra << "," << row.k << "\n";
    }
    write_solution_grid(cfg, rec.final_iterate, pb.domain());
    {
        std::ofstream out(cfg.out_dir + "/control.csv");
        out.precision(17);
        out << "t,x,c_star\n";
        const gfd::BoxDomain& dom = pb.domain();
        for (int i = 0; i < cfg.grid; ++i) {
            const double t = dom.lower[0] + (dom.upper[0] - dom.lower[0]) * i / (cfg.grid - 1);
            for (int j = 0; j < cfg.grid; ++j) {
                const double x =
                    dom.lower[1] + (dom.upper[1] - dom.lower[1]) * j / (cfg.grid - 1);
                out << t << "," << x << "," << risk.optimal_control(rec.final_iterate, t, x)
                    << "\n";
            }
        }
    }
    if (!cfg.gram_cache.empty()) pb.save_gram_cache(cfg.gram_cache);

    const double dt = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const int code = rec.diverged ? 2 : 0;
    write_meta(cfg, dt, code);
    std::cout << (rec.diverged ? "diverged at iteration " + std::to_string(rec.abort_iteration)
                               : "completed " + std::to_string(cfg.iterations) + " iterations")
              << "\n";
    return code;
}

int run_verify(const ExperimentConfig& cfg, const gfd::VerifyOptions& opt) {
    std::filesystem::create_directories(cfg.out_dir);
    const auto rows = gfd::run_all_checks(opt);
    std::ofstream out(cfg.out_dir + "/checks.csv");
    out.precision(17);
    out << "check,statistic,threshold,pass\n";
    bool all_pass = true;
    for (const auto& row : rows) {
        out << row.name << "," << row.statistic << "," << row.threshold << ","
            << (row.pass ? "pass" : "fail") << "\n";
        std::cout << (row.pass ? "PASS " : "FAIL ") << row.name << " statistic=" << row.statistic
                  << " threshold=" << row.threshold << "\n";
        all_pass = all_pass && row.pass;
    }
    return all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"random gradient-free descent for PDE residual risks"};
    app.require_subcommand(1);

    ExperimentConfig heat_cfg;
    heat_cfg.experiment = "heat";
    heat_cfg.out_dir = "out-heat";
    CLI::App* heat = app.add_subcommand("heat", "heat-equation experiment");
    add_common_flags(heat, heat_cfg);

    ExperimentConfig hjb_cfg;
    hjb_cfg.experiment = "hjb";
    hjb_cfg.iterations = 300;
    hjb_cfg.step = 0.2;
    hjb_cfg.c = 1.5;
    hjb_cfg.nu = 1.5;
    hjb_cfg.out_dir = "out-hjb";
    CLI::App* hjb = app.add_subcommand("hjb", "Hamilton-Jacobi-Bellman experiment");
    add_common_flags(hjb, hjb_cfg);

    ExperimentConfig ver_cfg;
    ver_cfg.experiment = "verify";
    ver_cfg.out_dir = "out-verify";
    gfd::VerifyOptions opt;
    CLI::App* ver = app.add_subcommand("verify", "estimator and substrate check suite");
    ver->add_option("--seed", opt.seed, "RNG seed");
    std::string ver_lambda = "tail";
    ver->add_option("--lambda", ver_lambda, "tail | unit (unit is a negative control)");
    ver->add_option("--out", ver_cfg.out_dir, "output directory");
    ver->add_option("--unbiased-replicates", opt.unbiased_replicates, "");
    ver->add_option("--moment-replicates", opt.moment_replicates, "");
    ver->add_option("--bound-replicates", opt.bound_replicates, "");
    ver->add_option("--rate-replicates", opt.rate_replicates, "");
    ver->add_option("--fourth-moment-samples", opt.fourth_moment_samples, "");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        if (heat->parsed()) {
            apply_config_file(heat, heat_cfg);
            return run_heat(heat_cfg);
        }
        if (hjb->parsed()) {
            apply_config_file(hjb, hjb_cfg);
            return run_hjb(hjb_cfg);
        }
        if (ver->parsed()) {
            if (ver_lambda != "tail" && ver_lambda != "unit")
                throw gfd::ConfigError("lambda must be tail or unit");
            opt.unit_lambda = ver_lambda == "unit";
            return run_verify(ver_cfg, opt);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
