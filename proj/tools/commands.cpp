#include "commands.hpp"

#include "chfe/campaigns.hpp"
#include "chfe/errors.hpp"
#include "chfe/groundstate.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <sstream>

namespace chfe::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const char* run_section = R"([run]
seed = 1
threads = 1
)";

std::string profile_section(const std::string& name, const std::string& kind, const std::string& c)
{
    return "[" + name + "]\nkind = " + kind + "\nc = " + c +
           "\nk =\nfloor =\nbeta =\namplitude =\ntheta =\nvalues =\nfile =\nmonotone =\nc32 =\n";
}

std::string potential_section(const std::string& kind, const std::string& lambda, const std::string& c)
{
    return "[potential]\nkind = " + kind + "\nbeta =\nlambda = " + lambda + "\nc = " + c +
           "\na =\nb =\ntheta =\nvalues =\nfile =\nnondecreasing =\n";
}

const char* manifold_section = R"([manifold]
dim = 2
mode = constant
curvature = 1
theta_max =
)";

const char* model_section = R"([model]
q = 0.5
)";

std::string join(std::initializer_list<std::string> parts)
{
    std::string out;
    for (const auto& p : parts) {
        if (!out.empty()) out += '\n';
        out += p;
    }
    return out;
}

std::filesystem::path out_path(const GlobalOptions& g, const std::string& name)
{
    std::filesystem::create_directories(g.out_dir);
    return std::filesystem::path(g.out_dir) / name;
}

void write_table(const GlobalOptions& g, const std::string& name, const io::CsvTable& t)
{
    io::write_csv(out_path(g, name).string(), t);
}

int threads_of(const io::Config& cfg)
{
    const long t = cfg.get_int("run.threads", 1);
    if (t < 1) throw ConfigError("run.threads must be at least 1");
    return static_cast<int>(t);
}

std::uint64_t seed_of(const io::Config& cfg)
{
    const long s = cfg.get_int("run.seed", 1);
    if (s < 0) throw ConfigError("run.seed must be >= 0");
    return static_cast<std::uint64_t>(s);
}

double q_of(const io::Config& cfg)
{
    const double q = cfg.get_double("model.q");
    if (!(q > 0.0 && q < 1.0)) throw ConfigError("model.q must lie in (0, 1)");
    return q;
}

std::size_t positive_count(const io::Config& cfg, const std::string& key)
{
    const long n = cfg.get_int(key);
    if (n < 0) throw ConfigError(key + " must be >= 0");
    return static_cast<std::size_t>(n);
}

std::vector<std::string> word_list(const std::string& s)
{
    std::string t = s;
    for (char& ch : t)
        if (ch == ',') ch = ' ';
    std::istringstream in(t);
    std::vector<std::string> out;
    std::string w;
    while (in >> w) out.push_back(w);
    return out;
}

} // namespace

std::string default_config(const std::string& command)
{
    if (command == "psi")
        return join({run_section, profile_section("profile", "constant", "1"), R"([psi]
theta_max = 10
samples = 201
tol = 1e-10
pivot = 1
)"});
    if (command == "scan")
        return join({run_section, manifold_section, profile_section("profile", "", ""),
                     profile_section("profile_m", "", ""), profile_section("profile_M", "", ""), model_section,
                     potential_section("log1p", "", ""), R"([scan]
kind = spreading
R_min = 10
R_max = 100
count = 46
R_list =
floor = -1e6
blowup_floor = -100
window = 0.5
compute_energy = true
grid_size = 129
angular_nodes = 32
)"});
    if (command == "verify")
        return join({run_section, R"([verify]
campaigns = cl, gcl, gcl_const, convexity, sandwich, hls
cl_cases = 1000
gcl_cases = 200
gcl_const_cases = 50
convexity_cases = 500
convexity_max_points = 1000
convexity_centred = true
convexity_tolerance = 1e-9
sandwich_cases = 1000
sandwich_requires_slope = true
hls_cases = 100
hls_c_values = 0.1, 0.01, 0.001, 0.0001
dim =
q =
lambda =
tolerance = 1e-6
grid_size = 400
)"});
    if (command == "minimize")
        return join({run_section, manifold_section, model_section, potential_section("sinh_power", "3", "1"), R"([minimize]
r_max = 8
grid_size = 1024
max_iterations = 20000
energy_tol = 1e-12
foc_tol = 1e-6
damping = 0.5
min_damping = 1e-12
angular_nodes = 64
lambda =
init =
certificate = true
probes = 50
probe_grid = 256
gamma_factor = 0.5
)"});
    if (command == "energy")
        return join({run_section, manifold_section, profile_section("profile", "", ""),
                     profile_section("profile_m", "", ""), profile_section("profile_M", "", ""), model_section,
                     potential_section("sinh_power", "3", "1"), R"([energy]
density =
compact = true
cloud =
ball_R = 1
grid_size = 257
angular_nodes = 64
)"});
    throw ConfigError("unknown command '" + command + "'");
}

io::Config resolve_config(const std::string& command, const GlobalOptions& g)
{
    io::Config cfg = io::Config::parse(default_config(command));
    if (!g.config_path.empty()) cfg.merge(io::Config::load(g.config_path), true);
    if (g.threads) cfg.set("run.threads", std::to_string(*g.threads));
    if (g.seed) cfg.set("run.seed", std::to_string(*g.seed));
    return cfg;
}

// ---------------------------------------------------------------- psi

int cmd_psi(const io::Config& cfg, const GlobalOptions& g)
{
    const CurvatureProfile prof = io::profile_from_config(cfg, "profile");
    const double theta_max = cfg.get_double("psi.theta_max");
    if (!(theta_max > 0.0)) throw ConfigError("psi.theta_max must be positive");
    const double tol = cfg.get_double("psi.tol");
    if (!(tol > 0.0)) throw ConfigError("psi.tol must be positive");
    const std::size_t samples = positive_count(cfg, "psi.samples");
    if (samples < 2) throw ConfigError("psi.samples must be at least 2");
    const double pivot = cfg.get_double("psi.pivot");
    if (!(pivot > 0.0) || pivot > theta_max) throw ConfigError("psi.pivot must lie in (0, theta_max]");

    const PsiSolution psi = solve_psi(prof, theta_max, tol);
    const PsiSolution::State at_pivot = psi.at(pivot);
    const double sc = std::sqrt(prof(pivot));
    io::CsvTable t;
    t.header = {"theta", "psi", "dpsi", "upper_bound", "sandwich_bound"};
    for (std::size_t i = 0; i < samples; ++i) {
        const double theta = i + 1 == samples ? theta_max : theta_max * static_cast<double>(i) / (samples - 1);
        const PsiSolution::State s = psi.at(theta);
        const double upper = prof.monotone_nondecreasing() ? psi_upper_bound(prof, theta) : kNaN;
        const double sandwich = std::exp(at_pivot.log_psi + sc * (theta - pivot));
        t.rows.push_back({io::format_double(theta), io::format_double(s.psi), io::format_double(s.dpsi),
                          io::format_double(upper), io::format_double(sandwich)});
    }
    t.footer.push_back("profile: " + prof.describe());
    t.footer.push_back("sandwich pivot: " + io::format_double(pivot) + " slope_condition: " +
                       (at_pivot.log_derivative >= sc * (1.0 - 10.0 * tol) ? "true" : "false"));
    write_table(g, "psi.csv", t);
    std::cout << "psi: " << samples << " samples on [0, " << theta_max << "] for " << prof.describe() << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------- scan

int cmd_scan(const io::Config& cfg, const GlobalOptions& g)
{
    const ModelManifold m = io::manifold_from_config(cfg);
    const double q = q_of(cfg);
    const Potential h = io::potential_from_config(cfg, "potential");
    std::vector<double> R = cfg.get_list("scan.R_list");
    if (R.empty()) {
        const std::size_t n = positive_count(cfg, "scan.count");
        if (n == 0) throw ConfigError("scan: empty R grid (scan.count = 0 and no scan.R_list)");
        const double a = cfg.get_double("scan.R_min"), b = cfg.get_double("scan.R_max");
        if (!(a > 0.0) || !(b > 0.0)) throw ConfigError("scan.R_min and scan.R_max must be positive");
        R = n == 1 ? std::vector<double>{a} : log_spaced(a, b, n);
    }
    for (double r : R)
        if (!(r > 0.0)) throw ConfigError("scan: every R must be positive");
    ScanOptions so;
    so.floor = cfg.get_double("scan.floor");
    so.blowup_floor = cfg.get_double("scan.blowup_floor");
    so.window = cfg.get_double("scan.window");
    so.compute_energy = cfg.get_bool("scan.compute_energy");
    so.grid_size = positive_count(cfg, "scan.grid_size");
    so.angular_nodes = static_cast<int>(cfg.get_int("scan.angular_nodes"));
    so.threads = threads_of(cfg);
    const std::string kind = cfg.get_string("scan.kind");
    // spreading runs outward, blow-up inward
    std::sort(R.begin(), R.end());
    R.erase(std::unique(R.begin(), R.end()), R.end());
    if (kind == "blowup") std::reverse(R.begin(), R.end());
    ScanResult res;
    if (kind == "spreading")
        res = spreading_scan(m, q, h, R, so);
    else if (kind == "blowup")
        res = blowup_scan(m, q, h, R, so);
    else
        throw ConfigError("scan.kind must be spreading or blowup");
    write_table(g, "scan.csv", io::scan_table(res));
    std::cout << "verdict: " << to_string(res.verdict) << '\n';
    if (!res.reason.empty()) std::cout << "reason: " << res.reason << '\n';
    return exit_ok;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const io::Config& cfg, const GlobalOptions& g)
{
    CampaignOptions co;
    co.seed = seed_of(cfg);
    co.threads = threads_of(cfg);
    co.tolerance = cfg.get_double("verify.tolerance");
    co.grid_size = positive_count(cfg, "verify.grid_size");
    if (cfg.has("verify.dim")) co.dim = static_cast<int>(cfg.get_int("verify.dim"));
    if (cfg.has("verify.q")) co.q = cfg.get_double("verify.q");
    if (cfg.has("verify.lambda")) co.lambda = cfg.get_double("verify.lambda");
    try {
        validate_campaign_options(co);
    } catch (const ParameterError& e) {
        throw ConfigError(e.what());
    }
    const std::vector<std::string> names = word_list(cfg.get_string("verify.campaigns"));
    if (names.empty()) throw ConfigError("verify.campaigns is empty");
    ConvexityOptions cvx;
    cvx.centred = cfg.get_bool("verify.convexity_centred");
    cvx.max_points = positive_count(cfg, "verify.convexity_max_points");
    cvx.tolerance = cfg.get_double("verify.convexity_tolerance");
    if (cvx.max_points < 2) throw ConfigError("verify.convexity_max_points must be at least 2");
    const std::vector<double> hls_c = cfg.get_list("verify.hls_c_values");
    for (const auto& n : names) {
        if (n != "cl" && n != "gcl" && n != "gcl_const" && n != "convexity" && n != "sandwich" && n != "hls")
            throw ConfigError("verify: unknown campaign '" + n + "'");
    }
    if (hls_c.size() < 2) throw ConfigError("verify.hls_c_values needs at least two values");
    // the sizes are read before any work starts
    const std::size_t n_cl = positive_count(cfg, "verify.cl_cases"), n_gcl = positive_count(cfg, "verify.gcl_cases"),
                      n_gc = positive_count(cfg, "verify.gcl_const_cases"),
                      n_cvx = positive_count(cfg, "verify.convexity_cases"),
                      n_psi = positive_count(cfg, "verify.sandwich_cases"),
                      n_hls = positive_count(cfg, "verify.hls_cases");
    const bool slope = cfg.get_bool("verify.sandwich_requires_slope");

    std::vector<CaseResult> all;
    auto add = [&](const std::string& name, std::vector<CaseResult> r) {
        std::size_t failed = 0;
        for (const auto& c : r) failed += c.passed ? 0 : 1;
        std::cout << name << ": " << r.size() << " cases, " << failed << " failed\n";
        all.insert(all.end(), r.begin(), r.end());
    };
    for (const auto& n : names) {
        if (n == "cl") add(n, carlson_levin_campaign(n_cl, co));
        if (n == "gcl") add(n, general_cl_campaign(n_gcl, co));
        if (n == "gcl_const") add(n, general_cl_constant_agreement(n_gc, co));
        if (n == "convexity") add(n, convexity_campaign(n_cvx, co, cvx));
        if (n == "sandwich") add(n, sandwich_campaign(n_psi, co, slope));
        if (n == "hls") add(n, reversed_hls_campaign(n_hls, co, hls_c));
    }
    write_table(g, "report.csv", io::report_table(all));
    const bool ok = all_passed(all);
    std::cout << (ok ? "all cases passed" : "some cases failed") << '\n';
    return ok ? exit_ok : exit_verify_failed;
}

// ---------------------------------------------------------------- minimize

int cmd_minimize(const io::Config& cfg, const GlobalOptions& g)
{
    const ModelManifold m = io::manifold_from_config(cfg);
    if (!m.is_constant() || !(m.curvature() > 0.0))
        throw ConfigError("minimize needs manifold.mode = constant with curvature > 0");
    const double q = q_of(cfg);
    const Potential h = io::potential_from_config(cfg, "potential");
    MinimizeOptions mo;
    mo.r_max = cfg.get_double("minimize.r_max");
    mo.grid_size = positive_count(cfg, "minimize.grid_size");
    mo.max_iterations = positive_count(cfg, "minimize.max_iterations");
    mo.energy_tol = cfg.get_double("minimize.energy_tol");
    mo.foc_tol = cfg.get_double("minimize.foc_tol");
    mo.initial_damping = cfg.get_double("minimize.damping");
    mo.min_damping = cfg.get_double("minimize.min_damping");
    mo.angular_nodes = static_cast<int>(cfg.get_int("minimize.angular_nodes"));
    mo.threads = threads_of(cfg);
    if (cfg.has("minimize.lambda")) mo.lambda = cfg.get_double("minimize.lambda");
    if (!(mo.r_max > 0.0)) throw ConfigError("minimize.r_max must be positive");
    if (mo.grid_size < 8) throw ConfigError("minimize.grid_size must be at least 8");
    if (!(mo.initial_damping > 0.0 && mo.initial_damping <= 1.0)) throw ConfigError("minimize.damping must lie in (0, 1]");
    if (!(mo.min_damping > 0.0)) throw ConfigError("minimize.min_damping must be positive");
    if (mo.angular_nodes < 2) throw ConfigError("minimize.angular_nodes must be at least 2");
    const bool want_cert = cfg.get_bool("minimize.certificate");
    const std::size_t probes = positive_count(cfg, "minimize.probes");
    const std::size_t probe_grid = positive_count(cfg, "minimize.probe_grid");
    const double gamma_factor = cfg.get_double("minimize.gamma_factor");
    std::optional<RadialDensity> init;
    if (cfg.has("minimize.init")) {
        const std::string path = cfg.get_string("minimize.init");
        if (!std::filesystem::exists(path)) throw ConfigError("minimize.init: file not found: " + path);
        init = io::read_density(path, m, true);
    }

    const double lambda = check_existence_regime(m, q, h, mo);
    const KernelMatrix K(m, uniform_grid(mo.r_max, mo.grid_size), h, mo.angular_nodes, mo.threads);
    const MinimizerResult res = minimize_radial(m, q, h, K, init, mo);
    write_table(g, "runlog.csv", io::runlog_table(res.history));
    io::write_density(out_path(g, "density.csv").string(), res.density);
    {
        std::ofstream diag(out_path(g, "diagnostics.txt"));
        diag << res.diagnostics << '\n'
             << "energy=" << io::format_double(res.energy.total) << " entropy=" << io::format_double(res.energy.entropy)
             << " interaction=" << io::format_double(res.energy.interaction)
             << " quadrature_error_estimate=" << io::format_double(res.energy.quadrature_error_estimate) << '\n'
             << "lagrange_multiplier=" << io::format_double(res.lagrange_multiplier)
             << " concentration=" << io::format_double(res.concentration) << '\n';
    }
    std::cout << "minimize: " << res.diagnostics << '\n'
              << "energy " << io::format_double(res.energy.total) << ", multiplier "
              << io::format_double(res.lagrange_multiplier) << '\n';
    if (!res.converged) {
        std::cout << "not converged; diagnostics written\n";
        return exit_not_converged;
    }
    if (!want_cert) return exit_ok;

    LowerBoundOptions lb;
    lb.gamma_factor = gamma_factor;
    lb.interaction = {mo.angular_nodes, mo.threads};
    const double c = m.curvature();
    std::vector<CaseResult> rows;
    rows.push_back({"foc_residual", res.foc_residual, mo.foc_tol, res.foc_residual / mo.foc_tol, res.converged});
    const EnergyLowerBound elb = energy_lower_bound_check(res.density, q, K, h, lambda, c, lb);
    rows.push_back({"energy_lower_bound", elb.bound, elb.energy, elb.bound / elb.energy, elb.holds});
    bool ok = elb.holds;
    for (double R : {1.0, 2.0, 5.0, 10.0}) {
        const TailBound tb = tightness_tail_bound(res.density, lambda, c, R);
        rows.push_back({"tail_R=" + io::format_double(R), tb.tail_mass, tb.bound,
                        tb.bound > 0.0 ? tb.tail_mass / tb.bound : 0.0, tb.holds});
        ok = ok && tb.holds;
    }
    const ProbeComparison pc = probe_energies(m, q, h, probes, 1e-2, 1e2, probe_grid, mo.angular_nodes, mo.threads);
    const bool below = probes == 0 || res.energy.total <= pc.best_energy;
    rows.push_back({"probe_best", res.energy.total, pc.best_energy, res.energy.total / pc.best_energy, below});
    ok = ok && below;
    write_table(g, "certificate.csv", io::report_table(rows));
    io::CsvTable pt;
    pt.header = {"R", "total"};
    for (std::size_t i = 0; i < pc.R.size(); ++i)
        pt.rows.push_back({io::format_double(pc.R[i]), io::format_double(pc.energy[i])});
    write_table(g, "probes.csv", pt);
    std::cout << "certificate: " << (ok ? "passed" : "failed") << '\n';
    return ok ? exit_ok : exit_verify_failed;
}

// ---------------------------------------------------------------- energy

int cmd_energy(const io::Config& cfg, const GlobalOptions& g)
{
    const ModelManifold m = io::manifold_from_config(cfg);
    const double q = q_of(cfg);
    const Potential h = io::potential_from_config(cfg, "potential");
    const InteractionOptions io_opts{static_cast<int>(cfg.get_int("energy.angular_nodes")), threads_of(cfg)};
    const std::size_t grid = positive_count(cfg, "energy.grid_size");
    if (grid < 3) throw ConfigError("energy.grid_size must be at least 3");
    const std::vector<double> balls = cfg.get_list("energy.ball_R");
    for (double R : balls)
        if (!(R > 0.0)) throw ConfigError("energy.ball_R values must be positive");
    std::optional<RadialDensity> density;
    std::optional<DiscreteMeasure> cloud;
    if (cfg.has("energy.density")) density = io::read_density(cfg.get_string("energy.density"), m, cfg.get_bool("energy.compact"));
    if (cfg.has("energy.cloud")) {
        if (!m.is_constant()) throw ConfigError("energy.cloud needs a constant-curvature manifold");
        cloud = io::measure_from_table(io::read_csv(cfg.get_string("energy.cloud")), m.curvature());
        if (cloud->dim != m.dim()) throw ConfigError("energy.cloud dimension differs from manifold.dim");
    }
    if (balls.empty() && !density && !cloud) throw ConfigError("energy: nothing to evaluate");

    io::CsvTable t;
    t.header = {"case_id", "entropy", "interaction", "total", "error_estimate"};
    auto add = [&](const std::string& id, const EnergyBreakdown& e) {
        t.rows.push_back({id, io::format_double(e.entropy), io::format_double(e.interaction), io::format_double(e.total),
                          io::format_double(e.quadrature_error_estimate)});
        std::cout << id << ": total " << io::format_double(e.total) << '\n';
    };
    for (double R : balls) {
        if (m.is_exact() && m.is_constant())
            add("ball_R=" + io::format_double(R), total_energy(uniform_ball(m, R, grid), q, h, io_opts));
        else {
            // bound-only or variable-curvature manifolds: the rho_R energy bound
            const double b = rhoR_energy_bound(m, R, q, h);
            EnergyBreakdown e;
            e.q = q;
            e.entropy = rhoR_entropy_bound(m, R, q);
            e.interaction = 0.5 * h(2.0 * R);
            e.total = b;
            e.quadrature_error_estimate = kNaN;
            add("ball_bound_R=" + io::format_double(R), e);
        }
    }
    if (density) add("density", total_energy(*density, q, h, io_opts));
    if (cloud) add("cloud", total_energy(*cloud, q, h));
    write_table(g, "energy.csv", t);
    return exit_ok;
}

// ---------------------------------------------------------------- entry

int run(int argc, char** argv)
{
    CLI::App app{"Free-energy tools on Cartan-Hadamard model manifolds"};
    app.require_subcommand(0, 1);
    GlobalOptions g;
    bool print_defaults = false;
    int threads = 0;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "run config (section headers + key = value)");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    auto* th = app.add_option("--threads", threads, "worker threads")->check(CLI::PositiveNumber);
    auto* sd = app.add_option("--seed", seed, "campaign seed");
    app.add_flag("--print-defaults", print_defaults, "print the command's default config and exit");
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"psi", "solve psi'' = c psi and tabulate its bounds"},
        {"scan", "rho_R energy scans for spreading / blow-up"},
        {"verify", "seeded inequality campaigns"},
        {"minimize", "radial ground-state search with certificate"},
        {"energy", "energies of uniform balls, densities or clouds"},
    };
    for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();
    app.fallthrough();
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? exit_ok : exit_config;
    }
    if (th->count()) g.threads = threads;
    if (sd->count()) g.seed = seed;
    std::string command;
    for (const auto& [name, help] : commands)
        if (app.got_subcommand(name)) command = name;
    if (command.empty()) {
        std::cerr << "error: a command is required (psi, scan, verify, minimize, energy)\n" << app.help();
        return exit_config;
    }
    if (print_defaults) {
        std::cout << default_config(command);
        return exit_ok;
    }
    try {
        const io::Config cfg = resolve_config(command, g);
        if (command == "psi") return cmd_psi(cfg, g);
        if (command == "scan") return cmd_scan(cfg, g);
        if (command == "verify") return cmd_verify(cfg, g);
        if (command == "minimize") return cmd_minimize(cfg, g);
        return cmd_energy(cfg, g);
    } catch (const GrowthConditionError& e) {
        std::cerr << e.what() << '\n';
        return exit_refused;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const ParameterError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const UnsupportedManifold& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const InvalidProfile& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const IntegratorFailure& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const PreconditionError& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return exit_numeric;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return exit_config;
    } catch (const std::exception& e) {
        std::cerr << "numeric failure: " << e.what() << '\n';
        return exit_numeric;
    }
}

} // namespace chfe::cli
