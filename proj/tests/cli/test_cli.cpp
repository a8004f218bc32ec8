#include "chfe/io.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace chfe;

namespace {

const fs::path& work()
{
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "chfe_cli_test";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

int run(const std::string& args)
{
    const std::string cmd = std::string(CHFE_BIN) + " " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string write_ini(const std::string& name, const std::string& text)
{
    const fs::path p = work() / name;
    std::ofstream(p) << text;
    return p.string();
}

std::string out(const std::string& name) { return (work() / name).string(); }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

void check_round_trip(const fs::path& p)
{
    const std::string text = slurp(p);
    CHECK(io::to_csv_string(io::parse_csv(text)) == text);
}

} // namespace

TEST_CASE("psi writes its table and rejects a zero range")
{
    CHECK(run("--out " + out("psi") + " psi") == 0);
    check_round_trip(work() / "psi" / "psi.csv");
    CHECK(run("--config " + write_ini("p0.ini", "[psi]\ntheta_max = 0\n") + " psi") == 2);
    CHECK(run("--config " + write_ini("pk.ini", "[psi]\nthetamax = 3\n") + " psi") == 2);
    CHECK(run("--config " + write_ini("pc.ini", "[profile]\nkind = constant\nc = -2\n") + " psi") == 2);
}

TEST_CASE("scan verdicts and the empty grid")
{
    CHECK(run("--out " + out("scan") + " scan") == 0);
    const fs::path p = work() / "scan" / "scan.csv";
    check_round_trip(p);
    CHECK(io::scan_from_table(io::read_csv(p.string())).verdict == "unbounded_below_spreading");
    CHECK(run("--config " + write_ini("s0.ini", "[scan]\ncount = 0\n") + " scan") == 2);
}

TEST_CASE("verify is byte-reproducible across thread counts")
{
    const std::string ini = write_ini("v.ini", "[verify]\ncl_cases = 30\ngcl_cases = 10\ngcl_const_cases = 5\n"
                                               "convexity_cases = 10\nconvexity_max_points = 200\n"
                                               "sandwich_cases = 30\nhls_cases = 2\n");
    CHECK(run("--config " + ini + " --threads 1 --out " + out("v1") + " verify") == 0);
    CHECK(run("--config " + ini + " --threads 3 --out " + out("v3") + " verify") == 0);
    const std::string a = slurp(work() / "v1" / "report.csv");
    CHECK_FALSE(a.empty());
    CHECK(a == slurp(work() / "v3" / "report.csv"));
    check_round_trip(work() / "v1" / "report.csv");
    CHECK(run("--config " + ini + " --seed 9 --out " + out("v9") + " verify") == 0);
    CHECK(a != slurp(work() / "v9" / "report.csv"));
}

TEST_CASE("verify exit codes")
{
    CHECK(run("--config " + write_ini("u.ini", "[verify]\ncampaigns = convexity\nconvexity_cases = 10\n"
                                               "convexity_centred = false\n") +
              " --out " + out("u") + " verify") == 1);
    CHECK(run("--config " + write_ini("l.ini", "[verify]\ndim = 3\nq = 0.5\nlambda = 1\n") + " verify") == 2);
    CHECK(run("--config " + write_ini("sw.ini", "[verify]\ncampaigns = sandwich\nsandwich_cases = 50\n"
                                                "sandwich_requires_slope = false\n") +
              " --out " + out("sw") + " verify") == 1);
}

TEST_CASE("minimize refusal, missing init and iteration limit")
{
    CHECK(run("--config " + write_ini("r.ini", "[potential]\nkind = log1p\n") + " minimize") == 5);
    CHECK(run("--config " + write_ini("rb.ini", "[potential]\nkind = power\nbeta = 0\n") + " minimize") == 5);
    CHECK(run("--config " + write_ini("i.ini", "[minimize]\ninit = /nonexistent/rho.csv\n") + " minimize") == 2);
    CHECK(run("--config " + write_ini("n.ini", "[minimize]\ngrid_size = 64\nmax_iterations = 2\n") + " --out " +
              out("nc") + " minimize") == 4);
    CHECK(fs::exists(work() / "nc" / "runlog.csv"));
    CHECK(fs::exists(work() / "nc" / "density.csv"));
}

TEST_CASE("minimize certificate on a coarse grid")
{
    CHECK(run("--config " + write_ini("m.ini", "[minimize]\ngrid_size = 256\nangular_nodes = 32\nprobes = 10\n") +
              " --out " + out("m") + " minimize") == 0);
    for (const char* f : {"runlog.csv", "density.csv", "certificate.csv", "probes.csv"}) check_round_trip(work() / "m" / f);
    const auto cert = io::report_from_table(io::read_csv((work() / "m" / "certificate.csv").string()));
    for (const auto& c : cert) CHECK(c.passed);

    // restarting from the result converges at once
    const std::string init = (work() / "m" / "density.csv").string();
    CHECK(run("--config " + write_ini("m2.ini", "[minimize]\ngrid_size = 256\nangular_nodes = 32\ncertificate = false\n"
                                                "init = " + init + "\n") +
              " --out " + out("m2") + " minimize") == 0);
}

TEST_CASE("energy of balls and a density file")
{
    const ModelManifold m = ModelManifold::constant(2, 1.0);
    const std::string rho = (work() / "ball.csv").string();
    io::write_density(rho, uniform_ball(m, 1.0, 65));
    CHECK(run("--config " + write_ini("e.ini", "[energy]\nball_R = 0.5, 1\ndensity = " + rho + "\n") + " --out " +
              out("e") + " energy") == 0);
    const io::CsvTable t = io::read_csv((work() / "e" / "energy.csv").string());
    REQUIRE(t.rows.size() == 3);
    check_round_trip(work() / "e" / "energy.csv");
    CHECK(run("--config " + write_ini("e0.ini", "[energy]\nball_R =\n") + " energy") == 2);
}

TEST_CASE("command-line errors")
{
    CHECK(run("") == 2);
    CHECK(run("bogus") == 2);
    CHECK(run("--threads 0 psi") == 2);
    CHECK(run("--print-defaults verify") == 0);
}
