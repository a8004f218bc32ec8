#include "chfe/io.hpp"

#include "chfe/errors.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace chfe::io {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::pair<std::string, std::string> split_key(const std::string& key)
{
    const auto dot = key.find('.');
    if (dot == std::string::npos || dot == 0 || dot + 1 == key.size())
        throw ConfigError("config key must look like section.key: '" + key + "'");
    return {key.substr(0, dot), key.substr(dot + 1)};
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot open file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

// ---------------------------------------------------------------- Config

Config Config::parse(const std::string& text)
{
    namespace pt = boost::property_tree;
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::ini_parser::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config parse error: ") + e.message() + " (line " +
                          std::to_string(e.line()) + ")");
    }
    Config cfg;
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config: key '" + section + "' outside any section");
        std::vector<std::pair<std::string, std::string>> entries;
        for (const auto& [key, value] : body) entries.emplace_back(key, trim(value.get_value<std::string>()));
        cfg.sections_.emplace_back(section, std::move(entries));
    }
    return cfg;
}

Config Config::load(const std::string& path)
{
    return parse(read_file(path));
}

const std::string* Config::find(const std::string& key) const
{
    const auto [sec, k] = split_key(key);
    for (const auto& [name, entries] : sections_) {
        if (name != sec) continue;
        for (const auto& [ek, ev] : entries)
            if (ek == k) return &ev;
    }
    return nullptr;
}

bool Config::has(const std::string& key) const
{
    const std::string* v = find(key);
    return v != nullptr && !v->empty();
}

std::string Config::get_string(const std::string& key) const
{
    const std::string* v = find(key);
    if (!v || v->empty()) throw ConfigError("config: missing value for " + key);
    return *v;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const
{
    return has(key) ? get_string(key) : fallback;
}

double Config::get_double(const std::string& key) const
{
    const std::string s = get_string(key);
    try {
        return parse_double(s);
    } catch (const Error&) {
        throw ConfigError("config: " + key + " = '" + s + "' is not a number");
    }
}

double Config::get_double(const std::string& key, double fallback) const
{
    return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string& key) const
{
    const std::string s = get_string(key);
    long v = 0;
    const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw ConfigError("config: " + key + " = '" + s + "' is not an integer");
    return v;
}

long Config::get_int(const std::string& key, long fallback) const
{
    return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key) const
{
    std::string s = get_string(key);
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("config: " + key + " = '" + s + "' is not a boolean");
}

bool Config::get_bool(const std::string& key, bool fallback) const
{
    return has(key) ? get_bool(key) : fallback;
}

std::vector<double> Config::get_list(const std::string& key) const
{
    std::string s = get_string(key, "");
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream in(s);
    std::vector<double> out;
    std::string tok;
    while (in >> tok) {
        try {
            out.push_back(parse_double(tok));
        } catch (const Error&) {
            throw ConfigError("config: " + key + " contains a non-number '" + tok + "'");
        }
    }
    return out;
}

void Config::set(const std::string& key, const std::string& value)
{
    const auto [sec, k] = split_key(key);
    for (auto& [name, entries] : sections_) {
        if (name != sec) continue;
        for (auto& [ek, ev] : entries) {
            if (ek == k) {
                ev = value;
                return;
            }
        }
        entries.emplace_back(k, value);
        return;
    }
    sections_.push_back({sec, {{k, value}}});
}

void Config::merge(const Config& other, bool strict)
{
    for (const auto& [name, entries] : other.sections_) {
        for (const auto& [k, v] : entries) {
            const std::string key = name + "." + k;
            if (strict && !find(key)) throw ConfigError("config: unknown key " + key);
            set(key, v);
        }
    }
}

std::vector<std::string> Config::keys() const
{
    std::vector<std::string> out;
    for (const auto& [name, entries] : sections_)
        for (const auto& [k, v] : entries) out.push_back(name + "." + k);
    return out;
}

std::string Config::to_string() const
{
    std::ostringstream out;
    bool first = true;
    for (const auto& [name, entries] : sections_) {
        if (!first) out << '\n';
        first = false;
        out << '[' << name << "]\n";
        for (const auto& [k, v] : entries) out << k << " = " << v << '\n';
    }
    return out.str();
}

// ---------------------------------------------------------------- config -> objects

namespace {

std::pair<std::vector<double>, std::vector<double>> table_from_config(const Config& cfg, const std::string& section,
                                                                      const std::string& value_column)
{
    if (cfg.has(section + ".file")) {
        const CsvTable t = read_csv(cfg.get_string(section + ".file"));
        return {t.column("theta"), t.column(value_column)};
    }
    return {cfg.get_list(section + ".theta"), cfg.get_list(section + ".values")};
}

} // namespace

CurvatureProfile profile_from_config(const Config& cfg, const std::string& section)
{
    const std::string kind = cfg.get_string(section + ".kind");
    try {
        if (kind == "constant") return CurvatureProfile::constant(cfg.get_double(section + ".c"));
        if (kind == "power")
            return CurvatureProfile::power(cfg.get_double(section + ".k"), cfg.get_double(section + ".floor", 0.0));
        if (kind == "exponential")
            return CurvatureProfile::exponential(cfg.get_double(section + ".beta"),
                                                 cfg.get_double(section + ".amplitude", 1.0));
        if (kind == "tabulated") {
            auto [theta, c] = table_from_config(cfg, section, "c");
            return CurvatureProfile::tabulated(std::move(theta), std::move(c),
                                               cfg.get_bool(section + ".monotone", false),
                                               cfg.get_bool(section + ".c32", false));
        }
    } catch (const InvalidProfile& e) {
        throw ConfigError(std::string("[") + section + "] " + e.what());
    }
    throw ConfigError("[" + section + "] unknown profile kind '" + kind + "'");
}

Potential potential_from_config(const Config& cfg, const std::string& section)
{
    const std::string kind = cfg.get_string(section + ".kind");
    try {
        if (kind == "power") return Potential::power(cfg.get_double(section + ".beta"));
        if (kind == "log1p") return Potential::log1p();
        if (kind == "exp_rate")
            return Potential::exp_rate(cfg.get_double(section + ".lambda"), cfg.get_double(section + ".c"));
        if (kind == "sinh_power")
            return Potential::sinh_power(cfg.get_double(section + ".lambda"), cfg.get_double(section + ".c"));
        if (kind == "double_exp")
            return Potential::double_exp(cfg.get_double(section + ".a"), cfg.get_double(section + ".b"));
        if (kind == "tabulated") {
            auto [theta, h] = table_from_config(cfg, section, "h");
            return Potential::tabulated(std::move(theta), std::move(h), cfg.get_bool(section + ".nondecreasing", true));
        }
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("[") + section + "] " + e.what());
    }
    throw ConfigError("[" + section + "] unknown potential kind '" + kind + "'");
}

ModelManifold manifold_from_config(const Config& cfg, const std::string& section)
{
    const long d = cfg.get_int(section + ".dim");
    if (d < 2) throw ConfigError("[" + section + "] dim must be at least 2");
    const std::string mode = cfg.get_string(section + ".mode", "constant");
    const int dim = static_cast<int>(d);
    try {
        if (mode == "constant") {
            const double c = cfg.get_double(section + ".curvature");
            if (!(c >= 0.0)) throw ConfigError("[" + section + "] curvature must be >= 0");
            return ModelManifold::constant(dim, c);
        }
        const double theta_max = cfg.get_double(section + ".theta_max");
        if (!(theta_max > 0.0)) throw ConfigError("[" + section + "] theta_max must be positive");
        if (mode == "model") return ModelManifold::model(dim, profile_from_config(cfg, "profile"), theta_max);
        if (mode == "bounds")
            return ModelManifold::bounds(dim, profile_from_config(cfg, "profile_m"), profile_from_config(cfg, "profile_M"),
                                         theta_max);
    } catch (const InvalidProfile& e) {
        throw ConfigError(std::string("[") + section + "] " + e.what());
    } catch (const ParameterError& e) {
        throw ConfigError(std::string("[") + section + "] " + e.what());
    }
    throw ConfigError("[" + section + "] unknown mode '" + mode + "'");
}

// ---------------------------------------------------------------- CSV

std::string format_double(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
    (void)ec;
    return std::string(buf, p);
}

double parse_double(const std::string& raw)
{
    const std::string s = trim(raw);
    if (s == "inf" || s == "+inf") return kInf;
    if (s == "-inf") return -kInf;
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    double v = 0.0;
    const char* b = s.data();
    if (!s.empty() && s[0] == '+') ++b;
    const auto [p, ec] = std::from_chars(b, s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size()) throw ConfigError("not a number: '" + s + "'");
    return v;
}

std::size_t CsvTable::column_index(const std::string& name) const
{
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw ConfigError("csv: missing column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
}

std::vector<double> CsvTable::column(const std::string& name) const
{
    const std::size_t j = column_index(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& row : rows) out.push_back(parse_double(row.at(j)));
    return out;
}

std::string to_csv_string(const CsvTable& t)
{
    std::string out;
    auto join = [&](const std::vector<std::string>& cells) {
        for (std::size_t j = 0; j < cells.size(); ++j) {
            if (j) out += ',';
            out += cells[j];
        }
        out += '\n';
    };
    join(t.header);
    for (const auto& row : t.rows) join(row);
    for (const auto& f : t.footer) out += "# " + f + '\n';
    return out;
}

CsvTable parse_csv(const std::string& text)
{
    CsvTable t;
    std::istringstream in(text);
    std::string line;
    bool have_header = false;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::string f = line.substr(1);
            if (!f.empty() && f[0] == ' ') f.erase(0, 1);
            t.footer.push_back(f);
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(trim(cell));
        if (line.back() == ',') cells.emplace_back();
        if (!have_header) {
            t.header = std::move(cells);
            have_header = true;
        } else {
            if (cells.size() != t.header.size())
                throw ConfigError("csv: line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                                  " fields, header has " + std::to_string(t.header.size()));
            t.rows.push_back(std::move(cells));
        }
    }
    if (!have_header) throw ConfigError("csv: no header row");
    return t;
}

void write_csv(const std::string& path, const CsvTable& t)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write file: " + path);
    out << to_csv_string(t);
    if (!out) throw ConfigError("write failed: " + path);
}

CsvTable read_csv(const std::string& path)
{
    return parse_csv(read_file(path));
}

namespace {

std::vector<std::string> numeric_row(std::initializer_list<double> values)
{
    std::vector<std::string> row;
    for (double v : values) row.push_back(format_double(v));
    return row;
}

} // namespace

CsvTable psi_table(const PsiSolution& psi)
{
    CsvTable t;
    t.header = {"theta", "psi", "dpsi"};
    for (std::size_t i = 0; i < psi.theta.size(); ++i) t.rows.push_back(numeric_row({psi.theta[i], psi.psi[i], psi.dpsi[i]}));
    return t;
}

PsiSamples psi_from_table(const CsvTable& t)
{
    return {t.column("theta"), t.column("psi"), t.column("dpsi")};
}

CsvTable density_table(const RadialDensity& rho)
{
    CsvTable t;
    t.header = {"r", "rho"};
    for (std::size_t i = 0; i < rho.r.size(); ++i) t.rows.push_back(numeric_row({rho.r[i], rho.rho[i]}));
    return t;
}

RadialDensity density_from_table(const CsvTable& t, const ModelManifold& manifold, bool compact_support)
{
    try {
        return RadialDensity(manifold, t.column("r"), t.column("rho"), compact_support);
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("density table: ") + e.what());
    }
}

void write_density(const std::string& path, const RadialDensity& rho)
{
    write_csv(path, density_table(rho));
}

RadialDensity read_density(const std::string& path, const ModelManifold& manifold, bool compact_support)
{
    return density_from_table(read_csv(path), manifold, compact_support);
}

CsvTable measure_table(const DiscreteMeasure& mu)
{
    CsvTable t;
    t.header = {"w"};
    for (int j = 0; j < mu.dim; ++j) t.header.push_back("v" + std::to_string(j + 1));
    for (std::size_t i = 0; i < mu.size(); ++i) {
        std::vector<std::string> row{format_double(mu.weights(static_cast<Eigen::Index>(i)))};
        for (int j = 0; j < mu.dim; ++j) row.push_back(format_double(mu.log_points(static_cast<Eigen::Index>(i), j)));
        t.rows.push_back(std::move(row));
    }
    return t;
}

DiscreteMeasure measure_from_table(const CsvTable& t, double c)
{
    if (t.header.empty() || t.header[0] != "w") throw ConfigError("measure table: first column must be 'w'");
    const int d = static_cast<int>(t.header.size()) - 1;
    if (d < 2) throw ConfigError("measure table: need at least two coordinates");
    DiscreteMeasure mu;
    mu.dim = d;
    mu.c = c;
    const auto n = static_cast<Eigen::Index>(t.rows.size());
    mu.log_points.resize(n, d);
    mu.weights.resize(n);
    const std::vector<double> w = t.column("w");
    for (Eigen::Index i = 0; i < n; ++i) mu.weights(i) = w[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) {
        const std::vector<double> v = t.column("v" + std::to_string(j + 1));
        for (Eigen::Index i = 0; i < n; ++i) mu.log_points(i, j) = v[static_cast<std::size_t>(i)];
    }
    mu.centred = mu.tangent_mean().norm() <= 1e-10 * std::max(1.0, mu.total_weight());
    return mu;
}

CsvTable scan_table(const ScanResult& scan)
{
    CsvTable t;
    t.header = {"R", "entropy", "interaction", "total", "bound"};
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i < scan.R_values.size(); ++i) {
        const bool has_e = i < scan.energies.size();
        t.rows.push_back(numeric_row({scan.R_values[i], has_e ? scan.energies[i].entropy : nan,
                                      has_e ? scan.energies[i].interaction : nan,
                                      has_e ? scan.energies[i].total : nan, scan.bounds.at(i)}));
    }
    t.footer.push_back("verdict: " + to_string(scan.verdict));
    if (!scan.reason.empty()) t.footer.push_back("reason: " + scan.reason);
    return t;
}

ScanSamples scan_from_table(const CsvTable& t)
{
    ScanSamples s{t.column("R"), t.column("entropy"), t.column("interaction"), t.column("total"), t.column("bound"), {}};
    for (const auto& f : t.footer)
        if (f.rfind("verdict: ", 0) == 0) s.verdict = f.substr(9);
    return s;
}

CsvTable report_table(const std::vector<CaseResult>& cases)
{
    CsvTable t;
    t.header = {"case_id", "lhs", "rhs", "ratio", "passed"};
    std::size_t failed = 0;
    for (const auto& c : cases) {
        t.rows.push_back({c.case_id, format_double(c.lhs), format_double(c.rhs), format_double(c.ratio),
                          c.passed ? "1" : "0"});
        failed += c.passed ? 0 : 1;
    }
    t.footer.push_back("cases: " + std::to_string(cases.size()) + " failed: " + std::to_string(failed));
    return t;
}

std::vector<CaseResult> report_from_table(const CsvTable& t)
{
    const std::size_t id = t.column_index("case_id");
    const std::size_t ok = t.column_index("passed");
    const std::vector<double> lhs = t.column("lhs"), rhs = t.column("rhs"), ratio = t.column("ratio");
    std::vector<CaseResult> out;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const std::string& p = t.rows[i][ok];
        if (p != "0" && p != "1") throw ConfigError("report table: passed must be 0 or 1");
        out.push_back({t.rows[i][id], lhs[i], rhs[i], ratio[i], p == "1"});
    }
    return out;
}

CsvTable runlog_table(const std::vector<IterationRecord>& log)
{
    CsvTable t;
    t.header = {"iter", "energy", "entropy", "interaction", "foc_residual", "lambda_mult", "damping"};
    for (const auto& r : log) {
        std::vector<std::string> row{std::to_string(r.iter)};
        for (double v : {r.energy, r.entropy, r.interaction, r.foc_residual, r.lambda_mult, r.damping})
            row.push_back(format_double(v));
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::vector<IterationRecord> runlog_from_table(const CsvTable& t)
{
    const std::vector<double> it = t.column("iter"), e = t.column("energy"), s = t.column("entropy"),
                              w = t.column("interaction"), f = t.column("foc_residual"),
                              l = t.column("lambda_mult"), a = t.column("damping");
    std::vector<IterationRecord> out;
    for (std::size_t i = 0; i < it.size(); ++i)
        out.push_back({static_cast<std::size_t>(it[i]), e[i], s[i], w[i], f[i], l[i], a[i]});
    return out;
}

} // namespace chfe::io
