#pragma once

// Run configs (section headers + key = value) and the CSV formats read and
// written by the command-line tool.

#include "chfe/campaigns.hpp"
#include "chfe/energy.hpp"
#include "chfe/geometry.hpp"
#include "chfe/groundstate.hpp"
#include "chfe/measures.hpp"

#include <map>
#include <string>
#include <vector>

namespace chfe::io {

/// Flat two-level config. Keys are addressed as "section.key".
class Config {
public:
    static Config parse(const std::string& text);
    static Config load(const std::string& path);

    bool has(const std::string& key) const;
    std::string get_string(const std::string& key) const;
    std::string get_string(const std::string& key, const std::string& fallback) const;
    double get_double(const std::string& key) const;
    double get_double(const std::string& key, double fallback) const;
    long get_int(const std::string& key) const;
    long get_int(const std::string& key, long fallback) const;
    bool get_bool(const std::string& key) const;
    bool get_bool(const std::string& key, bool fallback) const;
    /// comma or whitespace separated numbers
    std::vector<double> get_list(const std::string& key) const;

    void set(const std::string& key, const std::string& value);
    /// Values of `other` override; keys absent from this config are an error when strict.
    void merge(const Config& other, bool strict);
    std::vector<std::string> keys() const;
    std::string to_string() const;

private:
    // section -> ordered (key, value)
    std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> sections_;
    const std::string* find(const std::string& key) const;
};

CurvatureProfile profile_from_config(const Config& cfg, const std::string& section);
Potential potential_from_config(const Config& cfg, const std::string& section);
/// [section] dim, mode = constant | model | bounds, curvature (constant), theta_max and the
/// profile sections "profile" (model) or "profile_m" / "profile_M" (bounds).
ModelManifold manifold_from_config(const Config& cfg, const std::string& section = "manifold");

// ---------------------------------------------------------------- CSV

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    /// comment lines without the leading '#'
    std::vector<std::string> footer;

    std::size_t column_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;
};

/// Shortest round-trip decimal form; "inf", "-inf" and "nan" for non-finite values.
std::string format_double(double x);
double parse_double(const std::string& s);

std::string to_csv_string(const CsvTable& t);
CsvTable parse_csv(const std::string& text);
void write_csv(const std::string& path, const CsvTable& t);
CsvTable read_csv(const std::string& path);

/// header theta,psi,dpsi
CsvTable psi_table(const PsiSolution& psi);
struct PsiSamples {
    std::vector<double> theta;
    std::vector<double> psi;
    std::vector<double> dpsi;
};
PsiSamples psi_from_table(const CsvTable& t);

/// header r,rho
CsvTable density_table(const RadialDensity& rho);
RadialDensity density_from_table(const CsvTable& t, const ModelManifold& manifold, bool compact_support);
void write_density(const std::string& path, const RadialDensity& rho);
RadialDensity read_density(const std::string& path, const ModelManifold& manifold, bool compact_support);

/// header w,v1,...,vd
CsvTable measure_table(const DiscreteMeasure& mu);
DiscreteMeasure measure_from_table(const CsvTable& t, double c);

/// header R,entropy,interaction,total,bound and a verdict footer
CsvTable scan_table(const ScanResult& scan);
struct ScanSamples {
    std::vector<double> R, entropy, interaction, total, bound;
    std::string verdict;
};
ScanSamples scan_from_table(const CsvTable& t);

/// header case_id,lhs,rhs,ratio,passed
CsvTable report_table(const std::vector<CaseResult>& cases);
std::vector<CaseResult> report_from_table(const CsvTable& t);

/// header iter,energy,entropy,interaction,foc_residual,lambda_mult,damping
CsvTable runlog_table(const std::vector<IterationRecord>& log);
std::vector<IterationRecord> runlog_from_table(const CsvTable& t);

} // namespace chfe::io
