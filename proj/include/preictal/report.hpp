#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "preictal/ciopr.hpp"
#include "preictal/metrics.hpp"
#include "preictal/stats.hpp"

namespace preictal {

/// Pooled test metrics of one patient for one preictal definition.
struct DefinitionMetrics {
    int definition_min = 0;
    MetricsReport report;
};

struct PatientMetrics {
    std::string patient_id;
    std::size_t n_seizures = 0;  // eligible seizures used as test folds
    std::vector<DefinitionMetrics> by_definition;
};

/// CIOPR terms of one (seizure, run, definition).
struct CioprRow {
    std::string patient_id;
    std::string seizure_id;
    int run = 0;
    bool excluded = false;
    std::string reason;
    CioprReport report;  // definition_min set even when excluded
};

/// Run-averaged CIOPR results of one seizure.
struct SeizureCiopr {
    std::string patient_id;
    std::string seizure_id;
    std::size_t n_runs = 0;  // runs that produced a fitted group
    bool excluded = false;
    std::string reason;
    std::map<int, double> spc_min;
    std::map<int, double> ciopc;
    std::map<int, std::optional<double>> ciopr;
};

enum class OppCriterion { ciopr, f1 };
const char* to_string(OppCriterion c);

struct OppDecision {
    std::string patient_id;
    std::optional<int> opp_min;  // empty when nothing was evaluated
    OppCriterion criterion = OppCriterion::f1;
    std::map<int, double> ciopr_means;
    std::map<int, double> f1_means;
};

/// Argmax of the mean CIOPR over the patient's usable seizures, else of F1.
/// Ties go to the shorter definition.
OppDecision select_opp(const std::string& patient_id, const std::map<int, double>& ciopr_means,
                       const std::map<int, double>& f1_means);

/// Mean CIOPR per definition over seizures that were not excluded.
std::map<int, double> ciopr_means(const std::vector<SeizureCiopr>& seizures, const std::string& patient_id);

/// Averages CIOPR rows over runs per seizure.
std::vector<SeizureCiopr> summarize_ciopr(const std::vector<CioprRow>& rows);

struct MetricStats {
    std::string metric;
    std::string subjects;  // "patients" or "seizures"
    std::optional<StatReport> report;
    std::string note;      // why the test was skipped
};

/// Friedman tests across definitions: conventional metrics over patients, SPC and CIOPR over seizures.
std::vector<MetricStats> definition_stats(const std::vector<PatientMetrics>& metrics,
                                          const std::vector<SeizureCiopr>& seizures,
                                          const std::vector<int>& definitions, double alpha = 0.05);

/// Self-contained SVG of a smoothed output profile with its fitted curve, the two
/// transition-period boundaries (black, dotted) and the SPC start (red, dotted).
std::string profile_svg(const SmoothedSeries& sm, const CioprReport& report, const std::string& title);

// Table writers; each throws IoError when the file cannot be written.
void write_patient_metrics(const PatientMetrics& m, const std::filesystem::path& path);
void write_metrics_long(const std::vector<PatientMetrics>& all, const std::filesystem::path& path);
std::vector<PatientMetrics> read_metrics_long(const std::filesystem::path& path);
void write_ciopr_rows(const std::vector<CioprRow>& rows, const std::filesystem::path& path);
std::vector<CioprRow> read_ciopr_rows(const std::filesystem::path& path);
void write_ciopr_table(const std::vector<SeizureCiopr>& seizures, const std::vector<int>& definitions,
                       const std::filesystem::path& path);
void write_opp_summary(const std::vector<OppDecision>& decisions, const std::vector<PatientMetrics>& metrics,
                       const std::vector<int>& definitions, const std::filesystem::path& path);
void write_stats(const std::vector<MetricStats>& stats, const std::vector<int>& definitions,
                 const std::filesystem::path& path);

}  // namespace preictal
