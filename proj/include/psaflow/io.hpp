#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "psaflow/config.hpp"
#include "psaflow/dbcr.hpp"
#include "psaflow/dtx.hpp"
#include "psaflow/evaluation.hpp"
#include "psaflow/synth.hpp"
#include "psaflow/timeline.hpp"

namespace psaflow::io {

// Comma-separated UTF-8 text, LF line endings, one header row per file.
//
//   patients.csv           patient_id,diagnosis_date,grade_group
//   psa.csv                patient_id,date,value_ng_ml,assay
//   treatments.csv         patient_id,date,kind
//   truth.csv              patient_id,treatment_kind,treatment_date,relapsed,
//                          relapse_date,relapse_mechanism,masked
//   detected_treatments.csv  patient_id,kind,date,nadir_date,psa_min
//   bcr_events.csv         patient_id,bcr_date,source,time_to_relapse_days
//   time_to_relapse.csv    bucket_start_days,bucket_end_days,count
//   time_to_relapse_by_grade.csv
//                          grade_group,bucket_start_days,bucket_end_days,count
//   metrics.txt            name=value lines
//
// Dates are YYYY-MM-DD. Empty optional fields are allowed in patients.csv
// and for relapse_date. The open-ended last histogram bucket has an empty
// bucket_end_days.

inline constexpr const char* kPatientsFile = "patients.csv";
inline constexpr const char* kPsaFile = "psa.csv";
inline constexpr const char* kTreatmentsFile = "treatments.csv";
inline constexpr const char* kTruthFile = "truth.csv";
inline constexpr const char* kDetectionsFile = "detected_treatments.csv";
inline constexpr const char* kBcrEventsFile = "bcr_events.csv";
inline constexpr const char* kHistogramFile = "time_to_relapse.csv";
inline constexpr const char* kGradeHistogramFile = "time_to_relapse_by_grade.csv";
inline constexpr const char* kMetricsFile = "metrics.txt";

struct CohortFiles {
    std::filesystem::path patients;
    std::filesystem::path psa;
    std::filesystem::path treatments;
    std::optional<std::filesystem::path> truth;

    // Standard names inside dir; truth is set only when truth.csv exists.
    static CohortFiles in_dir(const std::filesystem::path& dir);
};

struct Cohort {
    std::vector<PatientTimeline> timelines;  // patients.csv order
    std::optional<GroundTruth> truth;
};

// Throws FileError(ParseError) for malformed rows, FileError(OrphanRow) for
// PSA/treatment rows of unknown patients and FileError(IoError) for
// unreadable files.
Cohort read_cohort(const CohortFiles& files);
Cohort read_cohort_dir(const std::filesystem::path& dir);
GroundTruth read_truth(const std::filesystem::path& path);
std::vector<BcrEvent> read_bcr_events(const std::filesystem::path& path);

// Renderers. Rows are ordered by patient_id then date; same-day rows keep
// their order.
std::string format_patients(std::span<const PatientTimeline> cohort);
std::string format_psa(std::span<const PatientTimeline> cohort);
std::string format_treatments(std::span<const PatientTimeline> cohort);
std::string format_truth(const GroundTruth& truth);
std::string format_detections(std::span<const DetectedTreatment> detections);
std::string format_bcr_events(std::span<const BcrEvent> events);
std::string format_histogram(const Histogram& h);
std::string format_grade_histograms(const std::map<int, Histogram>& by_grade);

using MetricEntries = std::vector<std::pair<std::string, std::string>>;

MetricEntries metric_entries(const RuleConfig& cfg);
void append_entries(MetricEntries& out, const DtxMetrics& m);
void append_entries(MetricEntries& out, const BcrMetrics& m);
void append_entries(MetricEntries& out, const RecoveryMetrics& m);
std::string format_metrics(const MetricEntries& entries);

// Throws FileError(IoError) naming the path.
void write_text_file(const std::filesystem::path& path, const std::string& contents);

void write_cohort(const std::filesystem::path& dir, std::span<const PatientTimeline> cohort,
                  const GroundTruth* truth = nullptr);

struct OutputSet {
    std::optional<std::vector<DetectedTreatment>> detections;
    std::optional<std::vector<BcrEvent>> bcr_events;
    std::optional<MetricEntries> metrics;
    std::optional<RelapseReport> report;
};

// Writes whichever parts are present; returns the paths written.
std::vector<std::filesystem::path> write_outputs(const OutputSet& outputs, const std::filesystem::path& out_dir);

}  // namespace psaflow::io
