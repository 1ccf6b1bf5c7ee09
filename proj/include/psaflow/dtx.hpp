#pragma once

#include <span>
#include <string>
#include <vector>

#include "psaflow/config.hpp"
#include "psaflow/sigdrop.hpp"
#include "psaflow/timeline.hpp"

namespace psaflow {

// A curative treatment inferred from a significant PSA drop.
struct DetectedTreatment {
    std::string patient_id;
    TreatmentKind kind = TreatmentKind::RT;  // RP or RT only
    Date date;                               // the drop date
    Date nadir_date;
    double psa_min = 0.0;

    bool operator==(const DetectedTreatment&) const = default;
};

// impute: skip drops whose window already holds a curative treatment.
// evaluate: report every drop so detections can be matched to records.
enum class DtxMode { impute, evaluate };

// RP when the nadir is strictly below the cutoff, RT otherwise.
TreatmentKind classify_drop(double psa_min, const RuleConfig& cfg = {});

// Whether any RP/RT event lies in [start, end]. HT/CT never count.
// Throws Error(InvalidWindow) when start > end.
bool curative_treatment_in_window(const PatientTimeline& t, Date start, Date end);

// PSA measurements dated on or after the diagnosis date (all of them when
// the diagnosis date is unknown).
std::span<const PsaMeasurement> post_diagnosis_psa(const PatientTimeline& t);

std::vector<DetectedTreatment> detect_treatments(const PatientTimeline& t, DtxMode mode,
                                                 DropMode drops = DropMode::first, const RuleConfig& cfg = {});

// Output order follows cohort order.
std::vector<DetectedTreatment> detect_missing_treatments(std::span<const PatientTimeline> cohort, DtxMode mode,
                                                         DropMode drops = DropMode::first,
                                                         const RuleConfig& cfg = {});

TreatmentEvent to_imputed_event(const DetectedTreatment& d);

// Cohort with each patient's detections added as imputed treatments.
std::vector<PatientTimeline> apply_imputations(std::span<const PatientTimeline> cohort,
                                               std::span<const DetectedTreatment> detections);

}  // namespace psaflow
