#include "psaflow/dtx.hpp"

#include <algorithm>
#include <unordered_map>

#include "psaflow/errors.hpp"

namespace psaflow {

TreatmentKind classify_drop(double psa_min, const RuleConfig& cfg) {
    return psa_min < cfg.rp_nadir_cutoff_ng_ml ? TreatmentKind::RP : TreatmentKind::RT;
}

bool curative_treatment_in_window(const PatientTimeline& t, Date start, Date end) {
    if (start > end) {
        throw Error(ErrorKind::InvalidWindow, format_date(start) + " is after " + format_date(end));
    }
    return std::any_of(t.treatments().begin(), t.treatments().end(), [&](const TreatmentEvent& e) {
        return is_curative(e.kind) && e.date >= start && e.date <= end;
    });
}

std::span<const PsaMeasurement> post_diagnosis_psa(const PatientTimeline& t) {
    auto psa = t.psa();
    if (!t.diagnosis_date()) {
        return psa;
    }
    auto first = std::lower_bound(psa.begin(), psa.end(), *t.diagnosis_date(),
                                  [](const PsaMeasurement& m, Date d) { return m.date < d; });
    return psa.subspan(static_cast<std::size_t>(first - psa.begin()));
}

std::vector<DetectedTreatment> detect_treatments(const PatientTimeline& t, DtxMode mode, DropMode drops,
                                                 const RuleConfig& cfg) {
    std::vector<DetectedTreatment> out;
    for (const auto& drop : detect_drops(post_diagnosis_psa(t), drops, cfg)) {
        if (mode == DtxMode::impute && curative_treatment_in_window(t, drop.drop_date, drop.nadir_date)) {
            continue;
        }
        out.push_back({t.patient_id(), classify_drop(drop.psa_min, cfg), drop.drop_date, drop.nadir_date, drop.psa_min});
    }
    return out;
}

std::vector<DetectedTreatment> detect_missing_treatments(std::span<const PatientTimeline> cohort, DtxMode mode,
                                                         DropMode drops, const RuleConfig& cfg) {
    std::vector<DetectedTreatment> out;
    for (const auto& t : cohort) {
        auto found = detect_treatments(t, mode, drops, cfg);
        out.insert(out.end(), found.begin(), found.end());
    }
    return out;
}

TreatmentEvent to_imputed_event(const DetectedTreatment& d) {
    return {d.patient_id, d.date, d.kind, Provenance::imputed};
}

std::vector<PatientTimeline> apply_imputations(std::span<const PatientTimeline> cohort,
                                               std::span<const DetectedTreatment> detections) {
    std::unordered_map<std::string, std::vector<TreatmentEvent>> by_patient;
    for (const auto& d : detections) {
        by_patient[d.patient_id].push_back(to_imputed_event(d));
    }
    std::vector<PatientTimeline> out;
    out.reserve(cohort.size());
    for (const auto& t : cohort) {
        auto it = by_patient.find(t.patient_id());
        out.push_back(it == by_patient.end() ? t : with_treatments(t, it->second));
    }
    return out;
}

}  // namespace psaflow
