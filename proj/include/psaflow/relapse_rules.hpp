#pragma once

#include <optional>

#include "psaflow/config.hpp"
#include "psaflow/timeline.hpp"

namespace psaflow {

// The four per-patient relapse detectors. "After" a treatment always means
// strictly later than its date; PSA drawn on the treatment day is ignored.
// Every detector returns nullopt when its primary treatment is absent.

// First PSA after the first RP above 0.2 ng/mL (ultrasensitive assay) or
// 0.4 ng/mL (standard assay).
std::optional<Date> psa_relapse_after_rp(const PatientTimeline& t, const RuleConfig& cfg = {});

// First PSA after the first RT rising more than 2 ng/mL above the running
// nadir of the post-RT series.
std::optional<Date> psa_relapse_after_rt(const PatientTimeline& t, const RuleConfig& cfg = {});

// Relapse after RP signalled by salvage RT or hormonal/chemotherapy.
std::optional<Date> clinical_relapse_after_rp(const PatientTimeline& t, const RuleConfig& cfg = {});

struct CrtClauses {
    // Clause "HT/CT more than three years after RT". It is implied by the
    // six-month clause; switchable only to check that it changes nothing.
    bool long_gap_htct = true;
};

// Relapse after RT signalled by later RP, a second RT or hormonal/chemotherapy.
std::optional<Date> clinical_relapse_after_rt(const PatientTimeline& t, const RuleConfig& cfg = {},
                                              CrtClauses clauses = {});

}  // namespace psaflow
