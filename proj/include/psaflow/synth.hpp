#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "psaflow/timeline.hpp"

namespace psaflow {

struct SynthConfig {
    std::size_t n_patients = 100;
    std::uint64_t seed = 42;
    double p_rp = 0.4;            // primary treatment is RP (else RT)
    double p_recurrence = 0.35;   // patient relapses after the primary treatment
    double p_secondary = 0.4;     // a relapse shows as secondary treatment, not PSA rise
    double noise_sd = 0.0;        // log-scale sd of multiplicative assay noise
    int sampling_interval_days = 90;
    double p_mask = 0.0;          // each curative record withheld independently

    bool operator==(const SynthConfig&) const = default;
};

// Throws Error(InvalidConfig) for out-of-range fields.
void validate(const SynthConfig& cfg);

enum class RelapseMechanism { none, psa, secondary };

std::string_view to_string(RelapseMechanism m);
std::optional<RelapseMechanism> parse_relapse_mechanism(std::string_view s);

struct PatientTruth {
    std::string patient_id;
    TreatmentKind treatment_kind = TreatmentKind::RP;
    Date treatment_date;
    bool relapsed = false;
    std::optional<Date> relapse_date;
    RelapseMechanism mechanism = RelapseMechanism::none;
    bool masked = false;

    bool operator==(const PatientTruth&) const = default;
};

struct GroundTruth {
    std::vector<PatientTruth> patients;

    const PatientTruth* find(std::string_view patient_id) const;
    bool operator==(const GroundTruth&) const = default;
};

struct SyntheticCohort {
    std::vector<PatientTimeline> timelines;
    GroundTruth truth;
};

// Pure function of cfg. Every patient is diagnosed, has a rising PSA phase
// up to one curative treatment, a post-treatment phase shaped by the
// treatment kind (RP: < 0.1 ng/mL; RT: nadir in [0.2, 1.5] ng/mL) and, when
// relapsing, either a PSA rise across the guideline threshold or a
// secondary treatment matching the clinical-relapse patterns.
SyntheticCohort generate_cohort(const SynthConfig& cfg);

// Withholds each RP/RT record independently with probability p_mask. PSA is
// untouched; the truth keeps the withheld treatment and flags a patient as
// masked when its primary treatment record was withheld.
SyntheticCohort mask_treatments(SyntheticCohort cohort, double p_mask, std::uint64_t seed);

// At least one draw in the year before the treatment (on/after diagnosis)
// and at least one draw after it.
bool adequately_sampled(const PatientTimeline& t, const PatientTruth& truth);

}  // namespace psaflow
