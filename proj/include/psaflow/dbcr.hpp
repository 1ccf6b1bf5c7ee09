#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "psaflow/config.hpp"
#include "psaflow/relapse_rules.hpp"
#include "psaflow/timeline.hpp"

namespace psaflow {

// Declaration order is the tie-break order for equal candidate dates.
enum class BcrSource { PRP, CRP, PRT, CRT };

std::string_view to_string(BcrSource s);
std::optional<BcrSource> parse_bcr_source(std::string_view s);

constexpr bool is_psa_based(BcrSource s) noexcept { return s == BcrSource::PRP || s == BcrSource::PRT; }

struct BcrCandidates {
    std::optional<Date> prp;
    std::optional<Date> crp;
    std::optional<Date> prt;
    std::optional<Date> crt;

    bool operator==(const BcrCandidates&) const = default;
};

struct BcrEvent {
    std::string patient_id;
    Date bcr_date;
    BcrSource source = BcrSource::PRP;
    int time_to_relapse_days = 0;  // from the earliest curative treatment

    bool operator==(const BcrEvent&) const = default;
};

struct BcrOptions {
    bool include_imputed = true;  // imputed RP/RT count as primary treatments
    bool psa_only = false;        // disable CRP and CRT
    CrtClauses crt_clauses{};
};

BcrCandidates bcr_candidates(const PatientTimeline& t, const BcrOptions& opts = {}, const RuleConfig& cfg = {});

struct ConsolidatedDate {
    Date date;
    BcrSource source;
};

// Earliest candidate; ties resolve PRP, CRP, PRT, CRT.
std::optional<ConsolidatedDate> consolidate(const BcrCandidates& c);

// nullopt for patients without a curative treatment or without relapse.
std::optional<BcrEvent> detect_bcr(const PatientTimeline& t, const BcrOptions& opts = {}, const RuleConfig& cfg = {});

std::vector<BcrEvent> detect_bcr_cohort(std::span<const PatientTimeline> cohort, const BcrOptions& opts = {},
                                        const RuleConfig& cfg = {});

}  // namespace psaflow
