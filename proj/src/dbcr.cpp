#include "psaflow/dbcr.hpp"

#include <array>
#include <utility>

namespace psaflow {

std::string_view to_string(BcrSource s) {
    switch (s) {
        case BcrSource::PRP: return "PRP";
        case BcrSource::CRP: return "CRP";
        case BcrSource::PRT: return "PRT";
        case BcrSource::CRT: return "CRT";
    }
    return "?";
}

std::optional<BcrSource> parse_bcr_source(std::string_view s) {
    if (s == "PRP") return BcrSource::PRP;
    if (s == "CRP") return BcrSource::CRP;
    if (s == "PRT") return BcrSource::PRT;
    if (s == "CRT") return BcrSource::CRT;
    return std::nullopt;
}

namespace {

const PatientTimeline& rules_view(const PatientTimeline& t, const BcrOptions& opts, PatientTimeline& storage) {
    if (opts.include_imputed) {
        return t;
    }
    for (const auto& e : t.treatments()) {
        if (e.provenance == Provenance::imputed) {
            storage = without_imputed(t);
            return storage;
        }
    }
    return t;
}

BcrCandidates candidates_for(const PatientTimeline& t, const BcrOptions& opts, const RuleConfig& cfg) {
    BcrCandidates c;
    c.prp = psa_relapse_after_rp(t, cfg);
    c.prt = psa_relapse_after_rt(t, cfg);
    if (!opts.psa_only) {
        c.crp = clinical_relapse_after_rp(t, cfg);
        c.crt = clinical_relapse_after_rt(t, cfg, opts.crt_clauses);
    }
    return c;
}

}  // namespace

BcrCandidates bcr_candidates(const PatientTimeline& t, const BcrOptions& opts, const RuleConfig& cfg) {
    PatientTimeline storage;
    return candidates_for(rules_view(t, opts, storage), opts, cfg);
}

std::optional<ConsolidatedDate> consolidate(const BcrCandidates& c) {
    const std::array<std::pair<const std::optional<Date>*, BcrSource>, 4> ordered{{
        {&c.prp, BcrSource::PRP},
        {&c.crp, BcrSource::CRP},
        {&c.prt, BcrSource::PRT},
        {&c.crt, BcrSource::CRT},
    }};
    std::optional<ConsolidatedDate> best;
    for (const auto& [date, source] : ordered) {
        if (*date && (!best || **date < best->date)) {
            best = ConsolidatedDate{**date, source};
        }
    }
    return best;
}

std::optional<BcrEvent> detect_bcr(const PatientTimeline& t, const BcrOptions& opts, const RuleConfig& cfg) {
    PatientTimeline storage;
    const auto& view = rules_view(t, opts, storage);
    auto first_curative = first_date(view, kCurative);
    if (!first_curative) {
        return std::nullopt;
    }
    auto best = consolidate(candidates_for(view, opts, cfg));
    if (!best) {
        return std::nullopt;
    }
    return BcrEvent{t.patient_id(), best->date, best->source, elapsed_days(*first_curative, best->date)};
}

std::vector<BcrEvent> detect_bcr_cohort(std::span<const PatientTimeline> cohort, const BcrOptions& opts,
                                        const RuleConfig& cfg) {
    std::vector<BcrEvent> out;
    for (const auto& t : cohort) {
        if (auto e = detect_bcr(t, opts, cfg)) {
            out.push_back(std::move(*e));
        }
    }
    return out;
}

}  // namespace psaflow
