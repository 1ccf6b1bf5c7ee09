#include "psaflow/relapse_rules.hpp"

#include <algorithm>
#include <vector>

namespace psaflow {

namespace {

std::span<const PsaMeasurement> psa_after(const PatientTimeline& t, Date d) {
    auto psa = t.psa();
    auto first = std::upper_bound(psa.begin(), psa.end(), d, [](Date x, const PsaMeasurement& m) { return x < m.date; });
    return psa.subspan(static_cast<std::size_t>(first - psa.begin()));
}

std::optional<Date> earliest(const std::vector<Date>& candidates) {
    if (candidates.empty()) {
        return std::nullopt;
    }
    return *std::min_element(candidates.begin(), candidates.end());
}

}  // namespace

std::optional<Date> psa_relapse_after_rp(const PatientTimeline& t, const RuleConfig& cfg) {
    auto rp = first_date(t, kRP);
    if (!rp) {
        return std::nullopt;
    }
    for (const auto& m : psa_after(t, *rp)) {
        const double threshold = m.assay == Assay::ultrasensitive ? cfg.prp_threshold_ultrasensitive_ng_ml
                                                                  : cfg.prp_threshold_standard_ng_ml;
        if (m.value_ng_ml > threshold) {
            return m.date;
        }
    }
    return std::nullopt;
}

std::optional<Date> psa_relapse_after_rt(const PatientTimeline& t, const RuleConfig& cfg) {
    auto rt = first_date(t, kRT);
    if (!rt) {
        return std::nullopt;
    }
    auto series = psa_after(t, *rt);
    if (series.empty()) {
        return std::nullopt;
    }
    double nadir = std::max_element(series.begin(), series.end(), [](const auto& a, const auto& b) {
                       return a.value_ng_ml < b.value_ng_ml;
                   })->value_ng_ml;
    for (const auto& m : series) {
        if (nadir > m.value_ng_ml) {
            nadir = m.value_ng_ml;
        }
        if (m.value_ng_ml - nadir > cfg.prt_rise_above_nadir_ng_ml) {
            return m.date;
        }
    }
    return std::nullopt;
}

std::optional<Date> clinical_relapse_after_rp(const PatientTimeline& t, const RuleConfig& cfg) {
    auto first_rp = first_date(t, kRP);
    if (!first_rp) {
        return std::nullopt;
    }
    std::vector<Date> candidates;
    auto last_rt = last_date(t, kRT);
    auto last_htct = last_date(t, kHTCT);
    const bool htct_after_rp = last_htct && *last_htct > *first_rp;

    if (last_rt && *last_rt > *first_rp) {
        if (elapsed_days(*first_rp, *last_rt) > cfg.one_year_days) {
            if (auto d = first_date_after(t, kRT, *first_rp, cfg.one_year_days, GapRule::strict)) {
                candidates.push_back(*d);
            }
        }
        // The guard asks for two years but the added date only needs one.
        if (htct_after_rp && elapsed_days(*first_rp, *last_htct) >= cfg.two_years_days) {
            if (auto d = first_date_after(t, kHTCT, *first_rp, cfg.one_year_days, GapRule::strict)) {
                candidates.push_back(*d);
            }
        }
    } else if (htct_after_rp) {
        if (auto d = first_date_after(t, kHTCT, *first_rp, 0, GapRule::strict)) {
            candidates.push_back(*d);
        }
    }
    return earliest(candidates);
}

std::optional<Date> clinical_relapse_after_rt(const PatientTimeline& t, const RuleConfig& cfg, CrtClauses clauses) {
    auto first_rt = first_date(t, kRT);
    if (!first_rt) {
        return std::nullopt;
    }
    std::vector<Date> candidates;

    auto last_rp = last_date(t, kRP);
    if (last_rp && *last_rp > *first_rt) {
        if (auto d = first_date_after(t, kRP, *first_rt, 0, GapRule::strict)) {
            candidates.push_back(*d);
        }
    }

    auto second_rt = second_date(t, kRT);
    if (second_rt && elapsed_days(*first_rt, *second_rt) > cfg.one_year_days) {
        candidates.push_back(*second_rt);
    }

    if (auto first_htct = first_date(t, kHTCT)) {
        const int gap = elapsed_days(*first_rt, *first_htct);
        if (gap >= cfg.six_months_days) {
            candidates.push_back(*first_htct);
        }
        if (clauses.long_gap_htct && gap > cfg.three_years_days) {
            candidates.push_back(*first_htct);
        }
    }
    return earliest(candidates);
}

}  // namespace psaflow
