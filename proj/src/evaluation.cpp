#include "psaflow/evaluation.hpp"

#include <algorithm>
#include <cstdlib>
#include <stdexcept>
#include <string>
#include <unordered_map>

#include "psaflow/errors.hpp"

namespace psaflow {

namespace {

double ratio(std::size_t num, std::size_t den) { return den ? double(num) / double(den) : 0.0; }

struct RowTally {
    std::size_t available = 0;
    std::size_t matched = 0;
    std::size_t true_class = 0;
    std::size_t new_estimated = 0;

    DtxRow finish() const {
        DtxRow row;
        row.available_ctx = available;
        row.estimated_ctx = matched + new_estimated;
        row.matched = {matched, ratio(matched, available)};
        row.true_class = {true_class, ratio(true_class, matched)};
        row.false_class = {matched - true_class, ratio(matched - true_class, matched)};
        row.new_estimated = {new_estimated, ratio(new_estimated, available)};
        return row;
    }
};

std::unordered_map<std::string, const PatientTimeline*> index_cohort(std::span<const PatientTimeline> cohort) {
    std::unordered_map<std::string, const PatientTimeline*> by_id;
    for (const auto& t : cohort) {
        by_id.emplace(t.patient_id(), &t);
    }
    return by_id;
}

}  // namespace

DtxMetrics score_detections(std::span<const PatientTimeline> cohort, std::span<const DetectedTreatment> detections) {
    RowTally rp;
    RowTally rt;
    auto tally_for = [&](TreatmentKind k) -> RowTally& { return k == TreatmentKind::RP ? rp : rt; };

    for (const auto& t : cohort) {
        for (const auto& e : t.treatments()) {
            if (is_curative(e.kind) && e.provenance == Provenance::recorded) {
                ++tally_for(e.kind).available;
            }
        }
    }

    auto by_id = index_cohort(cohort);
    // Records already claimed, keyed by (patient, treatment index).
    std::unordered_map<std::string, std::vector<bool>> used;

    for (const auto& d : detections) {
        const TreatmentEvent* match = nullptr;
        if (auto it = by_id.find(d.patient_id); it != by_id.end()) {
            auto tx = it->second->treatments();
            auto& claimed = used[d.patient_id];
            claimed.resize(tx.size(), false);
            for (std::size_t i = 0; i < tx.size(); ++i) {
                const auto& e = tx[i];
                if (!claimed[i] && is_curative(e.kind) && e.provenance == Provenance::recorded &&
                    e.date >= d.date && e.date <= d.nadir_date) {
                    claimed[i] = true;
                    match = &e;
                    break;
                }
            }
        }
        if (match) {
            auto& row = tally_for(match->kind);
            ++row.matched;
            if (match->kind == d.kind) {
                ++row.true_class;
            }
        } else {
            ++tally_for(d.kind).new_estimated;
        }
    }

    RowTally all;
    for (const auto* r : {&rp, &rt}) {
        all.available += r->available;
        all.matched += r->matched;
        all.true_class += r->true_class;
        all.new_estimated += r->new_estimated;
    }
    return {all.finish(), rp.finish(), rt.finish()};
}

DtxMetrics evaluate_dtx(std::span<const PatientTimeline> cohort, DropMode drops, const RuleConfig& cfg) {
    auto detections = detect_missing_treatments(cohort, DtxMode::evaluate, drops, cfg);
    return score_detections(cohort, detections);
}

BcrMetrics score_bcr(std::span<const BcrEvent> events, std::span<const PatientTimeline> cohort,
                     const GroundTruth& truth, int tolerance_days) {
    std::unordered_map<std::string, const PatientTruth*> truth_by_id;
    for (const auto& p : truth.patients) {
        truth_by_id.emplace(p.patient_id, &p);
    }
    for (const auto& t : cohort) {
        if (!truth_by_id.count(t.patient_id())) {
            throw Error(ErrorKind::MissingTruth, "no truth record for patient '" + t.patient_id() + "'");
        }
    }

    BcrMetrics m;
    std::unordered_map<std::string, bool> hit;
    std::vector<int> errors;
    for (const auto& e : events) {
        ++m.detected;
        ++m.by_source[static_cast<std::size_t>(e.source)];
        auto it = truth_by_id.find(e.patient_id);
        if (it == truth_by_id.end()) {
            throw Error(ErrorKind::MissingTruth, "no truth record for patient '" + e.patient_id + "'");
        }
        const auto& p = *it->second;
        if (p.relapsed && p.relapse_date) {
            const int err = std::abs(elapsed_days(*p.relapse_date, e.bcr_date));
            if (err <= tolerance_days) {
                ++m.true_positives;
                hit[e.patient_id] = true;
                errors.push_back(err);
                continue;
            }
        }
        ++m.false_positives;
    }
    for (const auto& t : cohort) {
        const auto& p = *truth_by_id.at(t.patient_id());
        if (p.relapsed) {
            ++m.relapsed_in_truth;
            if (!hit.count(p.patient_id)) {
                ++m.misses;
            }
        }
    }
    if (!errors.empty()) {
        std::sort(errors.begin(), errors.end());
        const std::size_t n = errors.size();
        m.median_abs_date_error_days =
            n % 2 ? double(errors[n / 2]) : 0.5 * (double(errors[n / 2 - 1]) + double(errors[n / 2]));
    }
    return m;
}

BcrMetrics evaluate_bcr(std::span<const PatientTimeline> cohort, const GroundTruth& truth, const BcrOptions& opts,
                        const RuleConfig& cfg, int tolerance_days) {
    auto events = detect_bcr_cohort(cohort, opts, cfg);
    return score_bcr(events, cohort, truth, tolerance_days);
}

RecoveryMetrics evaluate_recovery(std::span<const PatientTimeline> cohort, const GroundTruth& truth,
                                  std::span<const DetectedTreatment> detections) {
    std::unordered_map<std::string, std::vector<const DetectedTreatment*>> by_patient;
    for (const auto& d : detections) {
        by_patient[d.patient_id].push_back(&d);
    }
    RecoveryMetrics m;
    for (const auto& t : cohort) {
        const auto* p = truth.find(t.patient_id());
        if (!p || !p->masked || !adequately_sampled(t, *p)) {
            continue;
        }
        ++m.eligible;
        for (const auto* d : by_patient[t.patient_id()]) {
            if (p->treatment_date >= d->date && p->treatment_date <= d->nadir_date) {
                ++m.recovered;
                if (d->kind == p->treatment_kind) {
                    ++m.correctly_classified;
                }
                break;
            }
        }
    }
    return m;
}

std::size_t Histogram::total() const {
    std::size_t n = 0;
    for (auto c : counts) {
        n += c;
    }
    return n;
}

RelapseReport time_to_relapse_report(std::span<const BcrEvent> events, std::span<const PatientTimeline> cohort,
                                     int bucket_days, std::size_t n_buckets) {
    if (bucket_days < 1 || n_buckets < 1) {
        throw std::invalid_argument("time_to_relapse_report: bucket_days and n_buckets must be positive");
    }
    auto empty = [&] { return Histogram{bucket_days, std::vector<std::size_t>(n_buckets, 0)}; };
    auto add = [&](Histogram& h, int days) {
        auto idx = static_cast<std::size_t>(std::max(0, days) / bucket_days);
        ++h.counts[std::min(idx, n_buckets - 1)];
    };

    RelapseReport report{empty(), {}};
    auto by_id = index_cohort(cohort);
    bool any_grade = false;
    for (const auto& e : events) {
        add(report.overall, e.time_to_relapse_days);
        auto it = by_id.find(e.patient_id);
        if (it == by_id.end() || !it->second->grade_group()) {
            continue;
        }
        if (!any_grade) {
            for (int g = 1; g <= 5; ++g) {
                report.by_grade_group.emplace(g, empty());
            }
            any_grade = true;
        }
        add(report.by_grade_group.at(*it->second->grade_group()), e.time_to_relapse_days);
    }
    return report;
}

}  // namespace psaflow
