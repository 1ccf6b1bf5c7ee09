#pragma once

#include <array>
#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "psaflow/config.hpp"
#include "psaflow/dbcr.hpp"
#include "psaflow/dtx.hpp"
#include "psaflow/synth.hpp"
#include "psaflow/timeline.hpp"

namespace psaflow {

struct CountFraction {
    std::size_t count = 0;
    double fraction = 0.0;

    bool operator==(const CountFraction&) const = default;
};

// One row of the detection-vs-records table.
//   matched / available, true_class / matched, false_class / matched,
//   new_estimated / available
// Matched detections are attributed to the recorded kind, unmatched ones to
// the detected kind, so estimated = matched + new holds per row.
struct DtxRow {
    std::size_t available_ctx = 0;
    std::size_t estimated_ctx = 0;
    CountFraction matched;
    CountFraction true_class;
    CountFraction false_class;
    CountFraction new_estimated;

    bool operator==(const DtxRow&) const = default;
};

struct DtxMetrics {
    DtxRow overall;
    DtxRow rp;
    DtxRow rt;

    bool operator==(const DtxMetrics&) const = default;
};

// Scores detections against the recorded RP/RT events of the cohort. A
// detection matches a record of its patient dated within [date, nadir_date];
// each record matches at most one detection.
DtxMetrics score_detections(std::span<const PatientTimeline> cohort, std::span<const DetectedTreatment> detections);

// Runs detection in evaluate mode and scores it.
DtxMetrics evaluate_dtx(std::span<const PatientTimeline> cohort, DropMode drops = DropMode::first,
                        const RuleConfig& cfg = {});

struct BcrMetrics {
    std::size_t detected = 0;
    std::array<std::size_t, 4> by_source{};  // indexed by BcrSource
    std::size_t true_positives = 0;
    std::size_t false_positives = 0;
    std::size_t misses = 0;
    std::optional<double> median_abs_date_error_days;  // over true positives
    std::size_t relapsed_in_truth = 0;

    std::size_t count(BcrSource s) const { return by_source[static_cast<std::size_t>(s)]; }
    bool operator==(const BcrMetrics&) const = default;
};

inline constexpr int kDefaultBcrToleranceDays = 60;

// A detection within +-tolerance of the true relapse date is a true
// positive; any other detection is a false positive; a true relapse without
// a true-positive detection is a miss. Throws Error(MissingTruth) when a
// cohort patient has no truth record.
BcrMetrics score_bcr(std::span<const BcrEvent> events, std::span<const PatientTimeline> cohort,
                     const GroundTruth& truth, int tolerance_days = kDefaultBcrToleranceDays);

BcrMetrics evaluate_bcr(std::span<const PatientTimeline> cohort, const GroundTruth& truth,
                        const BcrOptions& opts = {}, const RuleConfig& cfg = {},
                        int tolerance_days = kDefaultBcrToleranceDays);

// Recovery of withheld treatments: over masked, adequately sampled patients,
// how many have a detection whose window holds the true treatment date and
// how many of those carry the true kind.
struct RecoveryMetrics {
    std::size_t eligible = 0;
    std::size_t recovered = 0;
    std::size_t correctly_classified = 0;

    double recovery_rate() const { return eligible ? double(recovered) / double(eligible) : 0.0; }
    double classification_accuracy() const {
        return recovered ? double(correctly_classified) / double(recovered) : 0.0;
    }
    bool operator==(const RecoveryMetrics&) const = default;
};

RecoveryMetrics evaluate_recovery(std::span<const PatientTimeline> cohort, const GroundTruth& truth,
                                  std::span<const DetectedTreatment> detections);

// Bucket i covers [i * bucket_days, (i + 1) * bucket_days); the last bucket
// is open-ended.
struct Histogram {
    int bucket_days = 183;
    std::vector<std::size_t> counts;

    std::size_t total() const;
    bool operator==(const Histogram&) const = default;
};

struct RelapseReport {
    Histogram overall;
    std::map<int, Histogram> by_grade_group;  // empty when no event has a grade group
};

inline constexpr std::size_t kDefaultBucketCount = 20;

RelapseReport time_to_relapse_report(std::span<const BcrEvent> events, std::span<const PatientTimeline> cohort,
                                     int bucket_days = 183, std::size_t n_buckets = kDefaultBucketCount);

}  // namespace psaflow
