#pragma once

#include <optional>
#include <span>
#include <vector>

#include "psaflow/config.hpp"
#include "psaflow/timeline.hpp"

namespace psaflow {

// A significant fall of PSA from a peak to a nadir.
struct SignificantDrop {
    Date drop_date;    // date of the peak the fall starts from
    Date nadir_date;   // date of the lowest value the fall reaches
    double psa_min = 0.0;
    double peak_value = 0.0;

    bool operator==(const SignificantDrop&) const = default;
};

// beta = peak - candidate (ng/mL), alpha = beta / peak.
struct DropMagnitude {
    double beta = 0.0;
    double alpha = 0.0;
};

// Throws Error(ZeroPeak) when peak_value is 0 (alpha undefined).
DropMagnitude drop_magnitude(double peak_value, double candidate_value);

bool is_significant(double peak_value, double candidate_value, const RuleConfig& cfg = {});

enum class DropMode { first, all };

// Scans an ascending series for the first significant drop. Throws
// Error(UnsortedSeries) if dates decrease.
std::optional<SignificantDrop> detect_significant_drop(std::span<const PsaMeasurement> psa,
                                                       const RuleConfig& cfg = {});

// Every significant drop, restarting the scan at the first draw dated after
// each nadir.
std::vector<SignificantDrop> detect_all_drops(std::span<const PsaMeasurement> psa, const RuleConfig& cfg = {});

std::vector<SignificantDrop> detect_drops(std::span<const PsaMeasurement> psa, DropMode mode,
                                          const RuleConfig& cfg = {});

}  // namespace psaflow
