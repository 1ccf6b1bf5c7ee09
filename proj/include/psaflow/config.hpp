#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace psaflow {

// Every threshold and duration the detectors use. Defaults follow the
// EAU-guideline values and the drop-significance cutoffs; durations are
// fixed day counts (12 months = 365 d, 6 months = 183 d, ...).
struct RuleConfig {
    int one_year_days = 365;
    int six_months_days = 183;
    int two_years_days = 730;
    int three_years_days = 1095;

    // Peak staleness, look-ahead and nadir-extension window of the drop scan.
    int drop_window_days = 365;

    // A drop is significant when (alpha >= strong_alpha and beta >= strong_beta)
    // or (alpha >= weak_alpha and beta >= weak_beta).
    double strong_alpha = 0.75;
    double strong_beta_ng_ml = 3.0;
    double weak_alpha = 0.5;
    double weak_beta_ng_ml = 4.0;

    // Nadir strictly below this is read as prostatectomy, otherwise radiation.
    double rp_nadir_cutoff_ng_ml = 0.1;

    double prp_threshold_ultrasensitive_ng_ml = 0.2;
    double prp_threshold_standard_ng_ml = 0.4;
    double prt_rise_above_nadir_ng_ml = 2.0;

    bool operator==(const RuleConfig&) const = default;
};

// name=value pairs in a fixed order, as echoed into metrics reports.
std::vector<std::pair<std::string, std::string>> describe(const RuleConfig& cfg);

// Applies one override. Throws Error(InvalidConfig) for unknown names,
// unparsable values or negative durations.
void set_rule_value(RuleConfig& cfg, std::string_view name, std::string_view value);

// Reads `name=value` lines; `#` starts a comment, blank lines are ignored.
// Unset names keep their defaults.
RuleConfig load_rule_config(const std::filesystem::path& path);
RuleConfig parse_rule_config(std::string_view text, const std::string& origin = "<config>");

}  // namespace psaflow
