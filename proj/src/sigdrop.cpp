#include "psaflow/sigdrop.hpp"

#include "psaflow/errors.hpp"

namespace psaflow {

namespace {

struct DropScanState {
    double peak_value;
    Date peak_date;
};

struct ScanHit {
    SignificantDrop drop;
    std::size_t nadir_index;
};

void require_sorted(std::span<const PsaMeasurement> psa) {
    for (std::size_t i = 1; i < psa.size(); ++i) {
        if (psa[i].date < psa[i - 1].date) {
            throw Error(ErrorKind::UnsortedSeries,
                        "PSA dates decrease at position " + std::to_string(i) + " (" + format_date(psa[i - 1].date) +
                            " then " + format_date(psa[i].date) + ")");
        }
    }
}

// One pass of the drop scan starting at psa[start], which seeds the peak.
std::optional<ScanHit> scan_from(std::span<const PsaMeasurement> psa, std::size_t start, const RuleConfig& cfg) {
    const std::size_t n = psa.size();
    if (start >= n || n - start < 2) {
        return std::nullopt;
    }
    const int window = cfg.drop_window_days;
    DropScanState state{psa[start].value_ng_ml, psa[start].date};
    auto reset_to = [&](const PsaMeasurement& m) { state = {m.value_ng_ml, m.date}; };

    for (std::size_t j = start; j + 1 < n; ++j) {
        const auto& prev = psa[j];
        const auto& cand = psa[j + 1];
        const bool stale = elapsed_days(state.peak_date, cand.date) > window;

        if (prev.value_ng_ml - cand.value_ng_ml <= 0.0) {
            if (cand.value_ng_ml > state.peak_value || stale) {
                reset_to(cand);
            }
            continue;
        }

        // A same-day fall cannot open a drop: drop_date must precede nadir_date.
        if (cand.date > state.peak_date && is_significant(state.peak_value, cand.value_ng_ml, cfg)) {
            std::size_t nadir = j + 1;
            for (std::size_t k = j + 2; k < n; ++k) {
                if (psa[k].value_ng_ml > psa[k - 1].value_ng_ml) break;
                if (elapsed_days(cand.date, psa[k].date) > window) break;
                if (psa[k].value_ng_ml < psa[nadir].value_ng_ml) nadir = k;
            }
            return ScanHit{{state.peak_date, psa[nadir].date, psa[nadir].value_ng_ml, state.peak_value}, nadir};
        }

        if (stale) {
            reset_to(cand);
        } else if (j + 2 < n && elapsed_days(state.peak_date, psa[j + 2].date) > window) {
            reset_to(cand);
        }
    }
    return std::nullopt;
}

}  // namespace

DropMagnitude drop_magnitude(double peak_value, double candidate_value) {
    if (peak_value == 0.0) {
        throw Error(ErrorKind::ZeroPeak, "drop fraction undefined for a zero peak");
    }
    const double beta = peak_value - candidate_value;
    return {beta, beta / peak_value};
}

bool is_significant(double peak_value, double candidate_value, const RuleConfig& cfg) {
    auto [beta, alpha] = drop_magnitude(peak_value, candidate_value);
    return (alpha >= cfg.strong_alpha && beta >= cfg.strong_beta_ng_ml) ||
           (alpha >= cfg.weak_alpha && beta >= cfg.weak_beta_ng_ml);
}

std::optional<SignificantDrop> detect_significant_drop(std::span<const PsaMeasurement> psa, const RuleConfig& cfg) {
    require_sorted(psa);
    if (auto hit = scan_from(psa, 0, cfg)) {
        return hit->drop;
    }
    return std::nullopt;
}

std::vector<SignificantDrop> detect_all_drops(std::span<const PsaMeasurement> psa, const RuleConfig& cfg) {
    require_sorted(psa);
    std::vector<SignificantDrop> drops;
    std::size_t start = 0;
    while (auto hit = scan_from(psa, start, cfg)) {
        drops.push_back(hit->drop);
        // Skip same-day repeats of the nadir so intervals stay disjoint.
        start = hit->nadir_index + 1;
        while (start < psa.size() && psa[start].date == hit->drop.nadir_date) {
            ++start;
        }
    }
    return drops;
}

std::vector<SignificantDrop> detect_drops(std::span<const PsaMeasurement> psa, DropMode mode, const RuleConfig& cfg) {
    if (mode == DropMode::all) {
        return detect_all_drops(psa, cfg);
    }
    std::vector<SignificantDrop> out;
    if (auto d = detect_significant_drop(psa, cfg)) {
        out.push_back(*d);
    }
    return out;
}

}  // namespace psaflow
