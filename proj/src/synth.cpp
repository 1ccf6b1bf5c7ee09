#include "psaflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <unordered_map>

#include "psaflow/errors.hpp"

namespace psaflow {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

std::mt19937_64 stream_for(std::uint64_t seed, std::uint64_t stream, std::size_t index) {
    return std::mt19937_64{splitmix64(splitmix64(seed ^ stream) + index)};
}

constexpr std::uint64_t kPatientStream = 0x70617469656e74ULL;
constexpr std::uint64_t kMaskStream = 0x6d61736bULL;

// Guideline levels the generated trajectories are built around.
constexpr double kPrpStandard = 0.4;
constexpr double kPrpUltrasensitive = 0.2;
constexpr double kPrtRise = 2.0;

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

std::string patient_name(std::size_t index) {
    std::string digits = std::to_string(index + 1);
    if (digits.size() < 5) {
        digits.insert(0, 5 - digits.size(), '0');
    }
    return "P" + digits;
}

class PatientBuilder {
public:
    PatientBuilder(const SynthConfig& cfg, std::size_t index)
        : cfg_(cfg), rng_(stream_for(cfg.seed, kPatientStream, index)), id_(patient_name(index)) {}

    std::pair<PatientTimeline, PatientTruth> build();

private:
    double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
    int uniform_int(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
    bool chance(double p) { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_) < p; }

    int next_gap() {
        const double base = cfg_.sampling_interval_days;
        return std::max(1, static_cast<int>(std::lround(base * uniform(0.7, 1.3))));
    }

    // Observed value: latent level with multiplicative log-normal noise. The
    // normal draw happens even at zero noise so the random stream, and with it
    // the cohort layout, does not depend on noise_sd.
    double observe(double latent) {
        const double z = std::normal_distribution<double>(0.0, 1.0)(rng_);
        return round3(latent * std::exp(cfg_.noise_sd * z));
    }

    void draw(Date d, double latent, Assay assay) {
        psa_.push_back({id_, d, observe(latent), assay});
    }

    void treat(Date d, TreatmentKind k) { tx_.push_back({id_, d, k, Provenance::recorded}); }

    const SynthConfig& cfg_;
    std::mt19937_64 rng_;
    std::string id_;
    std::vector<PsaMeasurement> psa_;
    std::vector<TreatmentEvent> tx_;
};

std::pair<PatientTimeline, PatientTruth> PatientBuilder::build() {
    const Date diagnosis = make_date(2005, 1, 1) + std::chrono::days{uniform_int(0, 2555)};
    const int grade = uniform_int(1, 5);
    const TreatmentKind kind = chance(cfg_.p_rp) ? TreatmentKind::RP : TreatmentKind::RT;
    const Date tx_date = diagnosis + std::chrono::days{uniform_int(45, 270)};

    // Log-normal baseline (median 6 ng/mL) truncated to [4, 40] so that every
    // treatment produces a fall large enough to be significant.
    double baseline = 0.0;
    do {
        baseline = 6.0 * std::exp(0.4 * std::normal_distribution<double>(0.0, 1.0)(rng_));
    } while (baseline < 4.0 || baseline > 40.0);
    const double pre_doubling_days = uniform(700.0, 1800.0);

    double peak = baseline;
    for (Date d = diagnosis; d < tx_date; d += std::chrono::days{next_gap()}) {
        peak = round3(baseline * std::exp2(elapsed_days(diagnosis, d) / pre_doubling_days));
        draw(d, peak, Assay::standard);
    }
    treat(tx_date, kind);

    const Assay post_assay = chance(0.5) ? Assay::ultrasensitive : Assay::standard;
    const double rp_level = uniform(0.01, 0.08);
    const double rt_nadir = uniform(0.2, std::min(1.5, peak / 8.0));
    const Date first_post = tx_date + std::chrono::days{next_gap()};

    PatientTruth truth{id_, kind, tx_date, false, std::nullopt, RelapseMechanism::none, false};
    if (chance(cfg_.p_recurrence)) {
        truth.relapsed = true;
        truth.mechanism = chance(cfg_.p_secondary) ? RelapseMechanism::secondary : RelapseMechanism::psa;
    }

    // Post-treatment quiet level, before any relapse rise.
    std::optional<Date> salvage_rp;
    double salvage_rp_level = uniform(0.01, 0.08);
    auto quiet_level = [&](Date d) {
        if (salvage_rp && d > *salvage_rp) {
            return salvage_rp_level;
        }
        if (kind == TreatmentKind::RP) {
            return rp_level;
        }
        return rt_nadir * (1.0 + 0.5 * std::exp(-elapsed_days(tx_date, d) / 180.0));
    };

    Date end = tx_date;
    switch (truth.mechanism) {
        case RelapseMechanism::none: {
            end = tx_date + std::chrono::days{uniform_int(1095, 2920)};
            if (kind == TreatmentKind::RP && chance(0.15)) {
                // Adjuvant: after the first post-operative PSA and within six
                // months of surgery, so it never reads as a clinical relapse
                // even from an imputed RP dated at the last pre-operative draw.
                const int earliest = elapsed_days(tx_date, first_post) + 1;
                if (earliest <= 180) {
                    treat(tx_date + std::chrono::days{uniform_int(earliest, 180)}, TreatmentKind::RT);
                }
            } else if (kind == TreatmentKind::RT && chance(0.3)) {
                treat(tx_date - std::chrono::days{uniform_int(0, 60)}, TreatmentKind::HT);  // neoadjuvant
            }
            break;
        }
        case RelapseMechanism::secondary: {
            Date event_date;
            if (kind == TreatmentKind::RP) {
                if (chance(0.5)) {
                    event_date = tx_date + std::chrono::days{uniform_int(400, 1800)};
                    treat(event_date, TreatmentKind::RT);
                } else {
                    event_date = tx_date + std::chrono::days{uniform_int(90, 1800)};
                    treat(event_date, chance(0.85) ? TreatmentKind::HT : TreatmentKind::CT);
                }
            } else {
                switch (uniform_int(0, 2)) {
                    case 0:
                        event_date = tx_date + std::chrono::days{uniform_int(200, 1800)};
                        treat(event_date, TreatmentKind::HT);
                        break;
                    case 1:
                        // clear of the post-RT nadir window, as for salvage RP
                        event_date = tx_date + std::chrono::days{uniform_int(600, 1800)};
                        treat(event_date, TreatmentKind::RT);
                        break;
                    default:
                        // Late enough that the post-RT nadir run cannot reach the
                        // post-RP level and flip the classification.
                        event_date = tx_date + std::chrono::days{uniform_int(600, 1800)};
                        treat(event_date, TreatmentKind::RP);
                        salvage_rp = event_date;
                        break;
                }
            }
            truth.relapse_date = event_date;
            end = event_date + std::chrono::days{uniform_int(365, 1095)};
            break;
        }
        case RelapseMechanism::psa:
            break;
    }

    if (truth.mechanism != RelapseMechanism::psa) {
        for (Date d = first_post; d <= end; d += std::chrono::days{next_gap()}) {
            draw(d, round3(quiet_level(d)), post_assay);
        }
    } else {
        // Exponential rise from the quiet level; the relapse date is the first
        // draw whose latent value crosses the guideline threshold.
        const Date onset = tx_date + std::chrono::days{uniform_int(300, 1800)};
        const double doubling = uniform(150.0, 210.0);
        double running_min = 0.0;
        bool first = true;
        int draws_after_crossing = -1;
        Date d = first_post;
        for (int guard = 0; guard < 1000 && draws_after_crossing < 2; ++guard) {
            double latent = quiet_level(d);
            if (d > onset) {
                latent *= std::exp2(elapsed_days(onset, d) / doubling);
            }
            latent = round3(latent);
            draw(d, latent, post_assay);

            running_min = first ? latent : std::min(running_min, latent);
            first = false;
            bool crossed = false;
            if (kind == TreatmentKind::RP) {
                crossed = latent > (post_assay == Assay::ultrasensitive ? kPrpUltrasensitive : kPrpStandard);
            } else {
                crossed = latent - running_min > kPrtRise;
            }
            if (draws_after_crossing >= 0) {
                ++draws_after_crossing;
            } else if (crossed) {
                truth.relapse_date = d;
                draws_after_crossing = 0;
            }
            d += std::chrono::days{next_gap()};
        }
    }

    auto timeline = build_timeline(id_, std::move(psa_), std::move(tx_), TimelineMeta{diagnosis, grade});
    return {std::move(timeline), std::move(truth)};
}

}  // namespace

void validate(const SynthConfig& cfg) {
    auto prob = [](double p, const char* name) {
        if (!(p >= 0.0 && p <= 1.0)) {
            throw Error(ErrorKind::InvalidConfig, std::string(name) + " must lie in [0, 1]");
        }
    };
    if (cfg.n_patients < 1) {
        throw Error(ErrorKind::InvalidConfig, "n_patients must be >= 1");
    }
    prob(cfg.p_rp, "p_rp");
    prob(cfg.p_recurrence, "p_recurrence");
    prob(cfg.p_secondary, "p_secondary");
    prob(cfg.p_mask, "p_mask");
    if (!(cfg.noise_sd >= 0.0) || !std::isfinite(cfg.noise_sd)) {
        throw Error(ErrorKind::InvalidConfig, "noise_sd must be >= 0");
    }
    if (cfg.sampling_interval_days < 1) {
        throw Error(ErrorKind::InvalidConfig, "sampling_interval_days must be >= 1");
    }
}

std::string_view to_string(RelapseMechanism m) {
    switch (m) {
        case RelapseMechanism::none: return "none";
        case RelapseMechanism::psa: return "psa";
        case RelapseMechanism::secondary: return "secondary";
    }
    return "?";
}

std::optional<RelapseMechanism> parse_relapse_mechanism(std::string_view s) {
    if (s == "none") return RelapseMechanism::none;
    if (s == "psa") return RelapseMechanism::psa;
    if (s == "secondary") return RelapseMechanism::secondary;
    return std::nullopt;
}

const PatientTruth* GroundTruth::find(std::string_view patient_id) const {
    auto it = std::find_if(patients.begin(), patients.end(),
                           [&](const PatientTruth& p) { return p.patient_id == patient_id; });
    return it == patients.end() ? nullptr : &*it;
}

SyntheticCohort generate_cohort(const SynthConfig& cfg) {
    validate(cfg);
    SyntheticCohort out;
    out.timelines.reserve(cfg.n_patients);
    out.truth.patients.reserve(cfg.n_patients);
    for (std::size_t i = 0; i < cfg.n_patients; ++i) {
        auto [timeline, truth] = PatientBuilder(cfg, i).build();
        out.timelines.push_back(std::move(timeline));
        out.truth.patients.push_back(std::move(truth));
    }
    return mask_treatments(std::move(out), cfg.p_mask, cfg.seed);
}

SyntheticCohort mask_treatments(SyntheticCohort cohort, double p_mask, std::uint64_t seed) {
    if (!(p_mask >= 0.0 && p_mask <= 1.0)) {
        throw Error(ErrorKind::InvalidConfig, "p_mask must lie in [0, 1]");
    }
    if (p_mask == 0.0) {
        return cohort;
    }
    std::unordered_map<std::string, PatientTruth*> truth_by_id;
    for (auto& p : cohort.truth.patients) {
        truth_by_id.emplace(p.patient_id, &p);
    }
    // Every RP/RT record is an independent draw. A patient counts as masked
    // when the draw withholds its primary treatment.
    for (std::size_t i = 0; i < cohort.timelines.size(); ++i) {
        const auto& t = cohort.timelines[i];
        auto rng = stream_for(seed, kMaskStream, i);
        std::uniform_real_distribution<double> u(0.0, 1.0);
        auto it = truth_by_id.find(t.patient_id());
        PatientTruth* truth = it == truth_by_id.end() ? nullptr : it->second;
        std::vector<TreatmentEvent> kept;
        bool removed = false;
        for (const auto& e : t.treatments()) {
            if (is_curative(e.kind) && u(rng) < p_mask) {
                removed = true;
                if (truth && e.kind == truth->treatment_kind && e.date == truth->treatment_date) {
                    truth->masked = true;
                }
            } else {
                kept.push_back(e);
            }
        }
        if (removed) {
            cohort.timelines[i] =
                build_timeline(t.patient_id(), {t.psa().begin(), t.psa().end()}, std::move(kept), t.meta());
        }
    }
    return cohort;
}

bool adequately_sampled(const PatientTimeline& t, const PatientTruth& truth) {
    bool before = false;
    bool after = false;
    for (const auto& m : t.psa()) {
        if (t.diagnosis_date() && m.date < *t.diagnosis_date()) {
            continue;
        }
        const int gap = elapsed_days(m.date, truth.treatment_date);
        before = before || (gap > 0 && gap <= 365);
        after = after || gap < 0;
    }
    return before && after;
}

}  // namespace psaflow
