// Acceptance suite. Prints one PASS/FAIL line per criterion and exits non-zero
// if any criterion fails. Thresholds are fixed here and must not be relaxed.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "cli.hpp"
#include "fuzz.hpp"
#include "psaflow/dbcr.hpp"
#include "psaflow/dtx.hpp"
#include "psaflow/evaluation.hpp"
#include "psaflow/io.hpp"
#include "psaflow/relapse_rules.hpp"
#include "psaflow/sigdrop.hpp"
#include "psaflow/synth.hpp"

using namespace psaflow;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20240601;
constexpr double kZeroNoiseSeconds = 10.0;
constexpr double kNoisyRecoveryMin = 0.90;
constexpr double kNoisyAccuracyMin = 0.85;
constexpr double kSigdropRatioMax = 15.0;
constexpr double kCohortRatioMax = 3.0;

struct Outcome {
    bool pass;
    std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// Minimum wall time over several runs, to keep scheduler noise out of ratios.
double min_seconds(int runs, const std::function<void()>& f) {
    double best = 1e300;
    for (int i = 0; i < runs; ++i) {
        auto t0 = Clock::now();
        f();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

std::string fixed(double v, int digits = 4) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

SynthConfig synth_cfg(std::size_t n, std::uint64_t seed) {
    SynthConfig cfg;
    cfg.n_patients = n;
    cfg.seed = seed;
    return cfg;
}

RecoveryMetrics recovery_for(const SyntheticCohort& c) {
    auto d = detect_missing_treatments(c.timelines, DtxMode::impute);
    return evaluate_recovery(c.timelines, c.truth, d);
}

Outcome zero_noise_recovery() {
    auto cfg = synth_cfg(1000, kSeed);
    cfg.noise_sd = 0.0;
    cfg.p_mask = 1.0;
    auto t0 = Clock::now();
    auto cohort = generate_cohort(cfg);
    auto m = recovery_for(cohort);
    const double secs = seconds_since(t0);
    std::size_t treated = cohort.truth.patients.size();
    const bool ok = m.eligible > 0 && m.recovered == m.eligible && m.correctly_classified == m.recovered &&
                    secs < kZeroNoiseSeconds;
    return {ok, "treated=" + std::to_string(treated) + " eligible=" + std::to_string(m.eligible) +
                    " recovered=" + std::to_string(m.recovered) + " correct=" + std::to_string(m.correctly_classified) +
                    " seconds=" + fixed(secs, 3) + " (need 100%/100%, < 10 s)"};
}

Outcome noisy_recovery() {
    auto cfg = synth_cfg(1000, kSeed);
    cfg.noise_sd = 0.15;
    cfg.sampling_interval_days = 180;
    cfg.p_mask = 1.0;
    auto m = recovery_for(generate_cohort(cfg));
    const bool ok = m.recovery_rate() >= kNoisyRecoveryMin && m.classification_accuracy() >= kNoisyAccuracyMin;
    return {ok, "recovery=" + fixed(m.recovery_rate()) + " accuracy=" + fixed(m.classification_accuracy()) +
                    " (need >= 0.90 and >= 0.85)"};
}

bool identities_hold(const DtxMetrics& m) {
    for (const auto* r : {&m.overall, &m.rp, &m.rt}) {
        if (r->matched.count != r->true_class.count + r->false_class.count) return false;
        if (r->estimated_ctx != r->matched.count + r->new_estimated.count) return false;
    }
    return true;
}

Outcome evaluation_identity() {
    std::size_t runs = 0, identity_failures = 0, naive_checks = 0, naive_failures = 0;
    for (std::uint64_t s = 0; s < 10; ++s) {
        auto cfg = synth_cfg(s % 2 ? 50 : 400, kSeed + s);
        cfg.noise_sd = 0.05 * double(s % 4);
        auto cohort = generate_cohort(cfg);
        for (auto mode : {DropMode::first, DropMode::all}) {
            auto m = evaluate_dtx(cohort.timelines, mode);
            ++runs;
            identity_failures += !identities_hold(m);
            if (cohort.timelines.size() <= 50) {
                auto d = detect_missing_treatments(cohort.timelines, DtxMode::evaluate, mode);
                ++naive_checks;
                naive_failures += !(m == testsupport::naive_dtx_metrics(cohort.timelines, d));
            }
        }
    }
    auto corpus = testsupport::fuzz_corpus(kSeed, 500);
    for (std::size_t start = 0; start < corpus.size(); start += 50) {
        std::span<const PatientTimeline> part(corpus.data() + start, 50);
        auto d = detect_missing_treatments(part, DtxMode::evaluate, DropMode::all);
        auto m = score_detections(part, d);
        ++runs;
        ++naive_checks;
        identity_failures += !identities_hold(m);
        naive_failures += !(m == testsupport::naive_dtx_metrics(part, d));
    }
    return {identity_failures == 0 && naive_failures == 0,
            "runs=" + std::to_string(runs) + " identity_failures=" + std::to_string(identity_failures) +
                " naive_checks=" + std::to_string(naive_checks) + " naive_mismatches=" + std::to_string(naive_failures)};
}

Outcome bcr_oracle_equivalence() {
    // 200 timelines: half synthetic patients, half fuzz timelines.
    auto cfg = synth_cfg(100, kSeed + 1);
    cfg.noise_sd = 0.2;
    cfg.p_recurrence = 0.6;
    std::vector<PatientTimeline> sample = generate_cohort(cfg).timelines;
    auto fuzz = testsupport::fuzz_corpus(kSeed + 2, 100);
    sample.insert(sample.end(), fuzz.begin(), fuzz.end());
    std::size_t rule_mismatch = 0, defined = 0;
    for (const auto& t : sample) {
        auto prp = psa_relapse_after_rp(t);
        auto prt = psa_relapse_after_rt(t);
        defined += prp.has_value() + prt.has_value();
        rule_mismatch += (prp != testsupport::brute_prp(t)) + (prt != testsupport::brute_prt(t));
    }

    auto corpus = testsupport::fuzz_corpus(kSeed + 3, 1000);
    std::size_t min_mismatch = 0, events = 0;
    for (const auto& t : corpus) {
        std::optional<Date> best;
        for (auto d : {psa_relapse_after_rp(t), clinical_relapse_after_rp(t), psa_relapse_after_rt(t),
                       clinical_relapse_after_rt(t)}) {
            if (d && (!best || *d < *best)) best = d;
        }
        if (!first_date(t, kCurative)) best.reset();
        auto e = detect_bcr(t);
        events += e.has_value();
        min_mismatch += !(e ? best && *best == e->bcr_date : !best);
    }
    return {rule_mismatch == 0 && min_mismatch == 0 && defined > 0 && events > 0,
            "timelines=" + std::to_string(sample.size()) + " relapse_dates=" + std::to_string(defined) +
                " rule_mismatches=" + std::to_string(rule_mismatch) + " corpus=" + std::to_string(corpus.size()) +
                " events=" + std::to_string(events) + " min_mismatches=" + std::to_string(min_mismatch)};
}

Outcome clinical_uplift() {
    auto cfg = synth_cfg(1000, kSeed + 4);
    cfg.p_secondary = 0.4;
    cfg.noise_sd = 0.1;
    auto cohort = generate_cohort(cfg);
    BcrOptions psa_only;
    psa_only.psa_only = true;
    auto full = detect_bcr_cohort(cohort.timelines);
    auto restricted = detect_bcr_cohort(cohort.timelines, psa_only);
    std::size_t later = 0, shared = 0, lost = 0;
    for (const auto& r : restricted) {
        auto it = std::find_if(full.begin(), full.end(), [&](const BcrEvent& f) { return f.patient_id == r.patient_id; });
        if (it == full.end()) {
            ++lost;
            continue;
        }
        ++shared;
        later += it->bcr_date > r.bcr_date;
    }
    return {full.size() > restricted.size() && later == 0 && lost == 0,
            "full=" + std::to_string(full.size()) + " psa_only=" + std::to_string(restricted.size()) +
                " shared=" + std::to_string(shared) + " full_later=" + std::to_string(later) +
                " psa_only_not_in_full=" + std::to_string(lost)};
}

Outcome literal_fidelity() {
    auto corpus = testsupport::fuzz_corpus(kSeed + 5, 1000);
    BcrOptions without_d;
    without_d.crt_clauses.long_gap_htct = false;
    std::size_t rule_changes = 0, bcr_changes = 0;
    for (const auto& t : corpus) {
        rule_changes += clinical_relapse_after_rt(t) != clinical_relapse_after_rt(t, {}, CrtClauses{false});
        bcr_changes += detect_bcr(t) != detect_bcr(t, without_d);
    }
    const bool classify_ok = classify_drop(0.1) == TreatmentKind::RT;
    const Date rt = testsupport::day(2016, 1, 1);
    auto at = [&](int d) { return rt + std::chrono::days{d}; };
    auto t = build_timeline("P", {{"P", at(90), 2.0, Assay::standard}, {"P", at(270), 1.0, Assay::standard},
                                  {"P", at(540), 3.0, Assay::standard}},
                            {{"P", rt, TreatmentKind::RT, Provenance::recorded}});
    const bool prt_ok = !psa_relapse_after_rt(t).has_value();
    return {rule_changes == 0 && bcr_changes == 0 && classify_ok && prt_ok,
            "clause_d_rule_changes=" + std::to_string(rule_changes) + " clause_d_bcr_changes=" +
                std::to_string(bcr_changes) + " classify(0.1)=" + std::string(to_string(classify_drop(0.1))) +
                " prt(+2.0 exactly)=" + (prt_ok ? "absent" : "relapse")};
}

std::vector<PsaMeasurement> long_series(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return testsupport::random_series(rng, "P", n);
}

Outcome complexity() {
    // 50k draws is about 3 MB and 500k about 30 MB: both past L2 and inside
    // L3 here, so the ratio reflects the scan, not a cache cliff. The short
    // series is scanned 10 times per sample so both samples take similar time.
    const std::size_t m = 50000;
    auto small = long_series(m, kSeed);
    auto large = long_series(10 * m, kSeed);
    std::size_t sink = 0;
    const double t_small = min_seconds(9, [&] {
                               for (int i = 0; i < 10; ++i) sink += detect_all_drops(small).size();
                           }) / 10.0;
    const double t_large = min_seconds(9, [&] { sink += detect_all_drops(large).size(); });
    const double sig_ratio = t_large / t_small;

    auto base = generate_cohort(synth_cfg(4000, kSeed + 6)).timelines;
    auto doubled = generate_cohort(synth_cfg(8000, kSeed + 6)).timelines;
    auto pipeline = [&](const std::vector<PatientTimeline>& c) {
        auto d = detect_missing_treatments(c, DtxMode::impute);
        auto merged = apply_imputations(c, d);
        sink += detect_bcr_cohort(merged).size();
    };
    const double t_base = min_seconds(9, [&] { pipeline(base); });
    const double t_double = min_seconds(9, [&] { pipeline(doubled); });
    const double cohort_ratio = t_double / t_base;
    return {sig_ratio <= kSigdropRatioMax && cohort_ratio <= kCohortRatioMax && sink > 0,
            "sigdrop M=" + std::to_string(m) + " ratio(10M/M)=" + fixed(sig_ratio, 2) + " (<= 15)" +
                " cohort ratio(2N/N)=" + fixed(cohort_ratio, 2) + " (<= 3)"};
}

std::uint64_t fnv1a(const std::string& bytes) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::vector<std::pair<std::string, std::uint64_t>> hash_dir(const fs::path& dir) {
    std::vector<std::pair<std::string, std::uint64_t>> out;
    for (const auto& entry : fs::directory_iterator(dir)) {
        std::ifstream in(entry.path(), std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        out.emplace_back(entry.path().filename().string(), fnv1a(ss.str()));
    }
    std::sort(out.begin(), out.end());
    return out;
}

int cli(const std::vector<std::string>& args, std::string* out = nullptr) {
    std::ostringstream o, e;
    int code = psaflow::cli::run(args, o, e);
    if (out) *out = o.str();
    return code;
}

Outcome determinism() {
    const fs::path root = fs::temp_directory_path() / "psaflow_acceptance_determinism";
    fs::remove_all(root);
    std::vector<std::string> notes;
    bool ok = true;
    std::size_t files = 0;
    auto twice = [&](const std::string& name, const std::function<std::vector<std::string>(const std::string&)>& args) {
        std::string out_a, out_b;
        const std::string a = (root / (name + "_a")).string(), b = (root / (name + "_b")).string();
        int ca = cli(args(a), &out_a);
        int cb = cli(args(b), &out_b);
        bool same = ca == 0 && cb == 0 && out_a == out_b;
        if (same && fs::exists(a)) {
            auto ha = hash_dir(a), hb = hash_dir(b);
            same = !ha.empty() && ha == hb;
            files += ha.size();
        }
        ok = ok && same;
        notes.push_back(name + (same ? "=same" : "=DIFF"));
    };
    const std::string cohort = (root / "synth_a").string();
    twice("synth", [](const std::string& out) {
        return std::vector<std::string>{"synth", "--patients", "300", "--seed", "11", "--p-mask", "0.5",
                                        "--noise-sd", "0.1", "--out", out};
    });
    twice("detect-tx", [&](const std::string& out) {
        return std::vector<std::string>{"detect-tx", "--cohort", cohort, "--mode", "all", "--out", out};
    });
    twice("detect-tx-stdout", [&](const std::string&) {
        return std::vector<std::string>{"detect-tx", "--cohort", cohort};
    });
    twice("detect-bcr", [&](const std::string& out) {
        return std::vector<std::string>{"detect-bcr", "--cohort", cohort, "--out", out};
    });
    twice("eval", [&](const std::string& out) {
        return std::vector<std::string>{"eval", "--cohort", cohort, "--truth", cohort + "/truth.csv", "--out", out};
    });
    const std::string events = (root / "detect-bcr_a" / io::kBcrEventsFile).string();
    twice("report", [&](const std::string& out) {
        return std::vector<std::string>{"report", "--events", events, "--cohort", cohort, "--out", out};
    });
    fs::remove_all(root);
    std::string detail = "files_hashed=" + std::to_string(files);
    for (const auto& n : notes) detail += " " + n;
    return {ok, detail};
}

Outcome round_trip() {
    const fs::path dir = fs::temp_directory_path() / "psaflow_acceptance_roundtrip";
    fs::remove_all(dir);
    auto cfg = synth_cfg(500, kSeed + 7);
    cfg.noise_sd = 0.15;
    cfg.p_mask = 0.4;
    auto cohort = generate_cohort(cfg);
    io::write_cohort(dir, cohort.timelines, &cohort.truth);
    auto back = io::read_cohort_dir(dir);
    fs::remove_all(dir);
    const bool ok = back.timelines == cohort.timelines && back.truth && *back.truth == cohort.truth;
    return {ok, "patients=" + std::to_string(back.timelines.size()) + (ok ? " equal" : " differ")};
}

}  // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria = {
        {"zero-noise-recovery", zero_noise_recovery},
        {"noisy-recovery-band", noisy_recovery},
        {"evaluation-mode-identity", evaluation_identity},
        {"bcr-oracle-equivalence", bcr_oracle_equivalence},
        {"clinical-rule-uplift", clinical_uplift},
        {"literal-rule-fidelity", literal_fidelity},
        {"complexity", complexity},
        {"determinism", determinism},
        {"round-trip", round_trip},
    };
    int failures = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failures += !o.pass;
        std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    }
    std::cout << (failures ? "FAILED " : "ALL PASSED ") << criteria.size() - std::size_t(failures) << "/"
              << criteria.size() << std::endl;
    return failures ? 1 : 0;
}
