#include "cli.hpp"

#include <CLI11.hpp>
#include <filesystem>
#include <ostream>

#include "psaflow/config.hpp"
#include "psaflow/dbcr.hpp"
#include "psaflow/dtx.hpp"
#include "psaflow/errors.hpp"
#include "psaflow/evaluation.hpp"
#include "psaflow/io.hpp"
#include "psaflow/synth.hpp"

namespace psaflow::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
    std::string config_path;

    SynthConfig synth;
    std::string out_dir;

    std::string cohort_dir;
    std::string drop_mode = "first";
    std::string include_imputed = "true";
    bool psa_only = false;

    std::string truth_path;
    int tolerance_days = kDefaultBcrToleranceDays;

    std::string events_path;
    int bucket_days = 183;
    std::size_t n_buckets = kDefaultBucketCount;
};

DropMode drop_mode(const Options& o) { return o.drop_mode == "all" ? DropMode::all : DropMode::first; }

BcrOptions bcr_options(const Options& o) {
    BcrOptions opts;
    opts.include_imputed = o.include_imputed == "true";
    opts.psa_only = o.psa_only;
    return opts;
}

RuleConfig rule_config(const Options& o) {
    return o.config_path.empty() ? RuleConfig{} : load_rule_config(o.config_path);
}

// Cohort with detected treatments merged in when imputation is enabled.
std::vector<PatientTimeline> bcr_input(const std::vector<PatientTimeline>& cohort, const Options& o,
                                       const RuleConfig& cfg, std::vector<DetectedTreatment>* detections_out) {
    auto detections = detect_missing_treatments(cohort, DtxMode::impute, drop_mode(o), cfg);
    auto result = bcr_options(o).include_imputed ? apply_imputations(cohort, detections) : cohort;
    if (detections_out) {
        *detections_out = std::move(detections);
    }
    return result;
}

void emit(const std::string& contents, const std::string& out_dir, const char* name, std::ostream& out,
          std::ostream& err) {
    if (out_dir.empty()) {
        out << contents;
        return;
    }
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    const auto path = fs::path(out_dir) / name;
    io::write_text_file(path, contents);
    err << "wrote " << path.string() << "\n";
}

int cmd_synth(const Options& o, std::ostream& err) {
    auto cohort = generate_cohort(o.synth);
    io::write_cohort(o.out_dir, cohort.timelines, &cohort.truth);
    err << "generated " << cohort.timelines.size() << " patients into " << o.out_dir << "\n";
    return kExitOk;
}

int cmd_detect_tx(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = rule_config(o);
    auto cohort = io::read_cohort_dir(o.cohort_dir);
    err << "read " << cohort.timelines.size() << " patients\n";
    auto detections = detect_missing_treatments(cohort.timelines, DtxMode::impute, drop_mode(o), cfg);
    err << "detected " << detections.size() << " missing curative treatments\n";
    emit(io::format_detections(detections), o.out_dir, io::kDetectionsFile, out, err);
    return kExitOk;
}

int cmd_detect_bcr(const Options& o, std::ostream& out, std::ostream& err) {
    const auto cfg = rule_config(o);
    auto cohort = io::read_cohort_dir(o.cohort_dir);
    err << "read " << cohort.timelines.size() << " patients\n";
    auto timelines = bcr_input(cohort.timelines, o, cfg, nullptr);
    auto events = detect_bcr_cohort(timelines, bcr_options(o), cfg);
    err << "detected " << events.size() << " biochemical recurrences\n";
    emit(io::format_bcr_events(events), o.out_dir, io::kBcrEventsFile, out, err);
    return kExitOk;
}

int cmd_eval(const Options& o, std::ostream& err) {
    const auto cfg = rule_config(o);
    auto files = io::CohortFiles::in_dir(o.cohort_dir);
    std::error_code ec;
    if (!fs::is_directory(o.cohort_dir, ec)) {
        throw FileError(ErrorKind::IoError, o.cohort_dir, 0, "cohort directory does not exist");
    }
    files.truth = o.truth_path;
    auto cohort = io::read_cohort(files);
    const auto& truth = *cohort.truth;
    err << "read " << cohort.timelines.size() << " patients and " << truth.patients.size() << " truth records\n";

    auto dtx = evaluate_dtx(cohort.timelines, drop_mode(o), cfg);
    std::vector<DetectedTreatment> detections;
    auto timelines = bcr_input(cohort.timelines, o, cfg, &detections);
    auto recovery = evaluate_recovery(cohort.timelines, truth, detections);
    auto events = detect_bcr_cohort(timelines, bcr_options(o), cfg);
    auto bcr = score_bcr(events, cohort.timelines, truth, o.tolerance_days);

    auto metrics = io::metric_entries(cfg);
    metrics.emplace_back("run.drop_mode", o.drop_mode);
    metrics.emplace_back("run.include_imputed", o.include_imputed);
    metrics.emplace_back("run.psa_only", o.psa_only ? "true" : "false");
    metrics.emplace_back("run.bcr_tolerance_days", std::to_string(o.tolerance_days));
    metrics.emplace_back("run.patients", std::to_string(cohort.timelines.size()));
    io::append_entries(metrics, dtx);
    io::append_entries(metrics, recovery);
    io::append_entries(metrics, bcr);

    io::OutputSet outputs;
    outputs.detections = std::move(detections);
    outputs.report = time_to_relapse_report(events, cohort.timelines, o.bucket_days, o.n_buckets);
    outputs.bcr_events = std::move(events);
    outputs.metrics = std::move(metrics);
    for (const auto& p : io::write_outputs(outputs, o.out_dir)) {
        err << "wrote " << p.string() << "\n";
    }
    return kExitOk;
}

int cmd_report(const Options& o, std::ostream& err) {
    auto cohort = io::read_cohort_dir(o.cohort_dir);
    auto events = io::read_bcr_events(o.events_path);
    err << "read " << events.size() << " events for " << cohort.timelines.size() << " patients\n";
    io::OutputSet outputs;
    outputs.report = time_to_relapse_report(events, cohort.timelines, o.bucket_days, o.n_buckets);
    for (const auto& p : io::write_outputs(outputs, o.out_dir)) {
        err << "wrote " << p.string() << "\n";
    }
    return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    Options o;
    CLI::App app{"Missing curative treatment imputation and biochemical recurrence detection from PSA series",
                 "psaflow"};
    app.require_subcommand(1);
    app.add_option("--config", o.config_path, "Threshold overrides, name=value per line")->check(CLI::ExistingFile);

    auto* synth = app.add_subcommand("synth", "Generate a synthetic cohort with ground truth");
    synth->add_option("--patients", o.synth.n_patients, "Number of patients")->required()->check(CLI::PositiveNumber);
    synth->add_option("--seed", o.synth.seed, "Random seed")->capture_default_str();
    synth->add_option("--p-mask", o.synth.p_mask, "Probability a curative record is withheld")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    synth->add_option("--p-rp", o.synth.p_rp, "Probability the primary treatment is RP")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    synth->add_option("--p-recurrence", o.synth.p_recurrence, "Probability of relapse")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    synth->add_option("--p-secondary", o.synth.p_secondary, "Probability a relapse shows as secondary treatment")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
    synth->add_option("--noise-sd", o.synth.noise_sd, "Multiplicative PSA noise (log-scale sd)")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    synth->add_option("--sampling-interval", o.synth.sampling_interval_days, "Mean days between PSA draws")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    synth->add_option("--out", o.out_dir, "Output directory")->required();

    auto* detect_tx = app.add_subcommand("detect-tx", "Impute missing curative treatments from PSA drops");
    detect_tx->add_option("--cohort", o.cohort_dir, "Cohort directory")->required();
    detect_tx->add_option("--mode", o.drop_mode, "first or all drops per patient")
        ->check(CLI::IsMember({"first", "all"}))
        ->capture_default_str();
    detect_tx->add_option("--out", o.out_dir, "Output directory (default: standard output)");

    auto* detect_bcr = app.add_subcommand("detect-bcr", "Detect biochemical recurrence");
    detect_bcr->add_option("--cohort", o.cohort_dir, "Cohort directory")->required();
    detect_bcr->add_option("--include-imputed", o.include_imputed, "Count imputed treatments as primary")
        ->check(CLI::IsMember({"true", "false"}))
        ->capture_default_str();
    detect_bcr->add_flag("--psa-only", o.psa_only, "Use only the PSA-based rules");
    detect_bcr->add_option("--mode", o.drop_mode, "Drop mode used for imputation")
        ->check(CLI::IsMember({"first", "all"}))
        ->capture_default_str();
    detect_bcr->add_option("--out", o.out_dir, "Output directory (default: standard output)");

    auto* eval = app.add_subcommand("eval", "Score detection against records and ground truth");
    eval->add_option("--cohort", o.cohort_dir, "Cohort directory")->required();
    eval->add_option("--truth", o.truth_path, "Ground-truth file")->required();
    eval->add_option("--out", o.out_dir, "Output directory")->required();
    eval->add_option("--mode", o.drop_mode, "first or all drops per patient")
        ->check(CLI::IsMember({"first", "all"}))
        ->capture_default_str();
    eval->add_option("--include-imputed", o.include_imputed, "Count imputed treatments as primary")
        ->check(CLI::IsMember({"true", "false"}))
        ->capture_default_str();
    eval->add_flag("--psa-only", o.psa_only, "Use only the PSA-based rules");
    eval->add_option("--tolerance-days", o.tolerance_days, "BCR date tolerance for a true positive")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    eval->add_option("--bucket-days", o.bucket_days, "Histogram bucket width")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* report = app.add_subcommand("report", "Time-to-relapse histograms");
    report->add_option("--events", o.events_path, "BCR events file")->required();
    report->add_option("--cohort", o.cohort_dir, "Cohort directory")->required();
    report->add_option("--bucket-days", o.bucket_days, "Histogram bucket width")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    report->add_option("--buckets", o.n_buckets, "Number of buckets (last is open-ended)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    report->add_option("--out", o.out_dir, "Output directory")->required();

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n\n" << app.help("", CLI::AppFormatMode::All);
        return kExitValidation;
    }

    try {
        if (synth->parsed()) return cmd_synth(o, err);
        if (detect_tx->parsed()) return cmd_detect_tx(o, out, err);
        if (detect_bcr->parsed()) return cmd_detect_bcr(o, out, err);
        if (eval->parsed()) return cmd_eval(o, err);
        if (report->parsed()) return cmd_report(o, err);
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return e.is_io() ? kExitIo : kExitValidation;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitValidation;
    }
    return kExitValidation;
}

}  // namespace psaflow::cli
