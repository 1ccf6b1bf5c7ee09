#include "psaflow/io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "psaflow/errors.hpp"
#include "psaflow/text.hpp"

namespace psaflow::io {

namespace fs = std::filesystem;

namespace {

constexpr std::string_view kPatientsHeader = "patient_id,diagnosis_date,grade_group";
constexpr std::string_view kPsaHeader = "patient_id,date,value_ng_ml,assay";
constexpr std::string_view kTreatmentsHeader = "patient_id,date,kind";
constexpr std::string_view kTruthHeader =
    "patient_id,treatment_kind,treatment_date,relapsed,relapse_date,relapse_mechanism,masked";
constexpr std::string_view kDetectionsHeader = "patient_id,kind,date,nadir_date,psa_min";
constexpr std::string_view kBcrHeader = "patient_id,bcr_date,source,time_to_relapse_days";

// Line-at-a-time reader that checks the header and field count.
class CsvReader {
public:
    CsvReader(const fs::path& path, std::string_view header) : path_(path.string()), in_(path, std::ios::binary) {
        if (!in_) {
            throw FileError(ErrorKind::IoError, path_, 0, "cannot open file");
        }
        if (!read_line()) {
            fail("missing header row");
        }
        if (line_text_ != header) {
            fail("expected header '" + std::string(header) + "'");
        }
        width_ = text::split(header, ',').size();
    }

    // Advances to the next non-blank row.
    bool next() {
        while (read_line()) {
            if (!line_text_.empty()) {
                fields_ = text::split(line_text_, ',');
                if (fields_.size() != width_) {
                    fail("expected " + std::to_string(width_) + " fields, found " + std::to_string(fields_.size()));
                }
                return true;
            }
        }
        return false;
    }

    std::string_view field(std::size_t i) const { return fields_[i]; }
    std::size_t line() const { return line_no_; }
    const std::string& path() const { return path_; }

    [[noreturn]] void fail(const std::string& reason) const {
        throw FileError(ErrorKind::ParseError, path_, line_no_, reason);
    }
    [[noreturn]] void orphan(std::string_view id) const {
        throw FileError(ErrorKind::OrphanRow, path_, line_no_, "unknown patient_id '" + std::string(id) + "'");
    }

    Date date(std::size_t i) const {
        auto d = parse_date(field(i));
        if (!d) {
            fail("invalid date '" + std::string(field(i)) + "'");
        }
        return *d;
    }

    std::optional<Date> optional_date(std::size_t i) const {
        if (field(i).empty()) {
            return std::nullopt;
        }
        return date(i);
    }

    bool flag(std::size_t i) const {
        if (field(i) == "1") return true;
        if (field(i) == "0") return false;
        fail("expected 0 or 1, got '" + std::string(field(i)) + "'");
    }

    std::string id(std::size_t i) const {
        if (field(i).empty()) {
            fail("empty patient_id");
        }
        return std::string(field(i));
    }

private:
    bool read_line() {
        if (!std::getline(in_, line_text_)) {
            if (in_.bad()) {
                throw FileError(ErrorKind::IoError, path_, line_no_, "read failed");
            }
            return false;
        }
        ++line_no_;
        if (!line_text_.empty() && line_text_.back() == '\r') {
            line_text_.pop_back();
        }
        return true;
    }

    std::string path_;
    std::ifstream in_;
    std::string line_text_;
    std::vector<std::string_view> fields_;
    std::size_t width_ = 0;
    std::size_t line_no_ = 0;
};

struct PatientRows {
    TimelineMeta meta;
    std::vector<PsaMeasurement> psa;
    std::vector<TreatmentEvent> treatments;
};

template <class T, class Key>
std::vector<const T*> ordered(std::span<const T> rows, Key key) {
    std::vector<const T*> out;
    out.reserve(rows.size());
    for (const auto& r : rows) {
        out.push_back(&r);
    }
    std::stable_sort(out.begin(), out.end(), [&](const T* a, const T* b) { return key(*a) < key(*b); });
    return out;
}

std::vector<const PatientTimeline*> by_patient_id(std::span<const PatientTimeline> cohort) {
    return ordered(cohort, [](const PatientTimeline& t) { return std::string_view(t.patient_id()); });
}

}  // namespace

CohortFiles CohortFiles::in_dir(const fs::path& dir) {
    CohortFiles f{dir / kPatientsFile, dir / kPsaFile, dir / kTreatmentsFile, std::nullopt};
    std::error_code ec;
    if (fs::exists(dir / kTruthFile, ec)) {
        f.truth = dir / kTruthFile;
    }
    return f;
}

Cohort read_cohort(const CohortFiles& files) {
    std::vector<std::string> order;
    std::unordered_map<std::string, PatientRows> rows;

    {
        CsvReader r(files.patients, kPatientsHeader);
        while (r.next()) {
            auto id = r.id(0);
            PatientRows p;
            p.meta.diagnosis_date = r.optional_date(1);
            if (!r.field(2).empty()) {
                auto g = text::parse_int(r.field(2));
                if (!g || *g < 1 || *g > 5) {
                    r.fail("grade_group must be empty or 1..5, got '" + std::string(r.field(2)) + "'");
                }
                p.meta.grade_group = static_cast<int>(*g);
            }
            if (!rows.emplace(id, std::move(p)).second) {
                r.fail("duplicate patient_id '" + id + "'");
            }
            order.push_back(std::move(id));
        }
    }
    {
        CsvReader r(files.psa, kPsaHeader);
        while (r.next()) {
            auto it = rows.find(std::string(r.field(0)));
            if (it == rows.end()) {
                r.orphan(r.field(0));
            }
            PsaMeasurement m;
            m.patient_id = it->first;
            m.date = r.date(1);
            auto v = text::parse_double(r.field(2));
            if (!v) {
                r.fail("non-numeric PSA value '" + std::string(r.field(2)) + "'");
            }
            if (!(*v >= 0.0) || !std::isfinite(*v)) {
                r.fail("negative or non-finite PSA value '" + std::string(r.field(2)) + "'");
            }
            m.value_ng_ml = *v;
            auto assay = parse_assay(r.field(3));
            if (!assay) {
                r.fail("unknown assay '" + std::string(r.field(3)) + "'");
            }
            m.assay = *assay;
            it->second.psa.push_back(std::move(m));
        }
    }
    {
        CsvReader r(files.treatments, kTreatmentsHeader);
        while (r.next()) {
            auto it = rows.find(std::string(r.field(0)));
            if (it == rows.end()) {
                r.orphan(r.field(0));
            }
            auto kind = parse_treatment_kind(r.field(2));
            if (!kind) {
                r.fail("unknown treatment kind '" + std::string(r.field(2)) + "'");
            }
            it->second.treatments.push_back({it->first, r.date(1), *kind, Provenance::recorded});
        }
    }

    Cohort cohort;
    cohort.timelines.reserve(order.size());
    for (auto& id : order) {
        auto& p = rows.at(id);
        cohort.timelines.push_back(build_timeline(id, std::move(p.psa), std::move(p.treatments), p.meta));
    }
    if (files.truth) {
        cohort.truth = read_truth(*files.truth);
    }
    return cohort;
}

Cohort read_cohort_dir(const fs::path& dir) {
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) {
        throw FileError(ErrorKind::IoError, dir.string(), 0, "cohort directory does not exist");
    }
    return read_cohort(CohortFiles::in_dir(dir));
}

GroundTruth read_truth(const fs::path& path) {
    GroundTruth truth;
    std::unordered_set<std::string> seen;
    CsvReader r(path, kTruthHeader);
    while (r.next()) {
        PatientTruth p;
        p.patient_id = r.id(0);
        auto kind = parse_treatment_kind(r.field(1));
        if (!kind || !is_curative(*kind)) {
            r.fail("treatment_kind must be RP or RT, got '" + std::string(r.field(1)) + "'");
        }
        p.treatment_kind = *kind;
        p.treatment_date = r.date(2);
        p.relapsed = r.flag(3);
        p.relapse_date = r.optional_date(4);
        auto mech = parse_relapse_mechanism(r.field(5));
        if (!mech) {
            r.fail("unknown relapse_mechanism '" + std::string(r.field(5)) + "'");
        }
        p.mechanism = *mech;
        p.masked = r.flag(6);
        if (p.relapsed != p.relapse_date.has_value()) {
            r.fail("relapse_date must be set exactly when relapsed=1");
        }
        if (!seen.insert(p.patient_id).second) {
            r.fail("duplicate patient_id '" + p.patient_id + "'");
        }
        truth.patients.push_back(std::move(p));
    }
    return truth;
}

std::vector<BcrEvent> read_bcr_events(const fs::path& path) {
    std::vector<BcrEvent> events;
    CsvReader r(path, kBcrHeader);
    while (r.next()) {
        BcrEvent e;
        e.patient_id = r.id(0);
        e.bcr_date = r.date(1);
        auto src = parse_bcr_source(r.field(2));
        if (!src) {
            r.fail("unknown source '" + std::string(r.field(2)) + "'");
        }
        e.source = *src;
        auto days = text::parse_int(r.field(3));
        if (!days) {
            r.fail("non-integer time_to_relapse_days '" + std::string(r.field(3)) + "'");
        }
        e.time_to_relapse_days = static_cast<int>(*days);
        events.push_back(std::move(e));
    }
    return events;
}

std::string format_patients(std::span<const PatientTimeline> cohort) {
    std::string out(kPatientsHeader);
    out += '\n';
    for (const auto* t : by_patient_id(cohort)) {
        out += t->patient_id();
        out += ',';
        if (t->diagnosis_date()) out += format_date(*t->diagnosis_date());
        out += ',';
        if (t->grade_group()) out += std::to_string(*t->grade_group());
        out += '\n';
    }
    return out;
}

std::string format_psa(std::span<const PatientTimeline> cohort) {
    std::string out(kPsaHeader);
    out += '\n';
    for (const auto* t : by_patient_id(cohort)) {
        for (const auto& m : t->psa()) {
            out += m.patient_id + ',' + format_date(m.date) + ',' + text::format_double(m.value_ng_ml) + ',' +
                   std::string(to_string(m.assay)) + '\n';
        }
    }
    return out;
}

std::string format_treatments(std::span<const PatientTimeline> cohort) {
    std::string out(kTreatmentsHeader);
    out += '\n';
    for (const auto* t : by_patient_id(cohort)) {
        for (const auto& e : t->treatments()) {
            out += e.patient_id + ',' + format_date(e.date) + ',' + std::string(to_string(e.kind)) + '\n';
        }
    }
    return out;
}

std::string format_truth(const GroundTruth& truth) {
    std::string out(kTruthHeader);
    out += '\n';
    auto rows = ordered(std::span<const PatientTruth>(truth.patients),
                        [](const PatientTruth& p) { return std::string_view(p.patient_id); });
    for (const auto* p : rows) {
        out += p->patient_id + ',' + std::string(to_string(p->treatment_kind)) + ',' + format_date(p->treatment_date) +
               ',' + (p->relapsed ? "1" : "0") + ',' + (p->relapse_date ? format_date(*p->relapse_date) : "") + ',' +
               std::string(to_string(p->mechanism)) + ',' + (p->masked ? "1" : "0") + '\n';
    }
    return out;
}

std::string format_detections(std::span<const DetectedTreatment> detections) {
    std::string out(kDetectionsHeader);
    out += '\n';
    auto rows = ordered(detections, [](const DetectedTreatment& d) { return std::pair(std::string_view(d.patient_id), d.date); });
    for (const auto* d : rows) {
        out += d->patient_id + ',' + std::string(to_string(d->kind)) + ',' + format_date(d->date) + ',' +
               format_date(d->nadir_date) + ',' + text::format_double(d->psa_min) + '\n';
    }
    return out;
}

std::string format_bcr_events(std::span<const BcrEvent> events) {
    std::string out(kBcrHeader);
    out += '\n';
    auto rows = ordered(events, [](const BcrEvent& e) { return std::pair(std::string_view(e.patient_id), e.bcr_date); });
    for (const auto* e : rows) {
        out += e->patient_id + ',' + format_date(e->bcr_date) + ',' + std::string(to_string(e->source)) + ',' +
               std::to_string(e->time_to_relapse_days) + '\n';
    }
    return out;
}

namespace {

void append_buckets(std::string& out, const std::string& prefix, const Histogram& h) {
    for (std::size_t i = 0; i < h.counts.size(); ++i) {
        const long long start = static_cast<long long>(i) * h.bucket_days;
        out += prefix + std::to_string(start) + ',';
        if (i + 1 < h.counts.size()) {
            out += std::to_string(start + h.bucket_days);
        }
        out += ',' + std::to_string(h.counts[i]) + '\n';
    }
}

}  // namespace

std::string format_histogram(const Histogram& h) {
    std::string out = "bucket_start_days,bucket_end_days,count\n";
    append_buckets(out, "", h);
    return out;
}

std::string format_grade_histograms(const std::map<int, Histogram>& by_grade) {
    std::string out = "grade_group,bucket_start_days,bucket_end_days,count\n";
    for (const auto& [grade, h] : by_grade) {
        append_buckets(out, std::to_string(grade) + ',', h);
    }
    return out;
}

MetricEntries metric_entries(const RuleConfig& cfg) {
    MetricEntries out;
    for (auto& [k, v] : describe(cfg)) {
        out.emplace_back("config." + k, v);
    }
    return out;
}

namespace {

void append_row(MetricEntries& out, const std::string& prefix, const DtxRow& row) {
    auto cf = [&](const char* name, const CountFraction& c) {
        out.emplace_back(prefix + name, std::to_string(c.count));
        out.emplace_back(prefix + name + "_fraction", text::format_fraction(c.fraction));
    };
    out.emplace_back(prefix + "available_ctx", std::to_string(row.available_ctx));
    out.emplace_back(prefix + "estimated_ctx", std::to_string(row.estimated_ctx));
    cf("matched", row.matched);
    cf("true_class", row.true_class);
    cf("false_class", row.false_class);
    cf("new_estimated", row.new_estimated);
}

}  // namespace

void append_entries(MetricEntries& out, const DtxMetrics& m) {
    append_row(out, "dtx.overall.", m.overall);
    append_row(out, "dtx.rp.", m.rp);
    append_row(out, "dtx.rt.", m.rt);
}

void append_entries(MetricEntries& out, const BcrMetrics& m) {
    out.emplace_back("bcr.detected", std::to_string(m.detected));
    for (auto s : {BcrSource::PRP, BcrSource::CRP, BcrSource::PRT, BcrSource::CRT}) {
        out.emplace_back("bcr.by_source." + std::string(to_string(s)), std::to_string(m.count(s)));
    }
    out.emplace_back("bcr.relapsed_in_truth", std::to_string(m.relapsed_in_truth));
    out.emplace_back("bcr.true_positives", std::to_string(m.true_positives));
    out.emplace_back("bcr.false_positives", std::to_string(m.false_positives));
    out.emplace_back("bcr.misses", std::to_string(m.misses));
    out.emplace_back("bcr.median_abs_date_error_days",
                     m.median_abs_date_error_days ? text::format_double(*m.median_abs_date_error_days) : "");
}

void append_entries(MetricEntries& out, const RecoveryMetrics& m) {
    out.emplace_back("recovery.eligible", std::to_string(m.eligible));
    out.emplace_back("recovery.recovered", std::to_string(m.recovered));
    out.emplace_back("recovery.correctly_classified", std::to_string(m.correctly_classified));
    out.emplace_back("recovery.recovery_rate", text::format_fraction(m.recovery_rate()));
    out.emplace_back("recovery.classification_accuracy", text::format_fraction(m.classification_accuracy()));
}

std::string format_metrics(const MetricEntries& entries) {
    std::string out;
    for (const auto& [k, v] : entries) {
        out += k + '=' + v + '\n';
    }
    return out;
}

void write_text_file(const fs::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw FileError(ErrorKind::IoError, path.string(), 0, "cannot open for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.close();
    if (!out) {
        throw FileError(ErrorKind::IoError, path.string(), 0, "write failed");
    }
}

namespace {

void ensure_dir(const fs::path& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec || !fs::is_directory(dir)) {
        throw FileError(ErrorKind::IoError, dir.string(), 0, "cannot create directory");
    }
}

}  // namespace

void write_cohort(const fs::path& dir, std::span<const PatientTimeline> cohort, const GroundTruth* truth) {
    ensure_dir(dir);
    write_text_file(dir / kPatientsFile, format_patients(cohort));
    write_text_file(dir / kPsaFile, format_psa(cohort));
    write_text_file(dir / kTreatmentsFile, format_treatments(cohort));
    if (truth) {
        write_text_file(dir / kTruthFile, format_truth(*truth));
    }
}

std::vector<fs::path> write_outputs(const OutputSet& outputs, const fs::path& out_dir) {
    ensure_dir(out_dir);
    std::vector<fs::path> written;
    auto put = [&](const char* name, const std::string& contents) {
        write_text_file(out_dir / name, contents);
        written.push_back(out_dir / name);
    };
    if (outputs.detections) put(kDetectionsFile, format_detections(*outputs.detections));
    if (outputs.bcr_events) put(kBcrEventsFile, format_bcr_events(*outputs.bcr_events));
    if (outputs.metrics) put(kMetricsFile, format_metrics(*outputs.metrics));
    if (outputs.report) {
        put(kHistogramFile, format_histogram(outputs.report->overall));
        if (!outputs.report->by_grade_group.empty()) {
            put(kGradeHistogramFile, format_grade_histograms(outputs.report->by_grade_group));
        }
    }
    return written;
}

}  // namespace psaflow::io
