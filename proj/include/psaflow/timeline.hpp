#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace psaflow {

// Calendar date at day resolution.
using Date = std::chrono::sys_days;

Date make_date(int year, unsigned month, unsigned day);

// Strict YYYY-MM-DD; nullopt for malformed text or impossible dates.
std::optional<Date> parse_date(std::string_view text);
std::string format_date(Date d);

// Exact civil-day difference b - a.
constexpr int elapsed_days(Date a, Date b) noexcept { return (b - a).count(); }

enum class Assay { standard, ultrasensitive };
enum class TreatmentKind { RP, RT, HT, CT };
enum class Provenance { recorded, imputed };

std::string_view to_string(Assay a);
std::string_view to_string(TreatmentKind k);
std::string_view to_string(Provenance p);
std::optional<Assay> parse_assay(std::string_view s);
std::optional<TreatmentKind> parse_treatment_kind(std::string_view s);

constexpr bool is_curative(TreatmentKind k) noexcept {
    return k == TreatmentKind::RP || k == TreatmentKind::RT;
}

struct PsaMeasurement {
    std::string patient_id;
    Date date;
    double value_ng_ml = 0.0;
    Assay assay = Assay::standard;

    bool operator==(const PsaMeasurement&) const = default;
};

struct TreatmentEvent {
    std::string patient_id;
    Date date;
    TreatmentKind kind = TreatmentKind::RP;
    Provenance provenance = Provenance::recorded;

    bool operator==(const TreatmentEvent&) const = default;
};

struct TimelineMeta {
    std::optional<Date> diagnosis_date;
    std::optional<int> grade_group;

    bool operator==(const TimelineMeta&) const = default;
};

// Set of treatment kinds queried as one. HT and CT are usually asked for
// together ("HTCT").
class KindSet {
public:
    constexpr KindSet() = default;
    constexpr KindSet(TreatmentKind k) : bits_(bit(k)) {}

    constexpr bool contains(TreatmentKind k) const noexcept { return (bits_ & bit(k)) != 0; }
    constexpr bool empty() const noexcept { return bits_ == 0; }
    constexpr KindSet operator|(KindSet o) const noexcept { return from_bits(bits_ | o.bits_); }
    constexpr bool operator==(const KindSet&) const = default;

private:
    static constexpr unsigned bit(TreatmentKind k) noexcept { return 1u << static_cast<unsigned>(k); }
    static constexpr KindSet from_bits(unsigned b) noexcept {
        KindSet s;
        s.bits_ = b;
        return s;
    }
    unsigned bits_ = 0;
};

inline constexpr KindSet kRP{TreatmentKind::RP};
inline constexpr KindSet kRT{TreatmentKind::RT};
inline constexpr KindSet kHTCT = KindSet{TreatmentKind::HT} | KindSet{TreatmentKind::CT};
inline constexpr KindSet kCurative = kRP | kRT;

// One patient's chronologically ordered PSA series and treatments.
// Immutable; only build_timeline creates one.
class PatientTimeline {
public:
    const std::string& patient_id() const noexcept { return patient_id_; }
    std::span<const PsaMeasurement> psa() const noexcept { return psa_; }
    std::span<const TreatmentEvent> treatments() const noexcept { return treatments_; }
    const TimelineMeta& meta() const noexcept { return meta_; }
    std::optional<Date> diagnosis_date() const noexcept { return meta_.diagnosis_date; }
    std::optional<int> grade_group() const noexcept { return meta_.grade_group; }

    // Exact duplicate rows dropped while building.
    std::size_t dedup_count() const noexcept { return dedup_count_; }

    // Build bookkeeping (dedup_count) is not part of the value.
    bool operator==(const PatientTimeline& o) const {
        return patient_id_ == o.patient_id_ && psa_ == o.psa_ && treatments_ == o.treatments_ &&
               meta_ == o.meta_;
    }

private:
    friend PatientTimeline build_timeline(std::string patient_id, std::vector<PsaMeasurement> psa_rows,
                                          std::vector<TreatmentEvent> tx_rows, TimelineMeta meta);

    std::string patient_id_;
    std::vector<PsaMeasurement> psa_;
    std::vector<TreatmentEvent> treatments_;
    TimelineMeta meta_;
    std::size_t dedup_count_ = 0;
};

// Sorts rows by date (stable: same-day rows keep input order) and drops
// exact duplicates. Throws Error(MixedPatient) for rows of another patient,
// Error(NegativeValue) for PSA < 0 or non-finite, Error(InvalidValue) for a
// grade group outside 1..5.
PatientTimeline build_timeline(std::string patient_id, std::vector<PsaMeasurement> psa_rows,
                               std::vector<TreatmentEvent> tx_rows, TimelineMeta meta = {});

// Copy of t with extra treatment events merged in.
PatientTimeline with_treatments(const PatientTimeline& t, std::span<const TreatmentEvent> extra);

// Copy of t keeping only recorded treatments.
PatientTimeline without_imputed(const PatientTimeline& t);

enum class GapRule { strict, inclusive };

std::optional<Date> first_date(const PatientTimeline& t, KindSet kinds);
std::optional<Date> last_date(const PatientTimeline& t, KindSet kinds);
std::optional<Date> second_date(const PatientTimeline& t, KindSet kinds);

// Earliest date of `kinds` whose distance from anchor is > min_gap_days
// (strict) or >= min_gap_days (inclusive). min_gap_days must be >= 0.
std::optional<Date> first_date_after(const PatientTimeline& t, KindSet kinds, Date anchor, int min_gap_days,
                                     GapRule rule);
bool exists(const PatientTimeline& t, KindSet kinds);

namespace query {
struct FirstDate {
    KindSet kinds;
};
struct LastDate {
    KindSet kinds;
};
struct SecondDate {
    KindSet kinds;
};
struct FirstDateAfter {
    KindSet kinds;
    Date anchor;
    int min_gap_days = 0;
    GapRule rule = GapRule::strict;
};
struct Exists {
    KindSet kinds;
};
}  // namespace query

using TimelineQuery =
    std::variant<query::FirstDate, query::LastDate, query::SecondDate, query::FirstDateAfter, query::Exists>;
using QueryResult = std::variant<std::optional<Date>, bool>;

QueryResult timeline_query(const PatientTimeline& t, const TimelineQuery& q);

}  // namespace psaflow
