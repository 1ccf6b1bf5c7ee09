#include "psaflow/timeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "psaflow/errors.hpp"

namespace psaflow {

Date make_date(int year, unsigned month, unsigned day) {
    std::chrono::year_month_day ymd{std::chrono::year{year}, std::chrono::month{month}, std::chrono::day{day}};
    if (!ymd.ok()) {
        throw Error(ErrorKind::InvalidValue, "invalid calendar date");
    }
    return Date{ymd};
}

std::optional<Date> parse_date(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
        return std::nullopt;
    }
    auto digits = [&](std::size_t from, std::size_t n) -> std::optional<int> {
        int v = 0;
        for (std::size_t i = from; i < from + n; ++i) {
            if (s[i] < '0' || s[i] > '9') {
                return std::nullopt;
            }
            v = v * 10 + (s[i] - '0');
        }
        return v;
    };
    auto y = digits(0, 4);
    auto m = digits(5, 2);
    auto d = digits(8, 2);
    if (!y || !m || !d) {
        return std::nullopt;
    }
    std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) {
        return std::nullopt;
    }
    return Date{ymd};
}

std::string format_date(Date d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string_view to_string(Assay a) {
    return a == Assay::ultrasensitive ? "ultrasensitive" : "standard";
}

std::string_view to_string(TreatmentKind k) {
    switch (k) {
        case TreatmentKind::RP: return "RP";
        case TreatmentKind::RT: return "RT";
        case TreatmentKind::HT: return "HT";
        case TreatmentKind::CT: return "CT";
    }
    return "?";
}

std::string_view to_string(Provenance p) {
    return p == Provenance::imputed ? "imputed" : "recorded";
}

std::optional<Assay> parse_assay(std::string_view s) {
    if (s == "standard") return Assay::standard;
    if (s == "ultrasensitive") return Assay::ultrasensitive;
    return std::nullopt;
}

std::optional<TreatmentKind> parse_treatment_kind(std::string_view s) {
    if (s == "RP") return TreatmentKind::RP;
    if (s == "RT") return TreatmentKind::RT;
    if (s == "HT") return TreatmentKind::HT;
    if (s == "CT") return TreatmentKind::CT;
    return std::nullopt;
}

namespace {

// Stable sort by date, then drop rows equal to an earlier row of the same day.
template <class Row>
std::size_t sort_and_dedup(std::vector<Row>& rows) {
    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    std::vector<Row> kept;
    kept.reserve(rows.size());
    std::size_t day_begin = 0;
    std::size_t dropped = 0;
    for (auto& row : rows) {
        if (!kept.empty() && kept.back().date != row.date) {
            day_begin = kept.size();
        }
        bool dup = std::find(kept.begin() + static_cast<std::ptrdiff_t>(day_begin), kept.end(), row) != kept.end();
        if (dup) {
            ++dropped;
        } else {
            kept.push_back(std::move(row));
        }
    }
    rows = std::move(kept);
    return dropped;
}

}  // namespace

PatientTimeline build_timeline(std::string patient_id, std::vector<PsaMeasurement> psa_rows,
                               std::vector<TreatmentEvent> tx_rows, TimelineMeta meta) {
    for (const auto& p : psa_rows) {
        if (p.patient_id != patient_id) {
            throw Error(ErrorKind::MixedPatient,
                        "PSA row for '" + p.patient_id + "' in timeline of '" + patient_id + "'");
        }
        if (!(p.value_ng_ml >= 0.0) || !std::isfinite(p.value_ng_ml)) {
            throw Error(ErrorKind::NegativeValue,
                        "PSA value must be a finite non-negative number (patient '" + patient_id + "', " +
                            format_date(p.date) + ")");
        }
    }
    for (const auto& tx : tx_rows) {
        if (tx.patient_id != patient_id) {
            throw Error(ErrorKind::MixedPatient,
                        "treatment row for '" + tx.patient_id + "' in timeline of '" + patient_id + "'");
        }
    }
    if (meta.grade_group && (*meta.grade_group < 1 || *meta.grade_group > 5)) {
        throw Error(ErrorKind::InvalidValue, "grade group must be 1..5 (patient '" + patient_id + "')");
    }

    PatientTimeline t;
    t.dedup_count_ = sort_and_dedup(psa_rows) + sort_and_dedup(tx_rows);
    t.patient_id_ = std::move(patient_id);
    t.psa_ = std::move(psa_rows);
    t.treatments_ = std::move(tx_rows);
    t.meta_ = meta;
    return t;
}

PatientTimeline with_treatments(const PatientTimeline& t, std::span<const TreatmentEvent> extra) {
    std::vector<TreatmentEvent> tx(t.treatments().begin(), t.treatments().end());
    tx.insert(tx.end(), extra.begin(), extra.end());
    return build_timeline(t.patient_id(), {t.psa().begin(), t.psa().end()}, std::move(tx), t.meta());
}

PatientTimeline without_imputed(const PatientTimeline& t) {
    std::vector<TreatmentEvent> tx;
    for (const auto& e : t.treatments()) {
        if (e.provenance == Provenance::recorded) {
            tx.push_back(e);
        }
    }
    return build_timeline(t.patient_id(), {t.psa().begin(), t.psa().end()}, std::move(tx), t.meta());
}

std::optional<Date> first_date(const PatientTimeline& t, KindSet kinds) {
    for (const auto& e : t.treatments()) {
        if (kinds.contains(e.kind)) {
            return e.date;
        }
    }
    return std::nullopt;
}

std::optional<Date> last_date(const PatientTimeline& t, KindSet kinds) {
    auto tx = t.treatments();
    for (auto it = tx.rbegin(); it != tx.rend(); ++it) {
        if (kinds.contains(it->kind)) {
            return it->date;
        }
    }
    return std::nullopt;
}

std::optional<Date> second_date(const PatientTimeline& t, KindSet kinds) {
    int seen = 0;
    for (const auto& e : t.treatments()) {
        if (kinds.contains(e.kind) && ++seen == 2) {
            return e.date;
        }
    }
    return std::nullopt;
}

std::optional<Date> first_date_after(const PatientTimeline& t, KindSet kinds, Date anchor, int min_gap_days,
                                     GapRule rule) {
    if (min_gap_days < 0) {
        throw std::invalid_argument("first_date_after: min_gap_days must be >= 0");
    }
    for (const auto& e : t.treatments()) {
        if (!kinds.contains(e.kind)) {
            continue;
        }
        int gap = elapsed_days(anchor, e.date);
        if (rule == GapRule::strict ? gap > min_gap_days : gap >= min_gap_days) {
            return e.date;
        }
    }
    return std::nullopt;
}

bool exists(const PatientTimeline& t, KindSet kinds) {
    return std::any_of(t.treatments().begin(), t.treatments().end(),
                       [&](const TreatmentEvent& e) { return kinds.contains(e.kind); });
}

QueryResult timeline_query(const PatientTimeline& t, const TimelineQuery& q) {
    struct Visitor {
        const PatientTimeline& t;
        QueryResult operator()(const query::FirstDate& q) const { return first_date(t, q.kinds); }
        QueryResult operator()(const query::LastDate& q) const { return last_date(t, q.kinds); }
        QueryResult operator()(const query::SecondDate& q) const { return second_date(t, q.kinds); }
        QueryResult operator()(const query::FirstDateAfter& q) const {
            return first_date_after(t, q.kinds, q.anchor, q.min_gap_days, q.rule);
        }
        QueryResult operator()(const query::Exists& q) const { return exists(t, q.kinds); }
    };
    return std::visit(Visitor{t}, q);
}

}  // namespace psaflow
