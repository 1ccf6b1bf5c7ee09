#include "psaflow/config.hpp"

#include <fstream>
#include <sstream>
#include <variant>

#include "psaflow/errors.hpp"
#include "psaflow/text.hpp"

namespace psaflow {

namespace {

using Field = std::variant<int RuleConfig::*, double RuleConfig::*>;

struct NamedField {
    const char* name;
    Field field;
};

const NamedField kFields[] = {
    {"one_year_days", &RuleConfig::one_year_days},
    {"six_months_days", &RuleConfig::six_months_days},
    {"two_years_days", &RuleConfig::two_years_days},
    {"three_years_days", &RuleConfig::three_years_days},
    {"drop_window_days", &RuleConfig::drop_window_days},
    {"strong_alpha", &RuleConfig::strong_alpha},
    {"strong_beta_ng_ml", &RuleConfig::strong_beta_ng_ml},
    {"weak_alpha", &RuleConfig::weak_alpha},
    {"weak_beta_ng_ml", &RuleConfig::weak_beta_ng_ml},
    {"rp_nadir_cutoff_ng_ml", &RuleConfig::rp_nadir_cutoff_ng_ml},
    {"prp_threshold_ultrasensitive_ng_ml", &RuleConfig::prp_threshold_ultrasensitive_ng_ml},
    {"prp_threshold_standard_ng_ml", &RuleConfig::prp_threshold_standard_ng_ml},
    {"prt_rise_above_nadir_ng_ml", &RuleConfig::prt_rise_above_nadir_ng_ml},
};

}  // namespace

std::vector<std::pair<std::string, std::string>> describe(const RuleConfig& cfg) {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto& f : kFields) {
        std::visit(
            [&](auto member) {
                const auto& v = cfg.*member;
                if constexpr (std::is_same_v<std::decay_t<decltype(v)>, int>) {
                    out.emplace_back(f.name, std::to_string(v));
                } else {
                    out.emplace_back(f.name, text::format_double(v));
                }
            },
            f.field);
    }
    return out;
}

void set_rule_value(RuleConfig& cfg, std::string_view name, std::string_view value) {
    for (const auto& f : kFields) {
        if (name != f.name) {
            continue;
        }
        std::visit(
            [&](auto member) {
                auto& slot = cfg.*member;
                if constexpr (std::is_same_v<std::decay_t<decltype(slot)>, int>) {
                    auto parsed = text::parse_int(value);
                    if (!parsed || *parsed < 0 || *parsed > 100000) {
                        throw Error(ErrorKind::InvalidConfig,
                                    std::string(name) + " expects a non-negative day count, got '" +
                                        std::string(value) + "'");
                    }
                    slot = static_cast<int>(*parsed);
                } else {
                    auto parsed = text::parse_double(value);
                    if (!parsed || !(*parsed >= 0.0)) {
                        throw Error(ErrorKind::InvalidConfig,
                                    std::string(name) + " expects a non-negative number, got '" +
                                        std::string(value) + "'");
                    }
                    slot = *parsed;
                }
            },
            f.field);
        return;
    }
    throw Error(ErrorKind::InvalidConfig, "unknown setting '" + std::string(name) + "'");
}

RuleConfig parse_rule_config(std::string_view content, const std::string& origin) {
    RuleConfig cfg;
    std::size_t line_no = 0;
    for (auto raw : text::split(content, '\n')) {
        ++line_no;
        auto hash = raw.find('#');
        auto line = text::trim(raw.substr(0, hash));
        if (line.empty()) {
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            throw FileError(ErrorKind::InvalidConfig, origin, line_no, "expected name=value");
        }
        try {
            set_rule_value(cfg, text::trim(line.substr(0, eq)), text::trim(line.substr(eq + 1)));
        } catch (const Error& e) {
            throw FileError(ErrorKind::InvalidConfig, origin, line_no, e.what());
        }
    }
    return cfg;
}

RuleConfig load_rule_config(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FileError(ErrorKind::IoError, path.string(), 0, "cannot open config file");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_rule_config(ss.str(), path.string());
}

}  // namespace psaflow
