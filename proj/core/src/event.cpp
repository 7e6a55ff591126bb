#include "ccm/event.hpp"

#include "ccm/error.hpp"

#include <algorithm>

namespace ccm {

using json = nlohmann::json;

namespace {

constexpr std::string_view kActionNames[] = {"prohibit", "limit",  "suspend", "require approval", "subject to quota",
                                             "permit",   "remove", "ease",    "amend",            "clarify"};
constexpr std::string_view kIntensityNames[] = {"restrictive", "liberalizing", "conditional", "neutral"};
constexpr std::string_view kLevelNames[] = {"supranational", "national", "subnational", "undefined"};

const std::vector<std::string> kTextFields = {"instrument",     "actor",           "beneficiary", "target_country",
                                              "target_industry", "limit_threshold"};
const std::vector<std::string> kBoolFields = {"is_trade_policy", "is_sanction", "is_national_security"};

std::optional<std::string> opt_text(const json& j, const std::string& key) {
    auto it = j.find(key);
    if (it == j.end() || !it->is_string()) return std::nullopt;
    std::string v = it->get<std::string>();
    if (trim(v).empty()) return std::nullopt;
    return v;
}

bool is_absent(const json& j, const std::string& key) {
    auto it = j.find(key);
    return it == j.end() || it->is_null();
}

json opt_json(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }
json opt_json(const std::optional<Date>& v) { return v ? json(format_date(*v)) : json(nullptr); }

std::optional<std::string> read_opt_string(const json& j, const char* key) {
    auto it = j.find(key);
    if (it == j.end() || it->is_null()) return std::nullopt;
    if (!it->is_string()) throw ValidationError(std::string("field '") + key + "' must be a string or null");
    return it->get<std::string>();
}

std::optional<Date> read_opt_date(const json& j, const char* key) {
    auto s = read_opt_string(j, key);
    if (!s) return std::nullopt;
    auto d = parse_date(*s);
    if (!d) throw ValidationError(std::string("field '") + key + "' is not a date: " + *s);
    return d;
}

template <class T, class Parse>
T read_enum(const json& j, const char* key, Parse parse) {
    auto s = read_opt_string(j, key);
    if (!s) throw ValidationError(std::string("missing field '") + key + "'");
    auto v = parse(*s);
    if (!v) throw ValidationError(std::string("field '") + key + "' has unknown value '" + *s + "'");
    return *v;
}

}  // namespace

std::string_view to_string(Action a) noexcept { return kActionNames[static_cast<int>(a)]; }
std::string_view to_string(Intensity i) noexcept { return kIntensityNames[static_cast<int>(i)]; }
std::string_view to_string(ActionLevel l) noexcept { return kLevelNames[static_cast<int>(l)]; }
std::string_view to_string(ConditionPolarity c) noexcept { return c == ConditionPolarity::with ? "with" : "without"; }
std::string_view to_string(EntryKind k) noexcept {
    return k == EntryKind::final_report ? "final_report" : "yearly_change";
}

std::optional<Action> parse_action(std::string_view s) noexcept {
    for (std::size_t i = 0; i < std::size(kActionNames); ++i)
        if (kActionNames[i] == s) return static_cast<Action>(i);
    return std::nullopt;
}

std::optional<Intensity> parse_intensity(std::string_view s) noexcept {
    for (std::size_t i = 0; i < std::size(kIntensityNames); ++i)
        if (kIntensityNames[i] == s) return static_cast<Intensity>(i);
    return std::nullopt;
}

std::optional<ActionLevel> parse_action_level(std::string_view s) noexcept {
    for (std::size_t i = 0; i < std::size(kLevelNames); ++i)
        if (kLevelNames[i] == s) return static_cast<ActionLevel>(i);
    return std::nullopt;
}

std::optional<ConditionPolarity> parse_condition(std::string_view s) noexcept {
    if (s == "with") return ConditionPolarity::with;
    if (s == "without") return ConditionPolarity::without;
    return std::nullopt;
}

const std::vector<std::string>& event_field_names() {
    static const std::vector<std::string> names = {
        "year",           "ifs_code",        "country",          "region",           "income_group",
        "income_subgroup", "index_code",     "category_index",   "category",         "date",
        "description",    "retroactive_date", "action",          "action_intensity", "action_direction",
        "action_level",   "instrument",      "actor",            "condition",        "beneficiary",
        "target_country", "target_industry", "limit_threshold",  "is_trade_policy",  "is_sanction",
        "is_national_security", "llm_reasoning"};
    return names;
}

const std::vector<std::string>& extracted_field_names() {
    static const std::vector<std::string> names = {
        "retroactive_date", "action",         "action_intensity", "action_direction", "action_level",
        "instrument",       "actor",          "condition",        "beneficiary",      "target_country",
        "target_industry",  "limit_threshold", "is_trade_policy", "is_sanction",      "is_national_security",
        "llm_reasoning"};
    return names;
}

std::vector<Violation> validate_event(const json& c, std::string_view description) {
    std::vector<Violation> out;
    if (!c.is_object()) {
        out.push_back({"payload", "payload is not a JSON object"});
        return out;
    }
    std::vector<std::string> populated;

    auto check_enum = [&](const std::string& field, bool required, auto parse, std::string_view unset) {
        auto it = c.find(field);
        if (it == c.end() || it->is_null()) {
            if (required) out.push_back({field, "missing required value"});
            return;
        }
        if (!it->is_string()) {
            out.push_back({field, "expected a string"});
            return;
        }
        std::string v = it->get<std::string>();
        if (!parse(v)) {
            out.push_back({field, "value '" + v + "' is not in the allowed vocabulary"});
            return;
        }
        if (v != unset) populated.push_back(field);
    };
    check_enum("action", true, parse_action, "");
    check_enum("action_intensity", true, parse_intensity, "");
    check_enum("action_direction", false, parse_flow_direction, "undefined");
    check_enum("action_level", false, parse_action_level, "undefined");
    check_enum("condition", false, parse_condition, "");

    for (const auto& f : kTextFields) {
        if (is_absent(c, f)) continue;
        if (!c.at(f).is_string())
            out.push_back({f, "expected a string or null"});
        else if (!trim(c.at(f).get<std::string>()).empty())
            populated.push_back(f);
    }
    if (!is_absent(c, "condition_detail") && !c.at("condition_detail").is_string())
        out.push_back({"condition_detail", "expected a string or null"});

    if (!is_absent(c, "retroactive_date")) {
        const auto& v = c.at("retroactive_date");
        if (!v.is_string() || !parse_date(v.get<std::string>()))
            out.push_back({"retroactive_date", "expected MM/DD/YYYY or YYYY-MM-DD date or null"});
        else
            populated.push_back("retroactive_date");
    }
    for (const auto& f : kBoolFields) {
        if (is_absent(c, f)) continue;
        if (!c.at(f).is_boolean())
            out.push_back({f, "expected true, false or null"});
        else if (c.at(f).get<bool>())
            populated.push_back(f);
    }
    if (!is_absent(c, "llm_reasoning")) {
        const auto& r = c.at("llm_reasoning");
        bool ok = r.is_string();
        if (r.is_object()) {
            ok = r.contains("rationale") && r.at("rationale").is_string();
            if (ok && r.contains("cited_phrases") && !r.at("cited_phrases").is_null()) {
                ok = r.at("cited_phrases").is_array();
                if (ok)
                    for (const auto& p : r.at("cited_phrases")) ok = ok && p.is_string();
            }
        }
        if (!ok) out.push_back({"llm_reasoning", "expected {cited_phrases: [string], rationale: string}"});
    }

    for (const auto& f : extracted_field_names()) {
        if (f == "llm_reasoning") continue;
        const std::string key = f + "_source_sentence";
        bool needed = std::find(populated.begin(), populated.end(), f) != populated.end();
        auto it = c.find(key);
        if (it == c.end() || it->is_null()) {
            if (needed) out.push_back({f, "populated field has no " + key});
            continue;
        }
        if (!it->is_string()) {
            out.push_back({f, key + " must be a string"});
            continue;
        }
        std::string s = it->get<std::string>();
        if (trim(s).empty()) {
            if (needed) out.push_back({f, key + " is empty"});
        } else if (description.find(s) == std::string_view::npos) {
            out.push_back({f, key + " is not a verbatim sentence of the description"});
        }
    }
    return out;
}

void apply_payload(const json& p, CcmEvent& e) {
    e.action = read_enum<Action>(p, "action", parse_action);
    e.action_intensity = read_enum<Intensity>(p, "action_intensity", parse_intensity);
    e.action_direction = FlowDirection::undefined;
    if (auto s = read_opt_string(p, "action_direction")) e.action_direction = parse_flow_direction(*s).value();
    e.action_level = ActionLevel::undefined;
    if (auto s = read_opt_string(p, "action_level")) e.action_level = parse_action_level(*s).value();

    e.instrument = opt_text(p, "instrument");
    e.actor = opt_text(p, "actor");
    e.beneficiary = opt_text(p, "beneficiary");
    e.target_country = opt_text(p, "target_country");
    e.target_industry = opt_text(p, "target_industry");
    e.limit_threshold = opt_text(p, "limit_threshold");
    e.retroactive_date = read_opt_date(p, "retroactive_date");

    e.condition.reset();
    if (auto s = read_opt_string(p, "condition")) e.condition = Condition{parse_condition(*s).value(), opt_text(p, "condition_detail")};

    auto flag = [&](const char* k) { return p.contains(k) && p.at(k).is_boolean() && p.at(k).get<bool>(); };
    e.is_trade_policy = flag("is_trade_policy");
    e.is_sanction = flag("is_sanction");
    e.is_national_security = flag("is_national_security");

    e.llm_reasoning.reset();
    if (!is_absent(p, "llm_reasoning")) {
        const auto& r = p.at("llm_reasoning");
        LlmReasoning lr;
        if (r.is_string()) {
            lr.rationale = r.get<std::string>();
        } else {
            lr.rationale = r.at("rationale").get<std::string>();
            if (r.contains("cited_phrases") && r.at("cited_phrases").is_array())
                lr.cited_phrases = r.at("cited_phrases").get<std::vector<std::string>>();
        }
        e.llm_reasoning = std::move(lr);
    }

    e.source_sentences.clear();
    for (const auto& f : extracted_field_names()) {
        auto s = opt_text(p, f + "_source_sentence");
        if (s) e.source_sentences[f] = *s;
    }
}

json event_payload(const CcmEvent& e) {
    json p;
    p["action"] = std::string(to_string(e.action));
    p["action_intensity"] = std::string(to_string(e.action_intensity));
    p["action_direction"] = std::string(to_string(e.action_direction));
    p["action_level"] = std::string(to_string(e.action_level));
    p["instrument"] = opt_json(e.instrument);
    p["actor"] = opt_json(e.actor);
    p["beneficiary"] = opt_json(e.beneficiary);
    p["target_country"] = opt_json(e.target_country);
    p["target_industry"] = opt_json(e.target_industry);
    p["limit_threshold"] = opt_json(e.limit_threshold);
    p["retroactive_date"] = opt_json(e.retroactive_date);
    p["condition"] = e.condition ? json(std::string(to_string(e.condition->polarity))) : json(nullptr);
    p["condition_detail"] = e.condition ? opt_json(e.condition->detail) : json(nullptr);
    p["is_trade_policy"] = e.is_trade_policy;
    p["is_sanction"] = e.is_sanction;
    p["is_national_security"] = e.is_national_security;
    if (e.llm_reasoning)
        p["llm_reasoning"] = {{"cited_phrases", e.llm_reasoning->cited_phrases},
                              {"rationale", e.llm_reasoning->rationale}};
    else
        p["llm_reasoning"] = nullptr;
    for (const auto& f : extracted_field_names()) {
        if (f == "llm_reasoning") continue;
        auto it = e.source_sentences.find(f);
        p[f + "_source_sentence"] = it == e.source_sentences.end() ? json(nullptr) : json(it->second);
    }
    return p;
}

json event_to_json(const CcmEvent& e) {
    // nlohmann::json objects are std::map backed, so keys serialize sorted.
    json j = event_payload(e);
    for (const auto& f : extracted_field_names())
        if (f != "llm_reasoning") j.erase(f + "_source_sentence");
    j.erase("condition_detail");
    j["condition"] = e.condition ? json{{"polarity", std::string(to_string(e.condition->polarity))},
                                        {"detail", opt_json(e.condition->detail)}}
                                 : json(nullptr);
    j["id"] = e.id;
    j["source"] = std::string(to_string(e.source));
    j["year"] = e.year;
    j["ifs_code"] = opt_json(e.ifs_code);
    j["country"] = e.country;
    j["region"] = opt_json(e.region);
    j["income_group"] = opt_json(e.income_group);
    j["income_subgroup"] = opt_json(e.income_subgroup);
    j["index_code"] = opt_json(e.index_code);
    j["category_index"] = opt_json(e.category_index);
    j["category"] = e.category;
    j["date"] = opt_json(e.date);
    j["description"] = e.description;
    j["source_sentences"] = json::object();
    for (const auto& [k, v] : e.source_sentences) j["source_sentences"][k] = v;
    j["metadata_missing"] = e.metadata_missing;
    return j;
}

CcmEvent event_from_json(const json& j) {
    if (!j.is_object()) throw ValidationError("event record is not a JSON object");
    CcmEvent e;
    try {
        e.id = j.at("id").get<std::string>();
        e.source = j.value("source", std::string("yearly_change")) == "final_report" ? EntryKind::final_report
                                                                                    : EntryKind::yearly_change;
        e.year = j.at("year").get<int>();
        e.ifs_code = read_opt_string(j, "ifs_code");
        e.country = j.at("country").get<std::string>();
        e.region = read_opt_string(j, "region");
        e.income_group = read_opt_string(j, "income_group");
        e.income_subgroup = read_opt_string(j, "income_subgroup");
        e.index_code = read_opt_string(j, "index_code");
        e.category_index = read_opt_string(j, "category_index");
        e.category = j.value("category", std::string());
        e.date = read_opt_date(j, "date");
        e.description = j.at("description").get<std::string>();
        e.metadata_missing = j.value("metadata_missing", false);

        json payload = j;
        payload.erase("condition");
        if (!is_absent(j, "condition")) {
            payload["condition"] = j.at("condition").at("polarity");
            payload["condition_detail"] = j.at("condition").value("detail", json(nullptr));
        }
        if (j.contains("source_sentences") && j.at("source_sentences").is_object())
            for (auto& [k, v] : j.at("source_sentences").items()) payload[k + "_source_sentence"] = v;
        apply_payload(payload, e);
    } catch (const json::exception& ex) {
        throw ValidationError(std::string("malformed event record: ") + ex.what());
    } catch (const std::bad_optional_access&) {
        throw ValidationError("event record has an out-of-vocabulary enum value");
    }
    return e;
}

std::string format_violations(const std::vector<Violation>& v) {
    std::string out;
    for (const auto& x : v) {
        if (!out.empty()) out += "; ";
        out += x.field + ": " + x.message;
    }
    return out;
}

}  // namespace ccm
