#include "ccm/chat_client.hpp"
#include "ccm/event.hpp"
#include "ccm/taxonomy.hpp"
#include "ccm/text.hpp"

#include "json.hpp"

#include <regex>
#include <span>

namespace ccm {

using json = nlohmann::json;

namespace {

struct Cue {
    const char* needle;
    const char* value;
};

struct Finder {
    std::vector<std::string_view> sentences;
    std::vector<std::string> lowered;

    explicit Finder(std::string_view description) : sentences(split_sentences(description)) {
        for (auto s : sentences) lowered.push_back(to_lower(s));
    }

    // First (sentence, cue) pair where the sentence contains the cue.
    std::optional<std::pair<std::string_view, const Cue*>> find(std::span<const Cue> cues) const {
        for (const auto& cue : cues)
            for (std::size_t i = 0; i < sentences.size(); ++i)
                if (lowered[i].find(cue.needle) != std::string::npos) return std::pair(sentences[i], &cue);
        return std::nullopt;
    }
};

// Order matters: earlier cues win ("approval was removed" is a removal).
constexpr Cue kActionCues[] = {
    {"removed", "remove"},       {"eliminated", "remove"},        {"abolished", "remove"},
    {"lifted", "remove"},        {"repealed", "remove"},          {"eased", "ease"},
    {"relaxed", "ease"},         {"simplified", "ease"},          {"prohibit", "prohibit"},
    {"banned", "prohibit"},      {"no longer allowed", "prohibit"}, {"suspend", "suspend"},
    {"froze", "suspend"},        {"quota", "subject to quota"},   {"approval", "require approval"},
    {"authorization", "require approval"}, {"ceiling", "limit"},  {"limit", "limit"},
    {"not exceeding", "limit"},  {"cap ", "limit"},               {"permitted", "permit"},
    {"allowed", "permit"},       {"amended", "amend"},            {"modified", "amend"},
    {"issued", "amend"},         {"clarif", "clarify"},
};

constexpr Cue kLevelCues[] = {
    {"european union", "supranational"}, {"(eu)", "supranational"},   {"provincial", "subnational"},
    {"province", "subnational"},         {"municipal", "subnational"}, {"central bank", "national"},
    {"government", "national"},          {"ministry", "national"},     {"law", "national"},
    {"decree", "national"},              {"executive order", "national"}, {"regulation", "national"},
};

constexpr Cue kActorCues[] = {
    {"central bank", "central bank"}, {"ministry", "ministry"}, {"government", "government"},
    {"committee", "investment committee"}, {"commercial bank", "commercial banks"},
};

constexpr Cue kInstrumentCues[] = {
    {"foreign exchange", "foreign exchange"}, {"reserve requirement", "reserve requirement"},
    {"bond", "bonds"},                        {"shares", "equity"},
    {"equity", "equity"},                     {"credit", "credit"},
    {"loan", "credit"},                       {"real estate", "real estate"},
    {"derivative", "derivatives"},            {"investment", "direct investment"},
};

constexpr Cue kConditionCues[] = {
    {"without", "without"}, {"subject to", "with"}, {"approval", "with"}, {"only", "with"},
};

constexpr Cue kBeneficiaryCues[] = {
    {"exporter", "exporters"}, {"traveler", "travelers"}, {"nonresident", "nonresidents"},
    {"foreign invest", "foreign investors"}, {"resident", "residents"},
};

constexpr Cue kTargetCountryCues[] = {
    {"north korea", "North Korea"},
    {"democratic people", "North Korea"},
    {"iran", "Iran"},
    {"russia", "Russia"},
};

constexpr Cue kIndustryCues[] = {
    {"bank", "banking"}, {"insurance", "insurance"}, {"real estate", "real estate"}, {"energy", "energy"},
};

constexpr Cue kTradeCues[] = {{"import", "1"}, {"export", "1"}, {"tariff", "1"}};
constexpr Cue kSanctionCues[] = {{"sanction", "1"}, {"blocking", "1"}, {"frozen", "1"}, {"freeze", "1"}};
constexpr Cue kSecurityCues[] = {{"security", "1"}, {"terroris", "1"}, {"national interest", "1"}};

std::string_view intensity_for(std::string_view action) {
    if (action == "prohibit" || action == "suspend" || action == "limit") return "restrictive";
    if (action == "require approval" || action == "subject to quota") return "conditional";
    if (action == "permit" || action == "remove" || action == "ease") return "liberalizing";
    return "neutral";
}

std::string after_prefix(std::string_view text, std::string_view prefix) {
    auto pos = text.find(prefix);
    if (pos == std::string_view::npos) return {};
    auto end = text.find('\n', pos);
    return std::string(trim(text.substr(pos + prefix.size(), end == std::string_view::npos ? text.npos
                                                                                            : end - pos - prefix.size())));
}

}  // namespace

std::string MockChatClient::complete(const ChatRequest& request) {
    constexpr std::string_view kMarker = "\nDescription:\n";
    std::string_view user;
    for (const auto& m : request.messages) {
        if (m.role == "user" && m.content.find(kMarker) != std::string::npos) {
            user = m.content;
            break;
        }
    }
    if (user.empty()) throw TransportError("mock backend: no user message carrying a description");
    std::string_view description = user.substr(user.find(kMarker) + kMarker.size());
    std::string index = after_prefix(user, "Category index: ");

    Finder finder(description);
    json p;
    auto cite = [&](const std::string& field, std::string_view sentence) {
        p[field + "_source_sentence"] = std::string(sentence);
    };
    auto text_field = [&](const std::string& field, std::span<const Cue> cues) {
        if (auto hit = finder.find(cues)) {
            p[field] = hit->second->value;
            cite(field, hit->first);
        } else {
            p[field] = nullptr;
            p[field + "_source_sentence"] = nullptr;
        }
    };
    auto flag_field = [&](const std::string& field, std::span<const Cue> cues) {
        if (auto hit = finder.find(cues)) {
            p[field] = true;
            cite(field, hit->first);
        } else {
            p[field] = false;
            p[field + "_source_sentence"] = nullptr;
        }
    };

    std::string_view first = finder.sentences.empty() ? trim(description) : finder.sentences.front();
    std::string action = "clarify";
    std::string_view action_sentence = first;
    std::vector<std::string> cited;
    if (auto hit = finder.find(kActionCues)) {
        action = hit->second->value;
        action_sentence = hit->first;
        cited.emplace_back(hit->second->needle);
    }
    p["action"] = action;
    cite("action", action_sentence);
    p["action_intensity"] = std::string(intensity_for(action));
    cite("action_intensity", action_sentence);

    FlowDirection dir = FlowDirection::undefined;
    if (const auto* node = Taxonomy::builtin().find(index)) dir = node->direction;
    p["action_direction"] = std::string(to_string(dir));
    if (dir != FlowDirection::undefined)
        cite("action_direction", action_sentence);
    else
        p["action_direction_source_sentence"] = nullptr;

    if (auto hit = finder.find(kLevelCues)) {
        p["action_level"] = hit->second->value;
        cite("action_level", hit->first);
    } else {
        p["action_level"] = "undefined";
        p["action_level_source_sentence"] = nullptr;
    }

    text_field("actor", kActorCues);
    text_field("instrument", kInstrumentCues);
    text_field("beneficiary", kBeneficiaryCues);
    text_field("target_country", kTargetCountryCues);
    text_field("target_industry", kIndustryCues);
    text_field("condition", kConditionCues);
    p["condition_detail"] = nullptr;
    if (auto hit = finder.find(kConditionCues)) p["condition_detail"] = hit->second->needle;

    p["limit_threshold"] = nullptr;
    p["limit_threshold_source_sentence"] = nullptr;
    static const std::regex kThreshold(R"((\d+(\.\d+)?)\s*(percent|%))", std::regex::icase);
    for (auto s : finder.sentences) {
        std::match_results<std::string_view::const_iterator> m;
        if (std::regex_search(s.begin(), s.end(), m, kThreshold)) {
            p["limit_threshold"] = m.str(0);
            cite("limit_threshold", s);
            break;
        }
    }

    p["retroactive_date"] = nullptr;
    p["retroactive_date_source_sentence"] = nullptr;
    flag_field("is_trade_policy", kTradeCues);
    flag_field("is_sanction", kSanctionCues);
    flag_field("is_national_security", kSecurityCues);

    p["llm_reasoning"] = {{"cited_phrases", cited},
                          {"rationale", cited.empty() ? "No action verb found; treated as a clarification."
                                                      : "The cue '" + cited.front() + "' marks the action as '" +
                                                            action + "'."}};
    return p.dump(-1, ' ', false, json::error_handler_t::replace);
}

}  // namespace ccm
