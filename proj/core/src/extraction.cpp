#include "ccm/extraction.hpp"

#include "ccm/prompts.hpp"

#include <atomic>
#include <mutex>
#include <thread>

namespace ccm {

using json = nlohmann::json;

void ExtractionConfig::validate() const {
    if (temperature != 0.0) throw ValidationError("extraction temperature must be 0");
    if (max_parallel < 1) throw ValidationError("max parallel requests must be at least 1");
    if (retry_budget < 0) throw ValidationError("retry budget must be non-negative");
    if (model.empty()) throw ValidationError("model identifier is empty");
}

EntryKind kind_of(const PolicyEntry& e) noexcept {
    return std::holds_alternative<ReportEntry>(e) ? EntryKind::final_report : EntryKind::yearly_change;
}

const std::string& description_of(const PolicyEntry& e) noexcept {
    return std::visit([](const auto& x) -> const std::string& { return x.description; }, e);
}

const std::string& country_of(const PolicyEntry& e) noexcept {
    return std::visit([](const auto& x) -> const std::string& { return x.country; }, e);
}

std::string entry_id(const PolicyEntry& e) {
    std::string key;
    if (const auto* r = std::get_if<ReportEntry>(&e)) {
        key = "R|" + r->country + "|" + std::to_string(r->year) + "|" + r->index + "|" + r->description;
    } else {
        const auto& c = std::get<ChangeEntry>(e);
        key = "C|" + c.country + "|" + std::to_string(c.year) + "|" + c.index.value_or("") + "|" +
              (c.effective_date ? format_date(*c.effective_date) : std::string()) + "|" + c.description;
    }
    return hex64(fnv1a64(key));
}

PromptSet PromptSet::standard() {
    static const PromptSet set{build_system_prompt(Taxonomy::builtin(), default_exemplars())};
    return set;
}

std::optional<json> parse_model_reply(std::string_view reply) {
    auto try_parse = [](std::string_view s) -> std::optional<json> {
        json j = json::parse(s.begin(), s.end(), nullptr, false);
        if (j.is_discarded() || !j.is_object()) return std::nullopt;
        return j;
    };
    if (auto j = try_parse(trim(reply))) return j;
    auto open = reply.find('{');
    auto close = reply.rfind('}');
    if (open == std::string_view::npos || close == std::string_view::npos || close < open) return std::nullopt;
    return try_parse(reply.substr(open, close - open + 1));
}

namespace {

CcmEvent skeleton(const PolicyEntry& entry, const CountryMeta* meta) {
    CcmEvent e;
    e.id = entry_id(entry);
    e.source = kind_of(entry);
    if (const auto* r = std::get_if<ReportEntry>(&entry)) {
        e.year = r->year;
        e.country = r->country;
        e.index_code = r->code;
        e.category_index = r->index;
        e.category = r->category;
        e.description = r->description;
    } else {
        const auto& c = std::get<ChangeEntry>(entry);
        e.year = c.year;
        e.country = c.country;
        e.category_index = c.index;
        e.category = c.category;
        e.date = c.effective_date;
        e.description = c.description;
    }
    if (meta) {
        e.ifs_code = meta->ifs_code;
        e.region = meta->region;
        e.income_group = meta->income_group;
        e.income_subgroup = meta->income_subgroup;
    } else {
        e.metadata_missing = true;
    }
    return e;
}

}  // namespace

CcmEvent extract_event(const PolicyEntry& entry, const CountryMeta* meta, const ExtractionConfig& config,
                       ChatClient& client, const PromptSet& prompts) {
    const std::string& description = description_of(entry);
    if (trim(description).empty()) throw ValidationError("entry description is empty");

    CcmEvent event = skeleton(entry, meta);
    ChatRequest request;
    request.model = config.model;
    request.temperature = config.temperature;
    request.messages.push_back({"system", prompts.system_prompt});
    request.messages.push_back(
        {"user", build_user_prompt(event.country, event.category_index.value_or(""), event.category, description)});

    const int max_attempts = 1 + config.retry_budget;
    for (int attempt = 1;; ++attempt) {
        std::string reply;
        try {
            reply = client.complete(request);
        } catch (const TransportError& e) {
            if (attempt >= max_attempts)
                throw ExtractionFailure(ExtractionFailure::Kind::transport, attempt, "", e.what());
            continue;
        }
        auto payload = parse_model_reply(reply);
        std::vector<Violation> violations =
            payload ? validate_event(*payload, description)
                    : std::vector<Violation>{{"payload", "reply contains no JSON object"}};
        if (violations.empty()) {
            apply_payload(*payload, event);
            return event;
        }
        std::string listed = format_violations(violations);
        if (attempt >= max_attempts)
            throw ExtractionFailure(ExtractionFailure::Kind::validation, attempt, reply,
                                    "invalid payload after " + std::to_string(attempt) + " attempt(s): " + listed);
        request.messages.push_back({"assistant", reply});
        request.messages.push_back({"user", build_correction_prompt(listed)});
    }
}

std::string to_jsonl(const FailureRecord& f) {
    json j;
    j["id"] = f.id;
    j["position"] = f.position;
    j["kind"] = f.kind;
    j["attempts"] = f.attempts;
    j["message"] = f.message;
    j["raw_payload"] = f.raw_payload;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

BatchResult run_batch(const std::vector<PolicyEntry>& entries, const std::map<std::string, CountryMeta>& metas,
                      const ExtractionConfig& config, ChatClient& client, const BatchSink& sink,
                      const PromptSet& prompts) {
    config.validate();
    using Outcome = std::variant<std::monostate, CcmEvent, FailureRecord>;
    std::vector<Outcome> outcomes(entries.size());
    BatchResult result;
    std::mutex mu;
    std::size_t flushed = 0;
    std::atomic<std::size_t> next{0};

    auto process = [&](std::size_t i) -> Outcome {
        const auto& entry = entries[i];
        auto it = metas.find(country_of(entry));
        const CountryMeta* meta = it == metas.end() ? nullptr : &it->second;
        try {
            return extract_event(entry, meta, config, client, prompts);
        } catch (const ExtractionFailure& f) {
            return FailureRecord{entry_id(entry), i,
                                 f.kind() == ExtractionFailure::Kind::transport ? "transport" : "validation",
                                 f.attempts(), f.what(), f.raw_payload()};
        } catch (const std::exception& e) {
            return FailureRecord{entry_id(entry), i, "transport", 1, e.what(), ""};
        }
    };

    auto worker = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= entries.size()) return;
            Outcome out = process(i);
            std::lock_guard lock(mu);
            outcomes[i] = std::move(out);
            // Single writer: emit the completed prefix in input order.
            while (flushed < outcomes.size() && !std::holds_alternative<std::monostate>(outcomes[flushed])) {
                auto& o = outcomes[flushed];
                if (auto* ev = std::get_if<CcmEvent>(&o)) {
                    if (sink) sink(flushed, ev, nullptr);
                    result.events.push_back(std::move(*ev));
                } else {
                    auto& f = std::get<FailureRecord>(o);
                    if (sink) sink(flushed, nullptr, &f);
                    result.failures.push_back(std::move(f));
                }
                o = std::monostate{};
                ++flushed;
            }
        }
    };

    std::size_t n_workers = std::min<std::size_t>(static_cast<std::size_t>(config.max_parallel), entries.size());
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (std::size_t t = 0; t < n_workers; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return result;
}

}  // namespace ccm
