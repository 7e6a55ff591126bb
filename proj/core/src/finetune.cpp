#include "ccm/finetune.hpp"

#include "ccm/error.hpp"

#include "json.hpp"

#include <algorithm>
#include <limits>
#include <random>
#include <sstream>

namespace ccm {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

constexpr const char* kClassifierInstructions =
    "You are an expert in identifying the capital policy change and updating the IMF category status based on the "
    "input text. Please select from outer layer to the inner layer. Please consider both the country's capital "
    "control status and background and the given text. Here are the hierarchical structures for the category with "
    "its description:\n";

constexpr const char* kClassifierOutputNote =
    "\nAnswer with a JSON object {\"category_path\": {\"category_l1\": ..., \"category_l2\": ..., ..., "
    "\"target_category\": ...}, \"index\": ..., \"category\": ..., \"status\": \"yes\" or \"no\"}. Each path entry "
    "is the index followed by the category name. If the text does not concern a capital control category, set "
    "target_category to \"NON-CAPITAL-CONTROL\" and give the index and name of the report section it belongs to.\n";

std::string render(const CategoryNode& n) { return n.index + "." + n.name; }

void write_tree(std::ostream& os, const Taxonomy& taxonomy, const CategoryNode& node, std::size_t level) {
    if (level > 0) os << std::string(2 * (level - 1), ' ') << "- ";
    os << node.index << ". " << node.name << " — " << node.description << '\n';
    for (const auto* child : taxonomy.children(node.index)) write_tree(os, taxonomy, *child, level + 1);
}

}  // namespace

std::vector<TrainingPair> build_final_report_pairs(const Corpus& corpus) {
    std::vector<TrainingPair> out;
    for (const auto& b : corpus.buckets()) {
        for (const auto& r : b.reports) {
            TrainingPair p;
            p.country = r.country;
            p.year = r.year;
            p.input_text = r.description;
            p.gold_index = r.index;
            p.gold_category = r.category;
            p.gold_status = r.status;
            p.pair_kind = EntryKind::final_report;
            p.is_capital_control = is_capital_control(r.index);
            out.push_back(std::move(p));
        }
    }
    return out;
}

ChangePairs build_change_pairs(const Corpus& corpus) {
    ChangePairs out;
    for (const auto& b : corpus.buckets()) {
        for (const auto& c : b.changes) {
            if (!c.index) {
                out.skips.push_back({c.country, c.year, std::nullopt, std::string(kSkipNoIndex)});
                continue;
            }
            const CorpusBucket* next = corpus.bucket(c.country, c.year + 1);
            if (!next || next->reports.empty()) {
                out.skips.push_back({c.country, c.year, c.index, std::string(kSkipMissingNextReport)});
                continue;
            }
            // Index is the join key; the year+1 row's category name wins on drift.
            const ReportEntry* r = corpus.report(c.country, c.year + 1, *c.index);
            if (!r) {
                out.skips.push_back({c.country, c.year, c.index, std::string(kSkipCategoryAbsent)});
                continue;
            }
            TrainingPair p;
            p.country = c.country;
            p.year = c.year;
            p.input_text = c.description;
            p.gold_index = r->index;
            p.gold_category = r->category;
            p.gold_status = r->status;
            p.pair_kind = EntryKind::yearly_change;
            p.is_capital_control = is_capital_control(r->index);
            out.pairs.push_back(std::move(p));
        }
    }
    return out;
}

std::string build_classifier_system_message(const Taxonomy& taxonomy) {
    std::ostringstream os;
    os << kClassifierInstructions << '\n';
    const CategoryNode* top = taxonomy.find("XI.A");
    if (top) {
        write_tree(os, taxonomy, *top, 0);
    } else {
        for (const auto& n : taxonomy.nodes())
            if (!n.parent_index) write_tree(os, taxonomy, n, 0);
    }
    os << kClassifierOutputNote;
    return os.str();
}

TrainingExample to_chat_example(const TrainingPair& pair, const Taxonomy& taxonomy) {
    return to_chat_example(pair, taxonomy, build_classifier_system_message(taxonomy));
}

TrainingExample to_chat_example(const TrainingPair& pair, const Taxonomy& taxonomy,
                                const std::string& system_message) {
    TrainingExample ex;
    ex.system_message = system_message;
    ex.user_message = "Country: " + pair.country + "\nPolicy change: " + pair.input_text;
    ex.country = pair.country;
    ex.year = pair.year;
    ex.gold_index = normalize_index(pair.gold_index);
    ex.is_capital_control = is_capital_control(ex.gold_index);
    ex.word_count = word_count(pair.input_text);

    ordered_json path = ordered_json::object();
    ordered_json answer;
    if (ex.is_capital_control) {
        const CategoryNode* node = taxonomy.find(ex.gold_index);
        if (!node)
            throw ValidationError("gold index " + pair.gold_index + " is a capital-control index missing from the taxonomy");
        auto chain = taxonomy.lineage(node->index);
        for (std::size_t i = 0; i + 1 < chain.size(); ++i)
            path["category_l" + std::to_string(i + 1)] = render(*chain[i]);
        path["target_category"] = render(*node);
        answer["category_path"] = path;
        answer["index"] = node->index + ".";
        answer["category"] = node->name;
    } else {
        path["target_category"] = std::string(kOutOfTaxonomy);
        answer["category_path"] = path;
        answer["index"] = ex.gold_index + ".";
        answer["category"] = pair.gold_category;
    }
    answer["status"] = std::string(to_string(pair.gold_status));
    ex.assistant_message = answer.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
    return ex;
}

AssistantAnswer parse_assistant_message(std::string_view text) {
    ordered_json j = ordered_json::parse(text.begin(), text.end(), nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ParseError("assistant message is not a JSON object");
    auto str = [&](const ordered_json& o, const char* key) {
        if (!o.contains(key) || !o.at(key).is_string())
            throw ParseError(std::string("assistant message lacks string field '") + key + "'");
        return o.at(key).get<std::string>();
    };
    AssistantAnswer a;
    if (!j.contains("category_path") || !j.at("category_path").is_object())
        throw ParseError("assistant message lacks category_path");
    const auto& path = j.at("category_path");
    std::size_t level = 1;
    for (auto it = path.begin(); it != path.end(); ++it) {
        if (!it.value().is_string()) throw ParseError("category_path entries must be strings");
        if (it.key() == "target_category") {
            if (std::next(it) != path.end()) throw ParseError("target_category must be the last path entry");
            a.path.target_category = it.value().get<std::string>();
        } else if (it.key() == "category_l" + std::to_string(level)) {
            a.path.ancestors.push_back(it.value().get<std::string>());
            ++level;
        } else {
            throw ParseError("unexpected category_path key '" + it.key() + "'");
        }
    }
    if (a.path.target_category.empty()) throw ParseError("category_path lacks target_category");
    a.index = str(j, "index");
    a.category = str(j, "category");
    auto status = parse_status(str(j, "status"));
    if (!status) throw ParseError("assistant status must be yes or no");
    a.status = *status;
    return a;
}

std::string to_jsonl(const TrainingExample& ex) {
    ordered_json j;
    j["messages"] = ordered_json::array({
        ordered_json{{"role", "system"}, {"content", ex.system_message}},
        ordered_json{{"role", "user"}, {"content", ex.user_message}},
        ordered_json{{"role", "assistant"}, {"content", ex.assistant_message}},
    });
    return j.dump(-1, ' ', false, ordered_json::error_handler_t::replace);
}

TrainingExample example_from_jsonl(std::string_view line) {
    json j = json::parse(line.begin(), line.end(), nullptr, false);
    if (j.is_discarded() || !j.contains("messages") || !j.at("messages").is_array() || j.at("messages").size() != 3)
        throw ParseError("training line must hold a three-message array");
    const auto& m = j.at("messages");
    const char* roles[] = {"system", "user", "assistant"};
    for (std::size_t i = 0; i < 3; ++i)
        if (m.at(i).value("role", "") != roles[i]) throw ParseError(std::string("message ") + std::to_string(i) + " must have role " + roles[i]);
    TrainingExample ex;
    ex.system_message = m.at(0).at("content").get<std::string>();
    ex.user_message = m.at(1).at("content").get<std::string>();
    ex.assistant_message = m.at(2).at("content").get<std::string>();
    return ex;
}

std::string to_jsonl(const SkipRecord& s) {
    json j;
    j["country"] = s.country;
    j["year"] = s.year;
    j["index"] = s.index ? json(*s.index) : json(nullptr);
    j["reason"] = s.reason;
    return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

SplitSpec parse_split(std::string_view text, std::uint64_t seed) {
    SplitSpec spec;
    spec.seed = seed;
    std::size_t* slots[] = {&spec.train_size, &spec.validation_size, &spec.test_size};
    std::size_t start = 0;
    for (int i = 0; i < 3; ++i) {
        std::size_t comma = text.find(',', start);
        if ((i < 2) == (comma == std::string_view::npos))
            throw ValidationError("split must be three comma-separated sizes, got '" + std::string(text) + "'");
        std::string tok(trim(text.substr(start, comma == std::string_view::npos ? text.npos : comma - start)));
        if (tok.empty() || tok.find_first_not_of("0123456789") != std::string::npos)
            throw ValidationError("split size '" + tok + "' is not a non-negative integer");
        *slots[i] = std::stoull(tok);
        start = comma + 1;
    }
    return spec;
}

std::vector<std::size_t> seeded_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<std::size_t> perm(n);
    for (std::size_t i = 0; i < n; ++i) perm[i] = i;
    std::mt19937_64 rng(seed);
    auto bounded = [&](std::uint64_t m) {
        const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % m;
        std::uint64_t r;
        do r = rng();
        while (r >= limit);
        return r % m;
    };
    for (std::size_t i = n; i > 1; --i) std::swap(perm[i - 1], perm[bounded(i)]);
    return perm;
}

DatasetSplits split_dataset(const std::vector<TrainingExample>& examples, const SplitSpec& spec) {
    const std::size_t total = spec.train_size + spec.validation_size + spec.test_size;
    if (total != examples.size())
        throw ValidationError("split sizes " + std::to_string(spec.train_size) + "+" +
                              std::to_string(spec.validation_size) + "+" + std::to_string(spec.test_size) +
                              " do not sum to " + std::to_string(examples.size()) + " examples");
    auto perm = seeded_permutation(examples.size(), spec.seed);
    auto take = [&](std::size_t from, std::size_t count) {
        std::vector<std::size_t> idx(perm.begin() + static_cast<std::ptrdiff_t>(from),
                                     perm.begin() + static_cast<std::ptrdiff_t>(from + count));
        std::sort(idx.begin(), idx.end());
        std::vector<TrainingExample> out;
        out.reserve(count);
        for (auto i : idx) out.push_back(examples[i]);
        return out;
    };
    DatasetSplits s;
    s.train = take(0, spec.train_size);
    s.validation = take(spec.train_size, spec.validation_size);
    s.test = take(spec.train_size + spec.validation_size, spec.test_size);
    for (const auto& ex : s.test) (ex.is_capital_control ? s.test_composition.capital_control : s.test_composition.other)++;
    return s;
}

DatasetDistribution dataset_distribution(const std::vector<TrainingExample>& examples,
                                         const std::map<std::string, CountryMeta>& metas) {
    DatasetDistribution d;
    std::map<std::string, std::size_t> words;
    for (const auto& ex : examples) {
        d.by_year[ex.year]++;
        auto it = metas.find(ex.country);
        d.by_income_group[it == metas.end() ? "unknown" : it->second.income_group]++;
        d.by_region[it == metas.end() ? "unknown" : it->second.region]++;
        std::string key = ex.is_capital_control ? ex.gold_index : std::string(kOutOfTaxonomy);
        d.by_category[key].count++;
        words[key] += ex.word_count;
        (ex.is_capital_control ? d.capital_control : d.other)++;
    }
    for (auto& [k, c] : d.by_category) c.mean_word_count = static_cast<double>(words[k]) / static_cast<double>(c.count);
    return d;
}

}  // namespace ccm
