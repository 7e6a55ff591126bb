#include "fixtures.hpp"

#include "ccm/taxonomy.hpp"

#include "json.hpp"

#include <unistd.h>

#include <atomic>
#include <sstream>

namespace fixtures {

using json = nlohmann::json;

namespace {

template <class T>
const T& pick(std::mt19937_64& rng, const std::vector<T>& v) {
    return v[std::uniform_int_distribution<std::size_t>(0, v.size() - 1)(rng)];
}

bool coin(std::mt19937_64& rng, double p) { return std::uniform_real_distribution<double>(0, 1)(rng) < p; }

std::vector<std::string> taxonomy_indexes() {
    std::vector<std::string> out;
    for (const auto& n : ccm::Taxonomy::builtin().nodes()) out.push_back(n.index);
    return out;
}

std::string mutate(std::mt19937_64& rng, const std::string& index) {
    std::vector<std::string> parts;
    std::stringstream ss(index);
    for (std::string t; std::getline(ss, t, '.');) parts.push_back(t);
    static const std::vector<std::string> tokens{"1", "2", "3", "a", "b", "c", "i", "ii", "iii", "iv", "A", "B", "XI", "X"};
    std::size_t at = std::uniform_int_distribution<std::size_t>(0, parts.size() - 1)(rng);
    parts[at] = pick(rng, tokens);
    if (coin(rng, 0.3) && parts.size() < 6) parts.push_back(pick(rng, tokens));
    if (coin(rng, 0.2) && parts.size() > 1) parts.pop_back();
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i) out += (i ? "." : "") + parts[i];
    return out;
}

}  // namespace

std::string country_name(int i) { return "Country" + std::to_string(i); }

std::string prediction_jsonl(std::mt19937_64& rng, std::size_t n, const std::string& model,
                             std::vector<oracle::RawPrediction>& raw) {
    static const std::vector<std::string> indexes = taxonomy_indexes();
    static const std::vector<std::string> other{"X.D.2", "XII.A", "IX.B.1", "XI.B", "NON-CAPITAL-CONTROL", "XI"};
    static const std::vector<std::string> garbage{"", "  ", "I think bonds", "XI..A", "XI.A.2.a.1.i.x", "??", "XI.A.5.b!"};
    static const std::vector<std::string> statuses{"yes", "no", "Yes", "NO"};
    static const std::vector<std::string> bad_status{"maybe", "", "y"};
    std::ostringstream out;
    for (std::size_t i = 0; i < n; ++i) {
        oracle::RawPrediction r;
        r.gold_index = coin(rng, 0.8) ? pick(rng, indexes) : pick(rng, other);
        if (r.gold_index != "NON-CAPITAL-CONTROL" && coin(rng, 0.5)) r.gold_index += ".";
        r.gold_status = pick(rng, statuses);
        double u = std::uniform_real_distribution<double>(0, 1)(rng);
        if (u < 0.4)
            r.predicted_index = r.gold_index;
        else if (u < 0.7)
            r.predicted_index = mutate(rng, r.gold_index == "NON-CAPITAL-CONTROL" ? "XI.A.2" : r.gold_index);
        else if (u < 0.85)
            r.predicted_index = pick(rng, indexes);
        else if (u < 0.93)
            r.predicted_index = pick(rng, other);
        else
            r.predicted_index = pick(rng, garbage);
        if (coin(rng, 0.3)) r.predicted_index += ".";
        r.predicted_status = coin(rng, 0.85) ? r.gold_status : (coin(rng, 0.7) ? pick(rng, statuses) : pick(rng, bad_status));
        json j{{"id", "r" + std::to_string(i)},
               {"model", model},
               {"predicted_index", r.predicted_index},
               {"predicted_status", r.predicted_status},
               {"gold_index", r.gold_index},
               {"gold_status", r.gold_status}};
        out << j.dump() << '\n';
        raw.push_back(std::move(r));
    }
    return out.str();
}

RandomCorpus random_corpus(std::mt19937_64& rng, int countries, int first_year, int last_year,
                           std::size_t changes_per_country_year) {
    static const std::vector<std::string> indexes = [] {
        auto v = taxonomy_indexes();
        v.push_back("X.D.2");
        v.push_back("XII.A");
        return v;
    }();
    RandomCorpus c;
    for (int k = 0; k < countries; ++k) {
        const std::string country = country_name(k);
        for (int y = first_year; y <= last_year; ++y) {
            if (!coin(rng, 0.85)) continue;  // no final report this year
            for (const auto& idx : indexes) {
                if (!coin(rng, 0.8)) continue;
                ccm::ReportEntry r;
                r.year = y;
                r.country = country;
                r.index = idx;
                r.category = "Category " + idx;
                r.status = coin(rng, 0.5) ? ccm::Status::yes : ccm::Status::no;
                r.description = "Report text for " + idx + " in " + std::to_string(y);
                c.reports.push_back(std::move(r));
            }
        }
        for (int y = first_year; y <= last_year; ++y) {
            for (std::size_t j = 0; j < changes_per_country_year; ++j) {
                ccm::ChangeEntry ch;
                ch.year = y;
                ch.country = country;
                if (coin(rng, 0.97)) ch.index = pick(rng, indexes);
                ch.category = ch.index ? "Category " + *ch.index : "";
                ch.effective_date = ccm::Date{y, 1 + static_cast<int>(j % 12), 1};
                ch.description = "Change " + std::to_string(j) + " for " + country + " in " + std::to_string(y);
                c.changes.push_back(std::move(ch));
            }
        }
    }
    return c;
}

std::vector<ccm::TrainingExample> synthetic_examples(std::size_t n) {
    std::vector<ccm::TrainingExample> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& e = out[i];
        e.country = country_name(static_cast<int>(i % 37));
        e.year = 1999 + static_cast<int>(i % 25);
        e.is_capital_control = i % 2 == 0;
        e.gold_index = e.is_capital_control ? "XI.A.5.b" : "X.D.2";
        e.system_message = "system";
        e.user_message = "Country: " + e.country + "\nPolicy change: item " + std::to_string(i);
        e.assistant_message = "{\"i\":" + std::to_string(i) + "}";
    }
    return out;
}

SyntheticPanel event_panel(int countries, int months, const std::vector<ccm::EventSpec>& events,
                           const std::map<int, double>& effect_r, double noise, std::uint64_t seed,
                           int funds_per_country) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> eps(0.0, 1.0);
    std::vector<double> month_fe(static_cast<std::size_t>(months));
    for (auto& m : month_fe) m = 0.01 * eps(rng);
    SyntheticPanel p;
    p.events = events;
    for (int c = 0; c < countries; ++c) {
        for (int f = 0; f < funds_per_country; ++f) {
            double unit_fe = 0.02 * eps(rng);
            for (int t = 0; t < months; ++t) {
                ccm::PanelRow r;
                r.country = country_name(c);
                r.fund_id = funds_per_country > 1 ? "F" + std::to_string(f) : "";
                r.unit = funds_per_country > 1 ? r.fund_id + "|" + r.country : r.country;
                r.month = 24000 + t;
                double v = unit_fe + month_fe[static_cast<std::size_t>(t)] + noise * eps(rng);
                for (const auto& e : events) {
                    if (e.country != r.country || e.group != ccm::IntensityGroup::R) continue;
                    auto it = effect_r.find(r.month - e.event_month);
                    if (it != effect_r.end()) v += it->second;
                }
                r.total_size = 1000.0;
                r.flow = v * r.total_size;
                r.flowpct = v;
                p.rows.push_back(std::move(r));
            }
        }
    }
    return p;
}

std::filesystem::path temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto p = std::filesystem::temp_directory_path() /
             ("ccm_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

}  // namespace fixtures
