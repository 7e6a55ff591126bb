#pragma once

#include "ccm/corpus.hpp"
#include "ccm/eventstudy.hpp"
#include "ccm/finetune.hpp"

#include "oracles.hpp"

#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <vector>

namespace fixtures {

// Prediction JSONL for one model plus the same rows as raw strings.
std::string prediction_jsonl(std::mt19937_64& rng, std::size_t n, const std::string& model,
                             std::vector<oracle::RawPrediction>& raw);

// Random corpus over `countries` x [first_year, last_year] with gaps: some
// country-years lack a final report, some reports lack categories.
struct RandomCorpus {
    std::vector<ccm::ReportEntry> reports;
    std::vector<ccm::ChangeEntry> changes;
};
RandomCorpus random_corpus(std::mt19937_64& rng, int countries, int first_year, int last_year,
                           std::size_t changes_per_country_year);

// n examples with alternating capital-control flag and distinct text.
std::vector<ccm::TrainingExample> synthetic_examples(std::size_t n);

// Balanced panel of `countries` x `months` country rows with a unit effect,
// a month effect and an injected event-time effect for listed events.
struct SyntheticPanel {
    std::vector<ccm::PanelRow> rows;
    std::vector<ccm::EventSpec> events;
};
SyntheticPanel event_panel(int countries, int months, const std::vector<ccm::EventSpec>& events,
                           const std::map<int, double>& effect_r, double noise, std::uint64_t seed,
                           int funds_per_country = 1);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& tag);

std::string country_name(int i);

}  // namespace fixtures
