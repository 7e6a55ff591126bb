#include "ccm/evaluation.hpp"
#include "ccm/eventstudy.hpp"
#include "ccm/finetune.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace ccm;

namespace {

std::vector<PredictionRecord> predictions(std::size_t n) {
    static const std::vector<std::string> gold{"XI.A.5.b", "XI.A.2.a.1.ii", "XI.A.4.b.2", "X.D.2", "XI.A.1"};
    static const std::vector<std::string> pred{"XI.A.5.b", "XI.A.2.a.1.i", "XI.A.4", "NON-CAPITAL-CONTROL", "garbage"};
    std::mt19937_64 rng(1);
    std::vector<PredictionRecord> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto& r = out[i];
        r.id = std::to_string(i);
        r.model = "m";
        r.gold = Label::parse(gold[rng() % gold.size()]);
        r.predicted = Label::parse(pred[rng() % pred.size()]);
        r.gold_status = rng() % 2 ? Status::yes : Status::no;
        r.predicted_status = r.gold_status;
    }
    return out;
}

void BM_EvaluateModel(benchmark::State& state) {
    auto recs = predictions(static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(evaluate_model("m", recs));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_EvaluateModel)->Arg(500)->Arg(50000);

void BM_SplitDataset(benchmark::State& state) {
    std::vector<TrainingExample> ex(29012);
    for (std::size_t i = 0; i < ex.size(); ++i) ex[i].user_message = std::to_string(i);
    SplitSpec spec{28412, 100, 500, 42};
    for (auto _ : state) benchmark::DoNotOptimize(split_dataset(ex, spec));
}
BENCHMARK(BM_SplitDataset);

void BM_EventStudy(benchmark::State& state) {
    const int countries = static_cast<int>(state.range(0));
    const int months = 120;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 0.01);
    std::vector<PanelRow> rows;
    std::vector<EventSpec> events;
    for (int c = 0; c < countries; ++c) {
        std::string name = "C" + std::to_string(c);
        for (int t = 0; t < months; ++t) {
            PanelRow r;
            r.unit = r.country = name;
            r.month = 24000 + t;
            r.total_size = 1;
            r.flowpct = n(rng);
            rows.push_back(r);
        }
        if (c % 2 == 0)
            events.push_back({name, 24000 + 12 + static_cast<int>(rng() % 90), c % 4 ? IntensityGroup::R : IntensityGroup::L, {}});
    }
    auto frame = build_event_frame(rows, events, 6);
    for (auto _ : state) benchmark::DoNotOptimize(estimate_event_study(frame));
    state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(rows.size()));
}
BENCHMARK(BM_EventStudy)->Arg(20)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
