#include "ccm/error.hpp"
#include "ccm/finetune.hpp"

#include "doctest.h"
#include "fixtures.hpp"

#include <algorithm>
#include <set>

using namespace ccm;

namespace {

ReportEntry report(const std::string& country, int year, const std::string& index, Status s,
                   const std::string& category = "cat") {
    return {year, country, index, category, std::nullopt, s, "report text"};
}

ChangeEntry change(const std::string& country, int year, std::optional<std::string> index, const std::string& text) {
    return {year, country, std::move(index), "old name", std::nullopt, text};
}

}  // namespace

TEST_CASE("final report pairs") {
    Corpus c = merge_corpus({report("Afghanistan", 2019, "X.D.2", Status::yes),
                             report("France", 2019, "XI.A.5.b", Status::no)},
                            {});
    auto pairs = build_final_report_pairs(c);
    REQUIRE(pairs.size() == 2);
    CHECK(pairs[0].gold_index == "X.D.2");
    CHECK_FALSE(pairs[0].is_capital_control);
    CHECK(pairs[0].gold_status == Status::yes);
    CHECK(pairs[1].is_capital_control);
    CHECK(pairs[1].gold_status == Status::no);
    CHECK(pairs[1].pair_kind == EntryKind::final_report);
    CHECK(build_final_report_pairs(merge_corpus({}, {})).empty());
}

TEST_CASE("hand-traced change join") {
    // reports: France 2016 {XI.A.4.b.1 no, XI.A.5.b yes}; Chile 2016 {X.D.2 yes}; Brazil 2017 {XI.A.1 yes}
    Corpus c = merge_corpus(
        {report("France", 2016, "XI.A.4.b.1", Status::no, "Credits to residents from nonresidents"),
         report("France", 2016, "XI.A.5.b", Status::yes), report("Chile", 2016, "X.D.2", Status::yes, "Other"),
         report("Brazil", 2017, "XI.A.1", Status::yes)},
        {change("France", 2015, "XI.A.4.b.1", "a"), change("France", 2015, "XI.A.2", "b"),
         change("Chile", 2015, "X.D.2.", "c"), change("Brazil", 2017, "XI.A.1", "d"),
         change("Brazil", 2016, std::nullopt, "e"), change("Brazil", 2016, "XI.A.1", "f")});
    auto res = build_change_pairs(c);
    REQUIRE(res.pairs.size() == 3);
    // Buckets are ordered Brazil, Chile, France.
    CHECK(res.pairs[0].input_text == "f");
    CHECK(res.pairs[0].gold_status == Status::yes);
    CHECK(res.pairs[1].input_text == "c");
    CHECK(res.pairs[1].gold_index == "X.D.2");
    CHECK_FALSE(res.pairs[1].is_capital_control);
    CHECK(res.pairs[2].input_text == "a");
    CHECK(res.pairs[2].gold_status == Status::no);
    CHECK(res.pairs[2].gold_category == "Credits to residents from nonresidents");
    CHECK(res.pairs[2].pair_kind == EntryKind::yearly_change);

    std::multiset<std::string> reasons;
    for (const auto& s : res.skips) reasons.insert(s.reason);
    CHECK(res.skips.size() == 3);
    CHECK(reasons.count(std::string(kSkipNoIndex)) == 1);
    CHECK(reasons.count(std::string(kSkipMissingNextReport)) == 1);
    CHECK(reasons.count(std::string(kSkipCategoryAbsent)) == 1);
}

TEST_CASE("chat example for the EO 13722 change") {
    TrainingPair p;
    p.country = "United States";
    p.year = 2016;
    p.input_text = "Executive Order 13722 was issued.";
    p.gold_index = "XI.A.5.b";
    p.gold_category = "Inward direct investment";
    p.gold_status = Status::yes;
    p.pair_kind = EntryKind::yearly_change;
    p.is_capital_control = true;
    auto ex = to_chat_example(p, Taxonomy::builtin());
    CHECK(ex.user_message == "Country: United States\nPolicy change: Executive Order 13722 was issued.");
    CHECK(ex.assistant_message ==
          R"({"category_path":{"category_l1":"XI.Capital Transactions","category_l2":"XI.A.Controls on capital transactions","category_l3":"XI.A.5.Controls on direct investment","target_category":"XI.A.5.b.Inward direct investment"},"index":"XI.A.5.b.","category":"Inward direct investment","status":"yes"})");
    CHECK(ex.system_message.find("XI.A. Controls on capital transactions — ") != std::string::npos);
    CHECK(ex.system_message.find("\n- XI.A.2. Controls on capital and money market instruments — ") !=
          std::string::npos);
    CHECK(ex.system_message.find("\n  - XI.A.2.a. On capital market securities — ") != std::string::npos);

    auto a = parse_assistant_message(ex.assistant_message);
    CHECK(a.path.ancestors.size() == 3);
    CHECK(a.path.target_category == "XI.A.5.b.Inward direct investment");
    CHECK(a.index == "XI.A.5.b.");
    CHECK(a.status == Status::yes);
}

TEST_CASE("short path and out-of-taxonomy variant") {
    TrainingPair p;
    p.country = "France";
    p.input_text = "t";
    p.gold_index = "XI.A";
    p.gold_status = Status::no;
    auto a = parse_assistant_message(to_chat_example(p, Taxonomy::builtin()).assistant_message);
    CHECK(a.path.ancestors == std::vector<std::string>{"XI.Capital Transactions"});
    CHECK(a.path.target_category == "XI.A.Controls on capital transactions");

    p.gold_index = "X.D.2";
    p.gold_category = "Other payments";
    auto ex = to_chat_example(p, Taxonomy::builtin());
    CHECK_FALSE(ex.is_capital_control);
    auto b = parse_assistant_message(ex.assistant_message);
    CHECK(b.path.ancestors.empty());
    CHECK(b.path.target_category == std::string(kOutOfTaxonomy));
    CHECK(b.index == "X.D.2.");
    CHECK(b.category == "Other payments");

    p.gold_index = "XI.A.9.z";
    CHECK_THROWS_AS(to_chat_example(p, Taxonomy::builtin()), ValidationError);
}

TEST_CASE("assistant parsing rejects malformed payloads") {
    CHECK_THROWS_AS(parse_assistant_message("[]"), ParseError);
    CHECK_THROWS_AS(parse_assistant_message(R"({"index":"x","category":"y","status":"yes"})"), ParseError);
    CHECK_THROWS_AS(
        parse_assistant_message(
            R"({"category_path":{"target_category":"t","category_l1":"a"},"index":"x","category":"y","status":"yes"})"),
        ParseError);
    CHECK_THROWS_AS(
        parse_assistant_message(
            R"({"category_path":{"category_l2":"a","target_category":"t"},"index":"x","category":"y","status":"yes"})"),
        ParseError);
    CHECK_THROWS_AS(
        parse_assistant_message(R"({"category_path":{"target_category":"t"},"index":"x","category":"y","status":"?"})"),
        ParseError);
}

TEST_CASE("jsonl round trip") {
    auto ex = fixtures::synthetic_examples(3)[1];
    auto back = example_from_jsonl(to_jsonl(ex));
    CHECK(back.system_message == ex.system_message);
    CHECK(back.user_message == ex.user_message);
    CHECK(back.assistant_message == ex.assistant_message);
    CHECK_THROWS_AS(example_from_jsonl("{}"), ParseError);
}

TEST_CASE("split partition and determinism") {
    auto examples = fixtures::synthetic_examples(1000);
    SplitSpec spec = parse_split("800,100,100", 7);
    CHECK(spec.seed == 7);
    auto a = split_dataset(examples, spec);
    auto b = split_dataset(examples, spec);
    CHECK(a.train.size() == 800);
    CHECK(a.validation.size() == 100);
    CHECK(a.test.size() == 100);
    std::set<std::string> seen;
    for (const auto* part : {&a.train, &a.validation, &a.test})
        for (const auto& e : *part) CHECK(seen.insert(e.user_message).second);
    CHECK(seen.size() == 1000);
    for (std::size_t i = 0; i < a.test.size(); ++i) CHECK(a.test[i].user_message == b.test[i].user_message);
    CHECK(a.test_composition.capital_control + a.test_composition.other == 100);

    auto c = split_dataset(examples, parse_split("800,100,100", 8));
    bool differs = false;
    for (std::size_t i = 0; i < c.test.size(); ++i) differs |= c.test[i].user_message != a.test[i].user_message;
    CHECK(differs);

    auto perm = seeded_permutation(50, 1);
    std::vector<std::size_t> sorted = perm;
    std::sort(sorted.begin(), sorted.end());
    for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);

    CHECK_THROWS_AS(split_dataset(examples, parse_split("800,100,99", 1)), ValidationError);
    CHECK_THROWS_AS(parse_split("800,100", 1), ValidationError);
    CHECK_THROWS_AS(parse_split("a,b,c", 1), ValidationError);
}

TEST_CASE("dataset distribution totals") {
    auto examples = fixtures::synthetic_examples(20);
    std::map<std::string, CountryMeta> metas;
    metas[examples[0].country] = {examples[0].country, "1", "Europe", "Advanced", "High"};
    auto d = dataset_distribution(examples, metas);
    auto total = [](const auto& m) {
        std::size_t n = 0;
        for (const auto& [k, v] : m) n += v;
        return n;
    };
    CHECK(total(d.by_year) == 20);
    CHECK(total(d.by_region) == 20);
    CHECK(total(d.by_income_group) == 20);
    CHECK(d.by_region.count("unknown"));
    std::size_t cat = 0;
    for (const auto& [k, v] : d.by_category) cat += v.count;
    CHECK(cat == 20);
    CHECK(d.capital_control + d.other == 20);
}
