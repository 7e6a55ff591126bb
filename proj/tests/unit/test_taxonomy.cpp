#include "ccm/error.hpp"
#include "ccm/taxonomy.hpp"

#include "doctest.h"
#include "reference_tables.hpp"

#include <fstream>
#include <sstream>

using namespace ccm;

TEST_CASE("index parsing") {
    auto p = parse_index("XI.A.2.a.1.ii");
    CHECK(p.depth() == 6);
    CHECK(p[5] == "ii");
    CHECK(parse_index("XI.A.5.b.").str() == "XI.A.5.b");
    CHECK(parse_index(" XI.A.5.b... ").str() == "XI.A.5.b");
    CHECK(parse_index("XI.A.2.a.1").prefix(2).str() == "XI.A");
    CHECK_THROWS_AS(parse_index(""), ParseError);
    CHECK_THROWS_AS(parse_index("..."), ParseError);
    CHECK_THROWS_AS(parse_index("XI..A"), ParseError);
    CHECK_THROWS_AS(parse_index("XI.A.2.a.1.ii.x"), ParseError);
    CHECK_THROWS_AS(parse_index("free text"), ParseError);
    CHECK(parse_index("xi.a").str() == "xi.a");
}

TEST_CASE("match depth and capital-control prefix") {
    CHECK(match_depth(parse_index("XI.A.2.b.1"), parse_index("XI.A.2.a.1")) == 3);
    CHECK(match_depth(parse_index("XI.A"), parse_index("XI.A.5.b")) == 2);
    CHECK(match_depth(parse_index("X.D.2"), parse_index("XI.A.5.b")) == 0);
    CHECK(is_capital_control("XI.A.5.b."));
    CHECK(is_capital_control("XI.A"));
    CHECK_FALSE(is_capital_control("XI"));
    CHECK_FALSE(is_capital_control("X.D.2"));
    CHECK_FALSE(is_capital_control("xi.a.5"));
    CHECK_FALSE(is_capital_control("not an index"));
}

TEST_CASE("builtin table matches the published category list") {
    const auto& t = Taxonomy::builtin();
    REQUIRE(t.size() == 45);
    CHECK(t.nodes().front().index == "XI");
    for (const auto& [index, label] : reference::kCategories) {
        const CategoryNode* n = t.find(index);
        REQUIRE_MESSAGE(n, index);
        std::string l = label;
        auto open = l.rfind(" [");
        std::string name = open == std::string::npos ? l : l.substr(0, open);
        CHECK(n->name == name);
        if (open != std::string::npos) CHECK(n->short_code == l.substr(open + 2, l.size() - open - 3));
        CHECK(n->depth == parse_index(index).depth());
    }
}

TEST_CASE("split short code") {
    auto [name, code] = split_short_code("Purchase locally by nonresidents [eq_plbn]");
    CHECK(name == "Purchase locally by nonresidents");
    CHECK(code == "eq_plbn");
    auto [n2, c2] = split_short_code("Commercial credits");
    CHECK(n2 == "Commercial credits");
    CHECK_FALSE(c2.has_value());
}

TEST_CASE("lineage and children") {
    const auto& t = Taxonomy::builtin();
    auto chain = t.lineage("XI.A.2.a.1.ii");
    REQUIRE(chain.size() == 6);
    CHECK(chain[0]->index == "XI");
    CHECK(chain[5]->index == "XI.A.2.a.1.ii");
    auto kids = t.children("XI.A.5");
    REQUIRE(kids.size() == 3);
    CHECK(kids[0]->index == "XI.A.5.a");
    CHECK(t.find("XI.A.9") == nullptr);
    CHECK_THROWS_AS(t.at("XI.A.9"), ValidationError);
}

TEST_CASE("direction mapping") {
    CHECK(direction_of("XI.A.2.a.1.i") == FlowDirection::inward);
    CHECK(direction_of("XI.A.2.a.1.iv") == FlowDirection::inward);
    CHECK(direction_of("XI.A.2.a.1.iii") == FlowDirection::outward);
    CHECK(direction_of("XI.A.5.b") == FlowDirection::inward);
    CHECK(direction_of("XI.A.5.a") == FlowDirection::outward);
    CHECK(direction_of("XI.A.4.b.2") == FlowDirection::inward);
    CHECK(direction_of("XI.A.5.c") == FlowDirection::undefined);
    CHECK(direction_of("XI.A.2") == FlowDirection::undefined);
    CHECK_THROWS_AS(direction_of("X.D.2"), ValidationError);
    CHECK(parse_flow_direction("inward") == FlowDirection::inward);
    CHECK_FALSE(parse_flow_direction("sideways").has_value());
}

TEST_CASE("shipped taxonomy csv equals the builtin table") {
    std::ifstream in(std::string(CCM_DATA_DIR) + "/taxonomy.csv");
    REQUIRE(in);
    Taxonomy t = Taxonomy::from_csv(in);
    const auto& b = Taxonomy::builtin();
    REQUIRE(t.size() == b.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        CHECK(t.nodes()[i].index == b.nodes()[i].index);
        CHECK(t.nodes()[i].name == b.nodes()[i].name);
        CHECK(t.nodes()[i].short_code == b.nodes()[i].short_code);
        CHECK(t.nodes()[i].description == b.nodes()[i].description);
        CHECK(t.nodes()[i].direction == b.nodes()[i].direction);
    }
}

TEST_CASE("taxonomy csv errors carry line numbers") {
    SUBCASE("duplicate") {
        std::istringstream in("index,name,short_code,description\nXI,Root,,d\nXI.A,Child,,d\nXI.A.,Again,,d\n");
        try {
            Taxonomy::from_csv(in);
            FAIL("expected LoadError");
        } catch (const LoadError& e) {
            CHECK(e.line() == 4);
        }
    }
    SUBCASE("missing parent") {
        std::istringstream in("index,name,short_code,description\nXI,Root,,d\nXI.A.2,Orphan,,d\n");
        CHECK_THROWS_AS(Taxonomy::from_csv(in), LoadError);
    }
    SUBCASE("bad header") {
        std::istringstream in("id,label\nXI,Root\n");
        CHECK_THROWS_AS(Taxonomy::from_csv(in), LoadError);
    }
    SUBCASE("bracket code moves to short_code") {
        std::istringstream in("index,name,short_code,description\nXI,Root,,d\nXI.A,Controls [ka],,d\n");
        Taxonomy t = Taxonomy::from_csv(in);
        CHECK(t.at("XI.A").name == "Controls");
        CHECK(t.at("XI.A").short_code == "ka");
    }
}
