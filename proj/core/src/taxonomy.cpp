#include "ccm/taxonomy.hpp"

#include "ccm/error.hpp"
#include "ccm/text.hpp"

#include <algorithm>
#include <istream>

namespace ccm {

namespace {

struct RawNode {
    const char* index;
    const char* label;
    const char* description;
    FlowDirection direction;
};

constexpr auto kIn = FlowDirection::inward;
constexpr auto kOut = FlowDirection::outward;
constexpr auto kNone = FlowDirection::undefined;

// AREAER section XI.A capital-transaction categories. Direction follows the
// inflow/outflow split of the resident/nonresident transaction codes:
// purchase locally by nonresidents and sale/issue abroad by residents bring
// capital in; purchase abroad by residents and sale/issue locally by
// nonresidents send it out. Aggregates and liquidation stay undefined.
constexpr RawNode kNodes[] = {
    {"XI", "Capital Transactions",
     "Cross-border capital transactions between residents and nonresidents.", kNone},
    {"XI.A", "Controls on capital transactions [ka]",
     "Restrictions on cross-border capital flows, covering investment, credit, and real estate transactions.", kNone},
    {"XI.A.2", "Controls on capital and money market instruments",
     "Rules regulating international transactions in equity, debt, money markets, and investment funds.", kNone},
    {"XI.A.2.a", "On capital market securities",
     "Measures on shares and bonds issued or acquired by residents or nonresidents.", kNone},
    {"XI.A.2.a.1", "Shares or other securities of a participating nature [eq]",
     "Controls on equity investments involving ownership or participation rights.", kNone},
    {"XI.A.2.a.1.i", "Purchase locally by nonresidents [eq_plbn]",
     "Restrictions on foreigners buying domestic equity locally.", kIn},
    {"XI.A.2.a.1.iv", "Sale or issue abroad by residents [eq_siar]",
     "Controls on residents issuing or selling equity abroad.", kIn},
    {"XI.A.2.a.1.iii", "Purchase abroad by residents [eq_pabr]",
     "Measures on residents buying equity in foreign markets.", kOut},
    {"XI.A.2.a.1.ii", "Sale or issue locally by nonresidents [eq_siln]",
     "Regulations on foreigners issuing equity locally.", kOut},
    {"XI.A.2.a.2", "Bonds or other debt securities [bo]",
     "Controls on transactions in debt instruments like bonds and notes.", kNone},
    {"XI.A.2.a.2.i", "Purchase locally by nonresidents [bo_plbn]",
     "Restrictions on foreigners purchasing domestic bonds.", kIn},
    {"XI.A.2.a.2.iv", "Sale or issue abroad by residents [bo_siar]",
     "Controls on residents issuing debt securities abroad.", kIn},
    {"XI.A.2.a.2.iii", "Purchase abroad by residents [bo_pabr]",
     "Measures on residents buying foreign bonds.", kOut},
    {"XI.A.2.a.2.ii", "Sale or issue locally by nonresidents [bo_siln]",
     "Regulations on foreign entities issuing debt locally.", kOut},
    {"XI.A.2.b", "On money market instruments [mm]",
     "Rules concerning short-term securities such as T-bills and commercial paper.", kNone},
    {"XI.A.2.b.1", "Purchase locally by nonresidents [mm_plbn]",
     "Controls on foreigners buying domestic money market instruments.", kIn},
    {"XI.A.2.b.4", "Sale or issue abroad by residents [mm_siar]",
     "Restrictions on residents issuing money market instruments abroad.", kIn},
    {"XI.A.2.b.3", "Purchase abroad by residents [mm_pabr]",
     "Regulations on residents acquiring money market instruments abroad.", kOut},
    {"XI.A.2.b.2", "Sale or issue locally by nonresidents [mm_siln]",
     "Measures on nonresidents issuing short-term instruments domestically.", kOut},
    {"XI.A.2.c", "On collective investment securities [ci]",
     "Controls on cross-border transactions in mutual funds and similar vehicles.", kNone},
    {"XI.A.2.c.3", "By residents to nonresidents [cio]",
     "Restrictions on domestic collective vehicles selling to nonresidents.", kOut},
    {"XI.A.2.c.1", "By nonresidents to residents [cii]",
     "Controls on foreign investment vehicles marketed to residents.", kIn},
    {"XI.A.3", "Controls on derivatives and other instruments",
     "Measures regulating cross-border transactions in financial derivatives.", kNone},
    {"XI.A.3.a", "Purchase locally by nonresidents",
     "Restrictions on nonresidents buying derivatives locally.", kIn},
    {"XI.A.3.b", "Sale or issue locally by nonresidents",
     "Regulations on foreigners issuing derivatives domestically.", kOut},
    {"XI.A.3.c", "Purchase abroad by residents",
     "Controls on residents acquiring foreign derivatives.", kOut},
    {"XI.A.3.d", "Sale or issue abroad by residents",
     "Restrictions on residents issuing derivatives overseas.", kIn},
    {"XI.A.4", "Controls on credit operations",
     "Rules on lending, guarantees, and financial credit between residents and nonresidents.", kNone},
    {"XI.A.4.b", "Financial credits [fc]",
     "Regulations on cross-border financial loans and credit lines.", kNone},
    {"XI.A.4.b.1", "By residents to nonresidents [fco]",
     "Controls on residents providing financial loans abroad.", kOut},
    {"XI.A.4.b.2", "By nonresidents to residents [fci]",
     "Measures on foreign entities lending to domestic parties.", kIn},
    {"XI.A.4.a", "Commercial credits",
     "Measures on trade-related deferred payment and credit agreements.", kNone},
    {"XI.A.4.a.1", "By residents to nonresidents",
     "Restrictions on trade credits extended by residents abroad.", kOut},
    {"XI.A.4.a.2", "To residents from nonresidents",
     "Controls on commercial credit provided by foreign parties.", kIn},
    {"XI.A.4.c", "Guarantees, sureties, and financial backup facilities",
     "Controls on financial guarantees supporting cross-border financial operations.", kNone},
    {"XI.A.4.c.1", "By residents to nonresidents",
     "Restrictions on guarantees extended by residents to foreigners.", kOut},
    {"XI.A.4.c.2", "To residents from nonresidents",
     "Measures on financial backing offered to residents by nonresidents.", kIn},
    {"XI.A.7", "Controls on real estate transactions",
     "Measures restricting cross-border property ownership or sales.", kNone},
    {"XI.A.7.a", "Purchase abroad by residents",
     "Restrictions on residents buying property overseas.", kOut},
    {"XI.A.7.b", "Purchase locally by nonresidents",
     "Controls on foreigners acquiring domestic real estate.", kIn},
    {"XI.A.7.c", "Sale locally by nonresidents",
     "Regulations on foreign owners selling property domestically.", kOut},
    {"XI.A.5", "Controls on direct investment [di]",
     "Rules managing long-term cross-border investments involving control or influence.", kNone},
    {"XI.A.5.a", "Outward investment [dio]",
     "Controls on domestic entities investing directly abroad.", kOut},
    {"XI.A.5.b", "Inward direct investment [dii]",
     "Measures on foreign direct investment into domestic firms.", kIn},
    {"XI.A.5.c", "Liquidation of direct investment [ldi]",
     "Regulations on the repatriation of capital from divested investments.", kNone},
};

CategoryNode make_node(std::string_view index, std::string_view label, std::string description,
                       FlowDirection direction) {
    IndexPath path = parse_index(index);
    auto [name, code] = split_short_code(label);
    CategoryNode node;
    node.index = path.str();
    node.name = std::move(name);
    node.short_code = std::move(code);
    node.description = std::move(description);
    node.depth = path.depth();
    if (path.depth() > 1) node.parent_index = path.prefix(path.depth() - 1).str();
    node.direction = direction;
    return node;
}

}  // namespace

std::string_view to_string(FlowDirection d) noexcept {
    switch (d) {
        case FlowDirection::inward: return "inward";
        case FlowDirection::outward: return "outward";
        case FlowDirection::both: return "both";
        case FlowDirection::undefined: return "undefined";
    }
    return "undefined";
}

std::optional<FlowDirection> parse_flow_direction(std::string_view s) noexcept {
    if (s == "inward") return FlowDirection::inward;
    if (s == "outward") return FlowDirection::outward;
    if (s == "both") return FlowDirection::both;
    if (s == "undefined") return FlowDirection::undefined;
    return std::nullopt;
}

std::string IndexPath::str() const {
    std::string out;
    for (std::size_t i = 0; i < components_.size(); ++i) {
        if (i) out.push_back('.');
        out += components_[i];
    }
    return out;
}

IndexPath IndexPath::prefix(std::size_t k) const {
    if (k == 0 || k > components_.size())
        throw ValidationError("prefix length " + std::to_string(k) + " out of range for " + str());
    return IndexPath(std::vector<std::string>(components_.begin(), components_.begin() + k));
}

IndexPath parse_index(std::string_view raw) {
    std::string_view s = trim(raw);
    while (!s.empty() && s.back() == '.') s.remove_suffix(1);
    if (s.empty()) throw ParseError("empty category index '" + std::string(raw) + "'");

    std::vector<std::string> parts;
    std::size_t start = 0;
    for (;;) {
        std::size_t dot = s.find('.', start);
        std::string_view tok = s.substr(start, dot == std::string_view::npos ? s.npos : dot - start);
        if (tok.empty())
            throw ParseError("empty level in category index '" + std::string(raw) + "'");
        for (char ch : tok)
            if (!((ch >= '0' && ch <= '9') || (ch >= 'A' && ch <= 'Z') || (ch >= 'a' && ch <= 'z')))
                throw ParseError("invalid character in category index '" + std::string(raw) + "'");
        parts.emplace_back(tok);
        if (dot == std::string_view::npos) break;
        start = dot + 1;
    }
    if (parts.size() > kMaxIndexDepth)
        throw ParseError("category index '" + std::string(raw) + "' has more than 6 levels");
    return IndexPath(std::move(parts));
}

std::string normalize_index(std::string_view raw) { return parse_index(raw).str(); }

std::size_t match_depth(const IndexPath& predicted, const IndexPath& gold) noexcept {
    std::size_t n = std::min(predicted.depth(), gold.depth());
    std::size_t k = 0;
    while (k < n && predicted[k] == gold[k]) ++k;
    return k;
}

bool is_capital_control(const IndexPath& p) noexcept {
    return p.depth() >= 2 && p[0] == "XI" && p[1] == "A";
}

bool is_capital_control(std::string_view raw_index) noexcept {
    try {
        return is_capital_control(parse_index(raw_index));
    } catch (const ParseError&) {
        return false;
    }
}

std::pair<std::string, std::optional<std::string>> split_short_code(std::string_view label) {
    std::string_view s = trim(label);
    if (!s.empty() && s.back() == ']') {
        std::size_t open = s.rfind('[');
        if (open != std::string_view::npos) {
            std::string code(trim(s.substr(open + 1, s.size() - open - 2)));
            std::string name(trim(s.substr(0, open)));
            if (!code.empty()) return {std::move(name), std::move(code)};
        }
    }
    return {std::string(s), std::nullopt};
}

Taxonomy::Taxonomy(std::vector<CategoryNode> nodes) : nodes_(std::move(nodes)) {
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        if (!by_index_.emplace(nodes_[i].index, i).second)
            throw ValidationError("duplicate category index " + nodes_[i].index);
    }
    for (const auto& n : nodes_) {
        if (n.parent_index && !by_index_.count(*n.parent_index))
            throw ValidationError("category " + n.index + " has no parent " + *n.parent_index);
    }
}

const Taxonomy& Taxonomy::builtin() {
    static const Taxonomy table = [] {
        std::vector<CategoryNode> nodes;
        nodes.reserve(std::size(kNodes));
        for (const auto& r : kNodes) nodes.push_back(make_node(r.index, r.label, r.description, r.direction));
        return Taxonomy(std::move(nodes));
    }();
    return table;
}

Taxonomy Taxonomy::from_csv(std::istream& in) {
    CsvReader reader(in);
    std::vector<std::string> row;
    if (!reader.next(row)) throw LoadError(1, "taxonomy file is empty");
    if (row.size() < 4 || trim(row[0]) != "index" || trim(row[1]) != "name" || trim(row[2]) != "short_code" ||
        trim(row[3]) != "description")
        throw LoadError(reader.line(), "expected header index,name,short_code,description[,direction]");
    bool has_direction = row.size() >= 5 && trim(row[4]) == "direction";

    std::vector<CategoryNode> nodes;
    std::unordered_map<std::string, std::size_t> seen;
    while (reader.next(row)) {
        if (row.size() == 1 && trim(row[0]).empty()) continue;
        const std::size_t line = reader.line();
        if (row.size() < 4) throw LoadError(line, "expected at least 4 columns");
        FlowDirection dir = FlowDirection::undefined;
        if (has_direction && row.size() >= 5 && !trim(row[4]).empty()) {
            auto d = parse_flow_direction(trim(row[4]));
            if (!d) throw LoadError(line, "unknown direction '" + row[4] + "'");
            dir = *d;
        }
        CategoryNode node;
        try {
            node = make_node(row[0], row[1], std::string(trim(row[3])), dir);
        } catch (const ParseError& e) {
            throw LoadError(line, e.what());
        }
        if (auto code = trim(row[2]); !code.empty()) node.short_code = std::string(code);
        if (!seen.emplace(node.index, line).second) throw LoadError(line, "duplicate category index " + node.index);
        nodes.push_back(std::move(node));
    }
    for (const auto& n : nodes) {
        if (n.parent_index && !seen.count(*n.parent_index))
            throw LoadError(seen.at(n.index), "category " + n.index + " has no parent " + *n.parent_index);
    }
    return Taxonomy(std::move(nodes));
}

const CategoryNode* Taxonomy::find(std::string_view index) const {
    std::string key;
    try {
        key = normalize_index(index);
    } catch (const ParseError&) {
        return nullptr;
    }
    auto it = by_index_.find(key);
    return it == by_index_.end() ? nullptr : &nodes_[it->second];
}

const CategoryNode& Taxonomy::at(std::string_view index) const {
    if (const auto* n = find(index)) return *n;
    throw ValidationError("unknown category index '" + std::string(index) + "'");
}

std::vector<const CategoryNode*> Taxonomy::lineage(std::string_view index) const {
    std::vector<const CategoryNode*> chain;
    for (const CategoryNode* n = &at(index); n; n = n->parent_index ? find(*n->parent_index) : nullptr)
        chain.push_back(n);
    std::reverse(chain.begin(), chain.end());
    return chain;
}

std::vector<const CategoryNode*> Taxonomy::children(std::string_view index) const {
    std::string key = normalize_index(index);
    std::vector<const CategoryNode*> out;
    for (const auto& n : nodes_)
        if (n.parent_index == key) out.push_back(&n);
    return out;
}

FlowDirection Taxonomy::direction_of(std::string_view index) const { return at(index).direction; }

std::vector<CategoryNode> load_taxonomy() { return Taxonomy::builtin().nodes(); }

FlowDirection direction_of(std::string_view index) { return Taxonomy::builtin().direction_of(index); }

}  // namespace ccm
