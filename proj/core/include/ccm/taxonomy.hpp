#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ccm {

/// Label used for anything outside the capital-control hierarchy.
inline constexpr std::string_view kOutOfTaxonomy = "NON-CAPITAL-CONTROL";

inline constexpr std::size_t kMaxIndexDepth = 6;

enum class FlowDirection { inward, outward, both, undefined };

std::string_view to_string(FlowDirection d) noexcept;
std::optional<FlowDirection> parse_flow_direction(std::string_view s) noexcept;

/// Dotted category index split into its level tokens ("XI.A.2.a.1.ii").
/// Always holds 1..6 non-empty tokens.
class IndexPath {
public:
    IndexPath() = default;

    std::size_t depth() const noexcept { return components_.size(); }
    const std::vector<std::string>& components() const noexcept { return components_; }
    const std::string& operator[](std::size_t i) const { return components_[i]; }

    /// Canonical form: components joined with '.', no trailing dot.
    std::string str() const;

    /// First `k` levels; requires 1 <= k <= depth().
    IndexPath prefix(std::size_t k) const;

    friend bool operator==(const IndexPath&, const IndexPath&) = default;

private:
    friend IndexPath parse_index(std::string_view raw);
    explicit IndexPath(std::vector<std::string> c) : components_(std::move(c)) {}

    std::vector<std::string> components_;
};

/// Strips trailing dots and splits on '.'. Case is preserved.
/// Throws ParseError on empty input, empty or non-alphanumeric tokens, or
/// more than six levels.
IndexPath parse_index(std::string_view raw);

/// parse_index(raw).str(), the form used for every comparison.
std::string normalize_index(std::string_view raw);

/// Number of leading levels on which both paths agree.
std::size_t match_depth(const IndexPath& predicted, const IndexPath& gold) noexcept;

/// True iff the index sits under "XI.A" (depth-2 prefix).
bool is_capital_control(const IndexPath& p) noexcept;
bool is_capital_control(std::string_view raw_index) noexcept;

struct CategoryNode {
    std::string index;                     // canonical, no trailing dot
    std::string name;                      // bracket code stripped
    std::optional<std::string> short_code; // e.g. "eq_siln"
    std::string description;
    std::size_t depth = 0;
    std::optional<std::string> parent_index;
    FlowDirection direction = FlowDirection::undefined;
};

/// Splits "Purchase locally by nonresidents [eq_plbn]" into name and code.
std::pair<std::string, std::optional<std::string>> split_short_code(std::string_view label);

/// Immutable category table with index lookup.
class Taxonomy {
public:
    /// The embedded 45-node table.
    static const Taxonomy& builtin();

    /// Loads an override table: UTF-8 CSV with header
    /// index,name,short_code,description[,direction]. Names may still carry a
    /// bracket code; it is moved into short_code. Throws LoadError on
    /// duplicate or unparseable indexes and on nodes whose parent is missing.
    static Taxonomy from_csv(std::istream& in);

    explicit Taxonomy(std::vector<CategoryNode> nodes);

    const std::vector<CategoryNode>& nodes() const noexcept { return nodes_; }
    std::size_t size() const noexcept { return nodes_.size(); }

    /// Lookup by any spelling of the index (trailing dots allowed).
    const CategoryNode* find(std::string_view index) const;
    const CategoryNode& at(std::string_view index) const;  // throws ValidationError

    /// Ancestor chain from depth 1 down to and including `index`.
    std::vector<const CategoryNode*> lineage(std::string_view index) const;

    /// Children in table order.
    std::vector<const CategoryNode*> children(std::string_view index) const;

    /// Throws ValidationError for indexes not in the table.
    FlowDirection direction_of(std::string_view index) const;

private:
    std::vector<CategoryNode> nodes_;
    std::unordered_map<std::string, std::size_t> by_index_;
};

/// Nodes of the built-in table.
std::vector<CategoryNode> load_taxonomy();

/// Direction of a built-in category.
FlowDirection direction_of(std::string_view index);

}  // namespace ccm
