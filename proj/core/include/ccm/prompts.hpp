#pragma once

#include "ccm/corpus.hpp"
#include "ccm/taxonomy.hpp"

#include <span>
#include <string>

namespace ccm {

/// Sample final-report rows shown to the model as the report layout.
const std::vector<ReportEntry>& default_exemplars();

/// System prompt for event extraction: analyst role, report-layout
/// exemplars, field vocabularies, the category list and the output key
/// schema. Byte-stable for identical inputs.
std::string build_system_prompt(const Taxonomy& taxonomy, std::span<const ReportEntry> exemplars);

/// User prompt for one entry. The description is always the last block,
/// introduced by a line reading "Description:".
std::string build_user_prompt(std::string_view country, std::string_view index, std::string_view category,
                              std::string_view description);

/// Appended to the conversation when a reply fails validation.
std::string build_correction_prompt(std::string_view violations);

/// Stable hex fingerprint of a prompt.
std::string prompt_fingerprint(std::string_view prompt);

}  // namespace ccm
