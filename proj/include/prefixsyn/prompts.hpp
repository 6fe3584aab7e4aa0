#pragma once

/// @file prompts.hpp
/// @brief Versioned prompt templates. Placeholders in {braces} are filled by
///        the builders in proposer.hpp; everything else is fixed text.

#include <string>
#include <string_view>

namespace prefixsyn::prompts {

inline constexpr std::string_view kTemplateVersion = "v1";

// Shared explanation of the line format and the node-adjacency rule.
inline constexpr std::string_view kFormatRules =
    R"(A prefix circuit is written one node per line in the SPCR format:
<index>: connectedNodes=(<left>,<right>), range=[<lo>:<hi>], left_bound=<lo>, right_bound=<hi>

Rules:
- Bit 0 is the least significant bit. Input nodes have connectedNodes=(None,None) and range [i:i].
- A new prefix node combines two existing nodes (left, right). It is valid only when
  the right node's range starts exactly one bit above the left node's range end:
  right.left_bound = left.right_bound + 1.
- The new node's range is [left.left_bound : right.right_bound].
- The circuit is complete when every range [0:i] for 0 <= i < n is covered by some node.
)";

inline constexpr std::string_view kLevelRules =
    R"(- Every line additionally carries level=<k>. Input nodes have level=1.
- Compute the level of a new node from the levels of the two selected nodes:
  level = max(left.level, right.level) + 1.
- No node may have a level above {delay_bound}.
)";

inline constexpr std::string_view kSynthesisTask =
    R"(This is the current partial prefix circuit of an {n}-bit adder:
{spcr}
It is still missing output nodes for these bit ranges:
{missing_ranges}

Add valid prefix nodes so that every missing range gets covered. For each new node:
first choose two existing node indices (left, right) that satisfy the adjacency rule,
then derive the resulting bit range.

Answer with SPCR lines only, one line per new node, continuing the index sequence.
Do not repeat existing nodes. No explanations.
)";

inline constexpr std::string_view kDsePreamble =
    R"(You are optimizing parallel prefix circuits for an {n}-bit adder.
Previously explored valid circuits, with area (total node count) and delay (maximum level):
{pool_entries}
)";

inline constexpr std::string_view kDseAreaGoal =
    R"(Goal: complete the partial circuit below into a valid circuit with the smallest
possible area (fewest nodes) while keeping every node's level at most {delay_bound}.
Learn from the structure of the better circuits above.
)";

inline constexpr std::string_view kDseDelayGoal =
    R"(Goal: complete the partial circuit below into a valid circuit with the smallest
possible delay while keeping the total node count at most {area_bound}.
Learn from the structure of the better circuits above.
)";

inline std::string replace_slot(std::string text, std::string_view slot, const std::string& value) {
    std::string needle = "{" + std::string(slot) + "}";
    size_t pos;
    while ((pos = text.find(needle)) != std::string::npos)
        text.replace(pos, needle.size(), value);
    return text;
}

} // namespace prefixsyn::prompts
