#pragma once

#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "hvacrl/mask_source.hpp"

namespace hvacrl {

/// Deterministic text: instructions, building notes, the five states (oldest
/// first, current state labelled "t") and the required reply format.
std::string serialize_prompt(std::span<const BuildingState> window);

/// Strict parse of the "recommendations" field; "analysis" is ignored.
/// Throws RecommendationError with the matching kind.
FeasibleSets parse_recommendations(const std::string& json_text);

/// Per-zone fallback parse for control time: any zone that cannot be used gets
/// the full level set and a message in `warnings`.
FeasibleSets parse_recommendations_or_full(const std::string& json_text, std::vector<std::string>* warnings);

nlohmann::json recommendations_json(const FeasibleSets& sets);
/// {"analysis": ..., "recommendations": {...}} as compact text.
std::string render_reply(const std::string& analysis, const FeasibleSets& sets);

/// Three sentences: temperature trend over the window, occupants present,
/// number of pruned zone levels.
std::string analysis_text(std::span<const BuildingState> window, const FeasibleSets& sets);

/// Recovers the current state from a prompt produced by serialize_prompt.
/// Values are read back at the printed precision.
BuildingState current_state_from_prompt(const std::string& prompt);

/// Completion function answering prompts with the kNN oracle, standing in for
/// a fine-tuned language model behind the same text interface.
CompletionFn knn_completion(std::shared_ptr<const KnnMaskSource> oracle);

}  // namespace hvacrl
