#pragma once

#include <string_view>

namespace qeleak::prompts {

inline constexpr std::string_view kClaimSlot = "{CLAIM}";

inline constexpr std::string_view kHydeFever =
    "Please write a wikipedia passage to verify the claim.\nClaim: {CLAIM}\nPassage:";
inline constexpr std::string_view kHydeScifact =
    "Please write a scientific paper passage to support/refute the claim.\nClaim: {CLAIM}\nPassage:";
inline constexpr std::string_view kHydeAveritec =
    "Please write a fact-checking article to verify the claim.\nClaim: {CLAIM}\nPassage:";
inline constexpr std::string_view kQuery2doc = "Write a passage that answers the following query: {CLAIM}";

inline constexpr std::string_view kVerdictHead =
    "Your task is to predict the verdict of a claim based on the provided evidence. "
    "Select one of the following labels: ";
inline constexpr std::string_view kVerdictInstruction =
    ".\nGenerate only the label without additional explanation or content.\n\nClaim: ";
inline constexpr std::string_view kVerdictTail = "\n\nLabel:";

inline constexpr std::string_view kNliHead =
    "Given the premise sentence S1, determine if the hypothesis sentence S2 is entailed or contradicted or "
    "neutral, by three labels: entailment, contradiction, neutral.\nRespond only with one of the labels.\nS1: ";
inline constexpr std::string_view kNliMiddle = "\nS2: ";
inline constexpr std::string_view kNliTail = "\nLabel:";

}  // namespace qeleak::prompts
