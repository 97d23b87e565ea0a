#pragma once

// Prompt templates and generation constants. The topic and task prompts are
// reproduced word for word (including the original spelling) because model
// behaviour depends on them; only the bracketed slots are substituted.

#include <array>
#include <string>
#include <string_view>

#include "seedforge/types.hpp"

namespace seedforge::prompts {

inline constexpr double kTopicTemperature = 0.95;
inline constexpr double kClosedQaTemperature = 0.35;
inline constexpr double kSummarizationTemperature = 0.35;
inline constexpr double kConversationTemperature = 0.8;
inline constexpr double kMultipleChoiceTemperature = 0.4;
inline constexpr int kTopicsPerBatch = 20;
inline constexpr int kClosedQaPairs = 5;
inline constexpr int kWikiSearchLimit = 10;

// Not given in the source prompts; config defaults only.
inline constexpr double kContextTemperature = 0.8;
inline constexpr double kDefaultPWiki = 0.5;
inline constexpr std::string_view kDefaultContextTemplate =
    "Generate a [style] related to the topic [topic]. Write in Thai.";

inline constexpr std::array<std::string_view, 13> kContextStyles = {
    "news article", "blog post",       "text messages",
    "fictional short story", "video transcript", "song",
    "poem",         "scientific study", "medical report",
    "social media post with replies", "email", "tweet",
    "how-to article"};

inline constexpr std::array<std::string_view, 3> kSummaryStyles = {"bullet points", "paragraphs",
                                                                   "numbered lists"};

bool is_context_style(std::string_view style);
bool is_summary_style(std::string_view style);

// `culture` fills the persona of the cultural prompt ("Thai" by default).
std::string topic_prompt(TopicCategory category, std::string_view culture = "Thai");

// Replaces every "[style]" and "[topic]" slot.
std::string context_prompt(std::string_view tmpl, std::string_view style, std::string_view topic);

std::string closed_qa_prompt(std::string_view context);
std::string summarization_prompt(std::string_view style, std::string_view topic,
                                 std::string_view context);
std::string conversation_prompt(std::string_view topic);
std::string multiple_choice_prompt(std::string_view context);

double task_temperature(TaskKind task);

}  // namespace seedforge::prompts
