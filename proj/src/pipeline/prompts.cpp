#include "seedforge/pipeline/prompts.hpp"

#include <algorithm>

namespace seedforge::prompts {

namespace {

constexpr std::string_view kTopicTail =
    " a short phrase or sentence. Ensure your output is in the format of a list of strings, "
    "where each string is a topic. Your output should be one line in the aforementioned format "
    "without anything else.";

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
    std::size_t pos = 0;
    while ((pos = s.find(from, pos)) != std::string::npos) {
        s.replace(pos, from.size(), to);
        pos += to.size();
    }
    return s;
}

}  // namespace

bool is_context_style(std::string_view style) {
    return std::find(kContextStyles.begin(), kContextStyles.end(), style) != kContextStyles.end();
}

bool is_summary_style(std::string_view style) {
    return std::find(kSummaryStyles.begin(), kSummaryStyles.end(), style) != kSummaryStyles.end();
}

std::string topic_prompt(TopicCategory category, std::string_view culture) {
    std::string head;
    if (category == TopicCategory::general) {
        head = "Please generate 20 completely random topics. These can be about absolutely anything "
               "from everyday conversation, advice, random thoughts, mathematics, science, history, "
               "philosophy, etc. Each topic should be";
    } else {
        const std::string c(culture);
        head = "You are a native " + c + " person with expert knowledge of " + c +
               " culture, history, language, and customs. Ensure that everything you act, do, say, "
               "and generate matches with this fact. Please generate 20 completely random topics "
               "relating to your culture. These can be about anything related to your culture such "
               "traditions, history, food, language, etc. Each topic should be";
    }
    return head + std::string(kTopicTail);
}

std::string context_prompt(std::string_view tmpl, std::string_view style, std::string_view topic) {
    return replace_all(replace_all(std::string(tmpl), "[style]", style), "[topic]", topic);
}

std::string closed_qa_prompt(std::string_view context) {
    return "Generate 5 questions focusing on different aspects / parts of this given context. Use "
           "only the given context to create your questions. Do not use external information. "
           "<context>" + std::string(context) +
           "</context> Ensure your output is in the format of a list of dictionaries, where each "
           "dictionary contains a `question' key and an `answer' key. Your output should be one "
           "line in the aforementioned format without anything else.";
}

std::string summarization_prompt(std::string_view style, std::string_view topic,
                                 std::string_view context) {
    const std::string s(style);
    return "Generate a concise summary in " + s + " format of the following context related to " +
           std::string(topic) + ": <context> " + std::string(context) +
           " </context> Ensure your output is in the format of a dictionary with a `summary' and "
           "`instruction' key, where `summary' is your summary in the specified format and "
           "'instruction' is a sentence you would instruct someone to get this summary (for "
           "example: `Please summarize in " + s +
           " format the following text passage'). Your output should be one line in the "
           "aforementioned format, and in the correct language without anything else.";
}

std::string conversation_prompt(std::string_view topic) {
    const std::string t(topic);
    return "Generate a conversation between a user and an AI assistant on the topic of " + t +
           ". The user's message should be a question or a statement related to " + t +
           ", and the AI assistant should provide a relevant, engaging response to maintain a "
           "friendly and casual conversation. The output should be in the following format: "
           "<format>Input: User's message Output: AI assistant's response</format> Ensure your "
           "output contains ONLY ONE input-output pair exactly in the specified format without "
           "any additional text.";
}

std::string multiple_choice_prompt(std::string_view context) {
    return "Generate a multiple-choice question focusing on the given context. The question should "
           "only have one correct choice. Use only the given context to create your question and "
           "answer choices. Do not use external information. <context>" + std::string(context) +
           "</context> DO NOT USE any ordinal information (DO NOT USE eg: first answer is "
           "correct, all of the above is correct, etc) of the choices to answer your question as "
           "the choices will be shuffled later. Ensure your output is in the following "
           "format:<format> Question: Your question Choices: - [Choice 1] - [Choice 2] - "
           "[Choice 3] - [Choice 4] Answer: [Explaination + Reasoning + Correct Answer (in this "
           "order exactly)] </format> Your output should contain ONLY ONE multiple-choice "
           "question exactly in the specified format without any additional text.";
}

double task_temperature(TaskKind task) {
    switch (task) {
        case TaskKind::closed_qa: return kClosedQaTemperature;
        case TaskKind::summarization: return kSummarizationTemperature;
        case TaskKind::conversation: return kConversationTemperature;
        case TaskKind::multiple_choice: return kMultipleChoiceTemperature;
    }
    return kConversationTemperature;
}

}  // namespace seedforge::prompts
