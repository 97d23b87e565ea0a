#include "seedforge/types.hpp"

#include "seedforge/errors.hpp"

namespace seedforge {

std::string_view to_string(TopicCategory c) noexcept {
    return c == TopicCategory::general ? "general" : "cultural";
}

TopicCategory topic_category_from_string(std::string_view s) {
    if (s == "general") return TopicCategory::general;
    if (s == "cultural") return TopicCategory::cultural;
    throw PreconditionError("unknown topic category: " + std::string(s));
}

std::string_view to_string(TaskKind t) noexcept {
    switch (t) {
        case TaskKind::closed_qa: return "closed_qa";
        case TaskKind::summarization: return "summarization";
        case TaskKind::conversation: return "conversation";
        case TaskKind::multiple_choice: return "multiple_choice";
    }
    return "unknown";
}

TaskKind task_kind_from_string(std::string_view s) {
    for (TaskKind t : kAllTasks) {
        if (to_string(t) == s) return t;
    }
    throw PreconditionError("unknown task kind: " + std::string(s));
}

std::string flags_label(const PropertyFlags& f) {
    std::string out;
    out += f.fluency ? "F+" : "F-";
    out += f.culture ? " C+" : " C-";
    out += f.diversity ? " D+" : " D-";
    return out;
}

}  // namespace seedforge
