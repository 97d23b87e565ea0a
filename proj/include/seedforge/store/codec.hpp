#pragma once

// JSON forms of the pipeline's value types. Objects serialize with sorted
// keys (nlohmann::json default), so output is byte-stable.

#include <json.hpp>

#include "seedforge/diversity/dedup.hpp"
#include "seedforge/types.hpp"

namespace seedforge {

void to_json(nlohmann::json& j, const Provenance& p);
void from_json(const nlohmann::json& j, Provenance& p);
void to_json(nlohmann::json& j, const Topic& t);
void from_json(const nlohmann::json& j, Topic& t);
void to_json(nlohmann::json& j, const ContextSource& s);
void from_json(const nlohmann::json& j, ContextSource& s);
void to_json(nlohmann::json& j, const ContextDoc& c);
void from_json(const nlohmann::json& j, ContextDoc& c);
void to_json(nlohmann::json& j, const PropertyFlags& f);
void from_json(const nlohmann::json& j, PropertyFlags& f);
void to_json(nlohmann::json& j, const InstructionRecord& r);
// Throws std::invalid_argument naming the offending field.
void from_json(const nlohmann::json& j, InstructionRecord& r);
void to_json(nlohmann::json& j, const GenerationFailure& f);
void from_json(const nlohmann::json& j, GenerationFailure& f);
void to_json(nlohmann::json& j, const Removal& r);
void from_json(const nlohmann::json& j, Removal& r);

}  // namespace seedforge
