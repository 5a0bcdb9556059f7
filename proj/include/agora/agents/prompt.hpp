#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "agora/acp/acp.hpp"

namespace agora::agents {

/// A prompt text asset. Lines of the form "<NAME>" open a named section; the
/// text before the first one is the "intro" section. Placeholders are
/// {identifier}; braces around anything else (JSON examples) are literal.
struct PromptTemplate {
    struct Section {
        std::string name;
        std::string text;
    };
    std::vector<Section> sections;
    std::set<std::string> placeholders;

    static PromptTemplate parse(const std::string& text);
    static PromptTemplate load(const std::string& path);
    std::string text() const;
};

/// Persona fields an agent seat carries in its roster persona_profile: a JSON
/// object with personality_name, mbti_type and personality_description, or
/// free text taken as the description alone.
std::map<std::string, std::string> persona_fields(const std::string& persona_profile);

/// Every placeholder value available for this context and summary. Includes
/// the paradigm parameters (money without the dollar sign, durations in
/// seconds), the persona fields, participant_code, specialty_shape,
/// communication_level, participants_list, style_instructions, status_update
/// and validation_feedback.
std::map<std::string, std::string> prompt_values(const acp::AgentContext& ctx, const controls::InteractionControls& c,
                                                 const acp::StateSummary& summary,
                                                 const std::vector<acp::ValidationError>& feedback);

/// Substitutes every placeholder. Throws Error(MissingPlaceholder) naming the
/// first placeholder with no value; nothing is rendered partially.
std::string render_prompt(const PromptTemplate& t, const std::map<std::string, std::string>& values);

}  // namespace agora::agents
