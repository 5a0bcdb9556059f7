#include "agora/agents/prompt.hpp"

#include <fstream>
#include <regex>
#include <sstream>

namespace agora::agents {

namespace {

const std::regex& placeholder_re() {
    static const std::regex re(R"(\{([a-z_][a-z0-9_]*)\})");
    return re;
}

bool is_section_header(const std::string& line, std::string& name) {
    static const std::regex re(R"(^<([A-Z][A-Z ]*)>\s*$)");
    std::smatch m;
    if (!std::regex_match(line, m, re)) return false;
    name = m[1];
    return true;
}

std::string number_text(const json& v) {
    if (v.is_number_integer()) return std::to_string(v.get<std::int64_t>());
    if (v.is_number()) {
        double d = v.get<double>();
        if (d == static_cast<double>(static_cast<std::int64_t>(d))) return std::to_string(static_cast<std::int64_t>(d));
        std::ostringstream o;
        o.precision(2);
        o << std::fixed << d;
        return o.str();
    }
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

std::string communication_level(const controls::InteractionControls& c) {
    switch (c.information_flow.chat_mode) {
        case controls::ChatMode::Private: return "private chat (one recipient per message)";
        case controls::ChatMode::Group: return "group chat (messages reach your whole group)";
        case controls::ChatMode::Disabled: return "no chat (messaging is disabled; trade through offers only)";
    }
    return "";
}

std::string style_instructions(const controls::InteractionControls& c) {
    std::string out;
    out += c.agent_responsiveness.adaptive_feedback
               ? "- Adjust your strategy to how the other participants have responded to you so far.\n"
               : "- Keep one consistent strategy and tone for the whole session.\n";
    switch (c.agent_responsiveness.explanations) {
        case controls::Explanations::Proactive:
            out += "- When you send a trade offer, also tell its counterpart briefly why you chose that price.";
            break;
        case controls::Explanations::OnDemand:
            out += "- Explain your reasons to another participant only when they ask.";
            break;
        case controls::Explanations::None: out += "- Do not explain your reasons to other participants."; break;
    }
    return out;
}

std::string feedback_text(const std::vector<acp::ValidationError>& feedback) {
    if (feedback.empty()) return "";
    std::string out = "Your previous response was rejected:\n";
    for (auto& e : feedback) out += "- " + e.str() + "\n";
    return out + "Fix these problems and respond again.";
}

}  // namespace

PromptTemplate PromptTemplate::parse(const std::string& text) {
    PromptTemplate t;
    t.sections.push_back({"intro", ""});
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        std::string name;
        if (is_section_header(line, name)) {
            t.sections.push_back({name, ""});
            continue;
        }
        t.sections.back().text += line + "\n";
        for (std::sregex_iterator it(line.begin(), line.end(), placeholder_re()), end; it != end; ++it)
            t.placeholders.insert((*it)[1]);
    }
    return t;
}

PromptTemplate PromptTemplate::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidConfig, "cannot read prompt template " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return parse(ss.str());
}

std::string PromptTemplate::text() const {
    std::string out;
    for (auto& s : sections) {
        if (s.name != "intro") out += "<" + s.name + ">\n";
        out += s.text;
    }
    return out;
}

std::map<std::string, std::string> persona_fields(const std::string& persona_profile) {
    std::map<std::string, std::string> out;
    auto j = json::parse(persona_profile, nullptr, false);
    if (j.is_object()) {
        for (auto& [k, v] : j.items())
            if (v.is_string()) out[k] = v.get<std::string>();
    } else if (!persona_profile.empty()) {
        out["personality_description"] = persona_profile;
    }
    return out;
}

std::map<std::string, std::string> prompt_values(const acp::AgentContext& ctx, const controls::InteractionControls& c,
                                                 const acp::StateSummary& summary,
                                                 const std::vector<acp::ValidationError>& feedback) {
    std::map<std::string, std::string> v;
    for (auto& [k, val] : ctx.parameters.items()) v[k] = number_text(val);
    for (auto& [k, val] : persona_fields(ctx.persona_profile)) v[k] = val;
    v["participant_code"] = ctx.display_name;
    const auto& own = summary.visible_state.is_object() ? summary.visible_state.value("own", json::object()) : json::object();
    if (own.contains("specialty_shape")) v["specialty_shape"] = number_text(own["specialty_shape"]);
    v["communication_level"] = communication_level(c);
    std::string list;
    for (auto& p : ctx.peers) list += (list.empty() ? "" : ", ") + p.display_name;
    v["participants_list"] = list;
    v["style_instructions"] = style_instructions(c);
    v["status_update"] = acp::to_json(summary).dump(1);
    v["validation_feedback"] = feedback_text(feedback);
    return v;
}

std::string render_prompt(const PromptTemplate& t, const std::map<std::string, std::string>& values) {
    for (auto& name : t.placeholders)
        if (!values.count(name)) throw Error(ErrorCode::MissingPlaceholder, name);
    const std::string text = t.text();
    std::string out;
    std::size_t last = 0;
    for (std::sregex_iterator it(text.begin(), text.end(), placeholder_re()), end; it != end; ++it) {
        out.append(text, last, static_cast<std::size_t>(it->position()) - last);
        out += values.at((*it)[1]);
        last = static_cast<std::size_t>(it->position() + it->length());
    }
    out.append(text, last, std::string::npos);
    return out;
}

}  // namespace agora::agents
