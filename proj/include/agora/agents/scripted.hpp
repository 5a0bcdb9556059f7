#pragma once

#include <functional>
#include <string>
#include <vector>

#include "agora/acp/loop.hpp"

namespace agora::agents {

/// One rule of a script: when `trigger` holds for the summary, emit `respond`.
struct ScriptStep {
    std::string name;
    std::function<bool(const acp::StateSummary&, const acp::AgentContext&)> trigger;
    std::function<json(const acp::StateSummary&, const acp::AgentContext&)> respond;
};

/// Ordered rules ending in a wait that always matches.
class AgentScript {
public:
    AgentScript& add(ScriptStep step);
    /// The first matching step's response (a JSON response object).
    json respond(const acp::StateSummary& summary, const acp::AgentContext& ctx) const;
    const std::vector<ScriptStep>& steps() const { return steps_; }

private:
    std::vector<ScriptStep> steps_;
};

/// Deterministic: the same summary always yields the same text.
std::string scripted_agent_step(const acp::StateSummary& summary, const acp::AgentContext& ctx, const AgentScript& script);

class ScriptedStepper : public acp::AgentStepper {
public:
    explicit ScriptedStepper(AgentScript script) : script_(std::move(script)) {}
    std::string step(const acp::AgentContext& ctx, const acp::StateSummary& summary,
                     const std::vector<acp::ValidationError>& feedback, Duration budget) override;

private:
    AgentScript script_;
};

struct ShapeFactoryScriptOptions {
    /// Chat messages sent, one per cycle from the first cycle on, when chat is permitted.
    int messages = 2;
    /// Highest unit price paid for a shape an order needs, in dollars.
    double max_buy_price = 30;
    /// Unit price asked when selling the specialty shape, in dollars.
    double sell_price = 25;
};

/// A plain Shape Factory trader: settles received offers, fulfills what it
/// can, produces its specialty, sells surplus and buys what orders need.
/// Every decision is a function of the summary alone.
AgentScript shape_factory_script(const ShapeFactoryScriptOptions& options = {});

}  // namespace agora::agents
