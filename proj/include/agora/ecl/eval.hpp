#pragma once

#include <optional>

#include "agora/common/value.hpp"
#include "agora/ecl/config.hpp"

namespace agora::ecl {

/// Supplies values for `owner.attribute` references during evaluation.
class Scope {
public:
    virtual ~Scope() = default;
    virtual std::optional<Value> lookup(const AttributeRef& ref) const = 0;
};

/// Evaluates a resolved expression. Evaluation is total over well-typed
/// expressions; an unbound reference throws Error(UnknownReference).
Value evaluate(const Expr& expr, const Scope& scope);

bool evaluate_predicate(const Expr& expr, const Scope& scope);

}  // namespace agora::ecl
