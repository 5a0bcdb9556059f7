#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace agora {

enum class ErrorCode {
    // ECL
    SyntaxError,
    UnknownReference,
    TypeMismatch,
    UnsupportedVersion,
    UnknownRole,
    // session setup
    RosterMismatch,
    InvalidControls,
    InvalidConfig,
    DuplicateRoster,
    // engine
    PolicyDenied,
    UnknownActor,
    UnknownAction,
    SessionEnded,
    WrongPhase,
    ClockRegression,
    PriceOutOfRange,
    ConcurrencyDenied,
    RateLimited,
    CounterofferDisallowed,
    SelfTrade,
    UnknownParticipant,
    UnknownShape,
    BadQuantity,
    ShapeNotHeld,
    UnknownTransaction,
    NotAddressee,
    NotOwner,
    AlreadyResolved,
    InsufficientFunds,
    AlreadyFulfilled,
    MissingShape,
    BadIndex,
    // messaging
    ChatDisabled,
    TooLong,
    NotYourTurn,
    UnknownRecipient,
    PrivateOnly,
    // ACP
    NotAnAgent,
    MalformedResponse,
    SchemaViolation,
    UnknownTransactionReference,
    ForbiddenActionType,
    AgentTimeout,
    RetriesExhausted,
    // adapters
    MissingPlaceholder,
    EndpointUnavailable,
    AuthFailure,
    // service
    UnknownSession,
    SeatTaken,
    SeatsNotJoined,
    StorageFailure,
    CorruptLog,
    Unauthorized,
    // statistics
    TooFewSamples,
    ZeroVariance,
    RankDeficient,
    DimensionMismatch,
    ConstantSeries,
};

std::string_view to_string(ErrorCode code);

/// A rejected action. Denials are pre-commit: no state change, no event.
struct Denial {
    ErrorCode code = ErrorCode::PolicyDenied;
    std::string policy;  // policy name when a configured policy denied the action
    std::string message;
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code), detail_(message) {}

    ErrorCode code() const noexcept { return code_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    ErrorCode code_;
    std::string detail_;
};

}  // namespace agora
