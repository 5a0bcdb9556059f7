#include "agora/common/error.hpp"

namespace agora {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::SyntaxError: return "SyntaxError";
        case ErrorCode::UnknownReference: return "UnknownReference";
        case ErrorCode::TypeMismatch: return "TypeMismatch";
        case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
        case ErrorCode::UnknownRole: return "UnknownRole";
        case ErrorCode::RosterMismatch: return "RosterMismatch";
        case ErrorCode::InvalidControls: return "InvalidControls";
        case ErrorCode::InvalidConfig: return "InvalidConfig";
        case ErrorCode::DuplicateRoster: return "DuplicateRoster";
        case ErrorCode::PolicyDenied: return "PolicyDenied";
        case ErrorCode::UnknownActor: return "UnknownActor";
        case ErrorCode::UnknownAction: return "UnknownAction";
        case ErrorCode::SessionEnded: return "SessionEnded";
        case ErrorCode::WrongPhase: return "WrongPhase";
        case ErrorCode::ClockRegression: return "ClockRegression";
        case ErrorCode::PriceOutOfRange: return "PriceOutOfRange";
        case ErrorCode::ConcurrencyDenied: return "ConcurrencyDenied";
        case ErrorCode::RateLimited: return "RateLimited";
        case ErrorCode::CounterofferDisallowed: return "CounterofferDisallowed";
        case ErrorCode::SelfTrade: return "SelfTrade";
        case ErrorCode::UnknownParticipant: return "UnknownParticipant";
        case ErrorCode::UnknownShape: return "UnknownShape";
        case ErrorCode::BadQuantity: return "BadQuantity";
        case ErrorCode::ShapeNotHeld: return "ShapeNotHeld";
        case ErrorCode::UnknownTransaction: return "UnknownTransaction";
        case ErrorCode::NotAddressee: return "NotAddressee";
        case ErrorCode::NotOwner: return "NotOwner";
        case ErrorCode::AlreadyResolved: return "AlreadyResolved";
        case ErrorCode::InsufficientFunds: return "InsufficientFunds";
        case ErrorCode::AlreadyFulfilled: return "AlreadyFulfilled";
        case ErrorCode::MissingShape: return "MissingShape";
        case ErrorCode::BadIndex: return "BadIndex";
        case ErrorCode::ChatDisabled: return "ChatDisabled";
        case ErrorCode::TooLong: return "TooLong";
        case ErrorCode::NotYourTurn: return "NotYourTurn";
        case ErrorCode::UnknownRecipient: return "UnknownRecipient";
        case ErrorCode::PrivateOnly: return "PrivateOnly";
        case ErrorCode::NotAnAgent: return "NotAnAgent";
        case ErrorCode::MalformedResponse: return "MalformedResponse";
        case ErrorCode::SchemaViolation: return "SchemaViolation";
        case ErrorCode::UnknownTransactionReference: return "UnknownTransactionReference";
        case ErrorCode::ForbiddenActionType: return "ForbiddenActionType";
        case ErrorCode::AgentTimeout: return "AgentTimeout";
        case ErrorCode::RetriesExhausted: return "RetriesExhausted";
        case ErrorCode::MissingPlaceholder: return "MissingPlaceholder";
        case ErrorCode::EndpointUnavailable: return "EndpointUnavailable";
        case ErrorCode::AuthFailure: return "AuthFailure";
        case ErrorCode::UnknownSession: return "UnknownSession";
        case ErrorCode::SeatTaken: return "SeatTaken";
        case ErrorCode::SeatsNotJoined: return "SeatsNotJoined";
        case ErrorCode::StorageFailure: return "StorageFailure";
        case ErrorCode::CorruptLog: return "CorruptLog";
        case ErrorCode::Unauthorized: return "Unauthorized";
        case ErrorCode::TooFewSamples: return "TooFewSamples";
        case ErrorCode::ZeroVariance: return "ZeroVariance";
        case ErrorCode::RankDeficient: return "RankDeficient";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::ConstantSeries: return "ConstantSeries";
    }
    return "Unknown";
}

}  // namespace agora
