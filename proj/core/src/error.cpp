#include "robsvd/error.hpp"

namespace robsvd {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::RaggedRows: return "RaggedRows";
    case ErrorCode::ZeroVarianceColumn: return "ZeroVarianceColumn";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::NoConvergence: return "NoConvergence";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::TargetUnreachable: return "TargetUnreachable";
    case ErrorCode::PoleAtDenominatorZero: return "PoleAtDenominatorZero";
    case ErrorCode::Degenerate: return "Degenerate";
    case ErrorCode::SingularFit: return "SingularFit";
    case ErrorCode::SingularNormalMatrix: return "SingularNormalMatrix";
    case ErrorCode::SingularColumnSystem: return "SingularColumnSystem";
    case ErrorCode::SingularRowSystem: return "SingularRowSystem";
    case ErrorCode::DegenerateDoF: return "DegenerateDoF";
    case ErrorCode::DoFExhausted: return "DoFExhausted";
    case ErrorCode::NeverBreaks: return "NeverBreaks";
    case ErrorCode::MaxIterExceeded: return "MaxIterExceeded";
    case ErrorCode::RateUnstable: return "RateUnstable";
    case ErrorCode::ContinuationStall: return "ContinuationStall";
  }
  return "Unknown";
}

}  // namespace robsvd
