#include "gbeam/error.hpp"

namespace gbeam {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::OutOfDomain: return "OutOfDomain";
        case ErrorCode::NonPositiveSpeed: return "NonPositiveSpeed";
        case ErrorCode::NonPositiveCurvature: return "NonPositiveCurvature";
        case ErrorCode::NotConstantCurvature: return "NotConstantCurvature";
        case ErrorCode::InvalidProfile: return "InvalidProfile";
        case ErrorCode::InvalidStep: return "InvalidStep";
        case ErrorCode::ZeroGradient: return "ZeroGradient";
        case ErrorCode::Unreachable: return "Unreachable";
        case ErrorCode::InvalidBranch: return "InvalidBranch";
        case ErrorCode::GridMismatch: return "GridMismatch";
        case ErrorCode::TurningPointInsideLeg: return "TurningPointInsideLeg";
        case ErrorCode::HorizontalRay: return "HorizontalRay";
        case ErrorCode::TurningPoint: return "TurningPoint";
        case ErrorCode::DegenerateFan: return "DegenerateFan";
        case ErrorCode::DomainExit: return "DomainExit";
        case ErrorCode::AtCaustic: return "AtCaustic";
        case ErrorCode::AtSource: return "AtSource";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::Config: return "Config";
        case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace gbeam
