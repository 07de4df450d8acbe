#include "specsmith/errors.hpp"

namespace specsmith {

const char* err_name(Err code) {
    switch (code) {
    case Err::EmptyDocument: return "EmptyDocument";
    case Err::InvalidId: return "InvalidId";
    case Err::BudgetTooSmall: return "BudgetTooSmall";
    case Err::EncodingError: return "EncodingError";
    case Err::ParseError: return "ParseError";
    case Err::DuplicateId: return "DuplicateId";
    case Err::UnknownLevel: return "UnknownLevel";
    case Err::UnknownProductType: return "UnknownProductType";
    case Err::EmptyManifest: return "EmptyManifest";
    case Err::ProviderError: return "ProviderError";
    case Err::CassetteMiss: return "CassetteMiss";
    case Err::ContextOverflow: return "ContextOverflow";
    case Err::CassetteWriteError: return "CassetteWriteError";
    case Err::InvalidConversation: return "InvalidConversation";
    case Err::UnsupportedLevel: return "UnsupportedLevel";
    case Err::EmptyBrief: return "EmptyBrief";
    case Err::EmptyRtl: return "EmptyRtl";
    case Err::EmptySection: return "EmptySection";
    case Err::EmptyInput: return "EmptyInput";
    case Err::TemplateError: return "TemplateError";
    case Err::NoModuleFound: return "NoModuleFound";
    case Err::UnbalancedDelimiters: return "UnbalancedDelimiters";
    case Err::NoPortTable: return "NoPortTable";
    case Err::MalformedTable: return "MalformedTable";
    case Err::StrategyRequiresSplit: return "StrategyRequiresSplit";
    case Err::LevelOrderViolation: return "LevelOrderViolation";
    case Err::ParseFailed: return "ParseFailed";
    case Err::UnknownFindingId: return "UnknownFindingId";
    case Err::CategoryNotApplicable: return "CategoryNotApplicable";
    case Err::CoverageGap: return "CoverageGap";
    case Err::IoError: return "IoError";
    case Err::ConfigError: return "ConfigError";
    case Err::UsageError: return "UsageError";
    }
    return "UnknownError";
}

bool is_io_or_config(Err code) {
    switch (code) {
    case Err::IoError:
    case Err::ConfigError:
    case Err::CassetteWriteError:
        return true;
    default:
        return false;
    }
}

} // namespace specsmith
