#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace specsmith {

// Every failure the library reports carries one of these codes. The CLI maps
// codes to exit classes; tests assert on codes rather than message text.
enum class Err {
    // ingest
    EmptyDocument,
    InvalidId,
    BudgetTooSmall,
    EncodingError,
    // catalog
    ParseError,
    DuplicateId,
    UnknownLevel,
    UnknownProductType,
    EmptyManifest,
    // gateway
    ProviderError,
    CassetteMiss,
    ContextOverflow,
    CassetteWriteError,
    InvalidConversation,
    // promptkit
    UnsupportedLevel,
    EmptyBrief,
    EmptyRtl,
    EmptySection,
    EmptyInput,
    TemplateError,
    // rtl
    NoModuleFound,
    UnbalancedDelimiters,
    NoPortTable,
    MalformedTable,
    // workflows
    StrategyRequiresSplit,
    LevelOrderViolation,
    ParseFailed,
    UnknownFindingId,
    CategoryNotApplicable,
    // fixtures
    CoverageGap,
    // cli / infrastructure
    IoError,
    ConfigError,
    UsageError,
};

const char* err_name(Err code);

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& message)
        : std::runtime_error(std::string(err_name(code)) + ": " + message), code_(code) {}

    Err code() const { return code_; }

private:
    Err code_;
};

[[noreturn]] inline void raise(Err code, const std::string& message) {
    throw Error(code, message);
}

// Exit-class partition used by the CLI: 1 for domain errors, 2 for I/O and
// configuration failures.
bool is_io_or_config(Err code);

} // namespace specsmith
