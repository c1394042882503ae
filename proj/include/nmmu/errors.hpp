#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace nmmu {

enum class ErrorCode {
    NonCanonicalAddress,
    GpaOutOfRange,
    ReservedEncoding,
    UnmappedMemory,
    MisalignedAccess,
    AlignmentError,
    MappingConflict,
    InvalidParameter,
    InvalidConfig,
    ParseError,
};

std::string_view errorCodeName(ErrorCode code);

// Thrown for structural misuse: bad addresses handed to the builders,
// malformed configs, unparseable traces. Translation faults are not
// errors and never travel through this type.
class SimError : public std::runtime_error {
public:
    SimError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(errorCodeName(code)) + ": " + what), code_(code) {}

    [[nodiscard]] ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace nmmu
