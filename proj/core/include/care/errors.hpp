#pragma once

#include <stdexcept>
#include <string>

namespace care {

// Base type for all recoverable errors raised by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

#define CARE_ERROR_TYPE(NAME, DEFAULT_MESSAGE)                        \
    struct NAME : Error {                                             \
        NAME() : Error(DEFAULT_MESSAGE) {}                            \
        explicit NAME(const std::string& message) : Error(message) {} \
    }

CARE_ERROR_TYPE(EmptyCalibrationSet, "empty calibration set");
CARE_ERROR_TYPE(EmptyDenominator, "denominator volume is empty");
CARE_ERROR_TYPE(EmptyTestSet, "empty test set");
CARE_ERROR_TYPE(LabelsRequired, "operation requires labeled pixels");
CARE_ERROR_TYPE(TooFewPixels, "too few pixels");
CARE_ERROR_TYPE(BadConfidenceBudget, "confidence budget outside (0,1)");
CARE_ERROR_TYPE(ProfileMismatch, "calibration profile does not match the requested configuration");
CARE_ERROR_TYPE(ConfigError, "invalid configuration");
CARE_ERROR_TYPE(FormatError, "unrecognized file format");
CARE_ERROR_TYPE(CorruptVolume, "corrupt volume data");

#undef CARE_ERROR_TYPE

} // namespace care
