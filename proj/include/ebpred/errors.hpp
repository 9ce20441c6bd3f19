#pragma once

#include <stdexcept>
#include <string>

namespace ebpred {

// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
    virtual const char* code() const noexcept { return "Error"; }
};

#define EBPRED_DEFINE_ERROR(Name)                                       \
    struct Name : Error {                                               \
        explicit Name(const std::string& msg) : Error(msg) {}           \
        const char* code() const noexcept override { return #Name; }    \
    }

EBPRED_DEFINE_ERROR(SingularDesign);
EBPRED_DEFINE_ERROR(DimensionMismatch);
EBPRED_DEFINE_ERROR(ModeMismatch);
EBPRED_DEFINE_ERROR(TooLarge);
EBPRED_DEFINE_ERROR(EmptyChain);
EBPRED_DEFINE_ERROR(TooFewDraws);
EBPRED_DEFINE_ERROR(ConfigError);
EBPRED_DEFINE_ERROR(ParseError);
EBPRED_DEFINE_ERROR(RaggedRows);
EBPRED_DEFINE_ERROR(NonNumericCell);
EBPRED_DEFINE_ERROR(IoError);

#undef EBPRED_DEFINE_ERROR

}  // namespace ebpred
