#pragma once

#include <stdexcept>
#include <string>

namespace eso {

// All library errors carry a stable kind tag so the CLI can map them to
// exit codes and machine-readable reports without string matching.
struct Error : std::runtime_error {
    std::string kind;
    Error(std::string k, const std::string& msg)
        : std::runtime_error(k + ": " + msg), kind(std::move(k)) {}
};

#define ESO_ERROR_TYPE(Name)                                   \
    struct Name : Error {                                      \
        explicit Name(const std::string& msg)                  \
            : Error(#Name, msg) {}                             \
    }

ESO_ERROR_TYPE(ParseError);
ESO_ERROR_TYPE(ArityError);
ESO_ERROR_TYPE(RangeError);
ESO_ERROR_TYPE(SignatureMismatch);
ESO_ERROR_TYPE(EmptyDomain);
ESO_ERROR_TYPE(CapExceeded);
ESO_ERROR_TYPE(BudgetExceeded);
ESO_ERROR_TYPE(CnfBlowup);
ESO_ERROR_TYPE(PositiveEquality);
ESO_ERROR_TYPE(NotPrenex);
ESO_ERROR_TYPE(UnknownSymbol);
ESO_ERROR_TYPE(DuplicateExistential);
ESO_ERROR_TYPE(UnboundVariable);
ESO_ERROR_TYPE(SymbolClash);
ESO_ERROR_TYPE(NotMonotone);
ESO_ERROR_TYPE(NotExtensional);
ESO_ERROR_TYPE(NotSNP);
ESO_ERROR_TYPE(TrivialSentence);
ESO_ERROR_TYPE(ProbeExhausted);
ESO_ERROR_TYPE(OracleInconsistent);
ESO_ERROR_TYPE(VariableMismatch);
ESO_ERROR_TYPE(BadParams);
ESO_ERROR_TYPE(NonOrderSignature);

#undef ESO_ERROR_TYPE

}  // namespace eso
