#pragma once

#include <stdexcept>
#include <string>

namespace eae {

// Error categories double as CLI exit codes.
enum class ErrorCategory : int {
  kUsage = 2,
  kParse = 3,
  kFormat = 4,
  kValidation = 5,
  kIntegrity = 6,
  kOntology = 7,
  kConfig = 8,
  kPath = 9,
  kModel = 10,
  kTransport = 11,
};

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kUsage: return "usage";
    case ErrorCategory::kParse: return "parse";
    case ErrorCategory::kFormat: return "format";
    case ErrorCategory::kValidation: return "validation";
    case ErrorCategory::kIntegrity: return "integrity";
    case ErrorCategory::kOntology: return "ontology";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kPath: return "path";
    case ErrorCategory::kModel: return "model";
    case ErrorCategory::kTransport: return "transport";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const { return category_; }
  int exit_code() const { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

#define EAE_DEFINE_ERROR(Name, Cat)                                     \
  class Name : public Error {                                           \
   public:                                                              \
    explicit Name(const std::string& what) : Error(ErrorCategory::Cat, what) {} \
  };

EAE_DEFINE_ERROR(UsageError, kUsage)
EAE_DEFINE_ERROR(ParseError, kParse)
EAE_DEFINE_ERROR(FormatError, kFormat)
EAE_DEFINE_ERROR(ValidationError, kValidation)
EAE_DEFINE_ERROR(IntegrityError, kIntegrity)
EAE_DEFINE_ERROR(OntologyError, kOntology)
EAE_DEFINE_ERROR(ConfigError, kConfig)
EAE_DEFINE_ERROR(PathError, kPath)
EAE_DEFINE_ERROR(ModelError, kModel)
EAE_DEFINE_ERROR(TransportError, kTransport)

#undef EAE_DEFINE_ERROR

}  // namespace eae
