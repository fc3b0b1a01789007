#ifndef MINPAIR_ERROR_HPP_
#define MINPAIR_ERROR_HPP_

#include <stdexcept>
#include <string>
#include <string_view>

namespace minpair {

enum class ErrorCode {
  kIo,
  kInvalidUtf8,
  kLineCountMismatch,
  kMalformedRow,
  kEmptyInput,
  kDuplicateId,
  kMalformedRecord,
  kResourceInvalid,
  kNoCandidateNoun,
  kNoEligiblePhrase,
  kNoEligibleToken,
  kNoEligibleSite,
  kSingleClause,
  kUnknownErrorType,
  kInvalidLogProbs,
  kEmptyTarget,
  kEmptyCorpus,
  kBackendFailure,
  kProtocolViolation,
  kTimeout,
  kNonFiniteScore,
  kEmptyTestset,
  kSpanOutOfRange,
  kVersionConflict,
  kIllegalTransition,
  kMissingCorrection,
  kUnknownId,
  kUnresolvedReviews,
  kConfig,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::kIo: return "IO_ERROR";
    case ErrorCode::kInvalidUtf8: return "INVALID_UTF8";
    case ErrorCode::kLineCountMismatch: return "LINE_COUNT_MISMATCH";
    case ErrorCode::kMalformedRow: return "MALFORMED_ROW";
    case ErrorCode::kEmptyInput: return "EMPTY_INPUT";
    case ErrorCode::kDuplicateId: return "DUPLICATE_ID";
    case ErrorCode::kMalformedRecord: return "MALFORMED_RECORD";
    case ErrorCode::kResourceInvalid: return "RESOURCE_INVALID";
    case ErrorCode::kNoCandidateNoun: return "NO_CANDIDATE_NOUN";
    case ErrorCode::kNoEligiblePhrase: return "NO_ELIGIBLE_PHRASE";
    case ErrorCode::kNoEligibleToken: return "NO_ELIGIBLE_TOKEN";
    case ErrorCode::kNoEligibleSite: return "NO_ELIGIBLE_SITE";
    case ErrorCode::kSingleClause: return "SINGLE_CLAUSE";
    case ErrorCode::kUnknownErrorType: return "UNKNOWN_ERROR_TYPE";
    case ErrorCode::kInvalidLogProbs: return "INVALID_LOGPROBS";
    case ErrorCode::kEmptyTarget: return "EMPTY_TARGET";
    case ErrorCode::kEmptyCorpus: return "EMPTY_CORPUS";
    case ErrorCode::kBackendFailure: return "BACKEND_FAILURE";
    case ErrorCode::kProtocolViolation: return "PROTOCOL_VIOLATION";
    case ErrorCode::kTimeout: return "TIMEOUT";
    case ErrorCode::kNonFiniteScore: return "NON_FINITE_SCORE";
    case ErrorCode::kEmptyTestset: return "EMPTY_TESTSET";
    case ErrorCode::kSpanOutOfRange: return "SPAN_OUT_OF_RANGE";
    case ErrorCode::kVersionConflict: return "VERSION_CONFLICT";
    case ErrorCode::kIllegalTransition: return "ILLEGAL_TRANSITION";
    case ErrorCode::kMissingCorrection: return "MISSING_CORRECTION";
    case ErrorCode::kUnknownId: return "UNKNOWN_ID";
    case ErrorCode::kUnresolvedReviews: return "UNRESOLVED_REVIEWS";
    case ErrorCode::kConfig: return "CONFIG_ERROR";
  }
  return "UNKNOWN";
}

/// Every failure in the toolkit carries a stable code; the CLI prints it as
/// the first field of its single-line error report.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// True for the rule-level errors that mean "this sentence does not exhibit
/// the phenomenon"; builders skip these instead of failing.
constexpr bool is_skip_reason(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNoCandidateNoun:
    case ErrorCode::kNoEligiblePhrase:
    case ErrorCode::kNoEligibleToken:
    case ErrorCode::kNoEligibleSite:
    case ErrorCode::kSingleClause:
      return true;
    default:
      return false;
  }
}

}  // namespace minpair

#endif  // MINPAIR_ERROR_HPP_
