#pragma once

#include <stdexcept>
#include <string>

namespace prefixsyn {

/// Error categories surfaced by the library. Each maps to one failure mode
/// so callers (and tests) can distinguish them without string matching.
enum class Errc {
    InvalidWidth,      // circuit width below 2
    MissingNode,       // reference to a node index that does not exist
    InvalidPrefixNode, // adjacency condition violated: right.lo != left.hi + 1
    CircuitNotValid,   // operation requires a valid prefix circuit
    OperandRange,      // operand does not fit in the circuit width
    InfeasibleDelay,   // delay bound below ceil(log2 n) + 1
    InfeasibleArea,    // area bound below the minimum completable size
    ParseError,        // malformed SPCR text (message carries the line number)
    ClaimMismatch,     // SPCR line whose claimed range/level contradicts recomputation
    EmptyDocument,     // SPCR text with no node lines
    EmptyPool,         // DSE prompt requested with an unseeded pool
    NothingToPropose,  // synthesis prompt requested for an already-valid circuit
    AuthFailure,       // API key unresolvable or rejected by the endpoint
    EndpointTimeout,   // transport kept failing after all retries
    MalformedReply,    // endpoint returned 2xx but not a chat completion
    MissingFile,       // a required file or pool directory is absent
    IoError,           // filesystem read/write failure
    InvalidArgument,   // parameter outside its documented domain
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

inline const char* errc_name(Errc c) {
    switch (c) {
    case Errc::InvalidWidth: return "invalid-width";
    case Errc::MissingNode: return "missing-node";
    case Errc::InvalidPrefixNode: return "invalid-prefix-node";
    case Errc::CircuitNotValid: return "circuit-not-valid";
    case Errc::OperandRange: return "operand-range";
    case Errc::InfeasibleDelay: return "infeasible-delay";
    case Errc::InfeasibleArea: return "infeasible-area";
    case Errc::ParseError: return "parse-error";
    case Errc::ClaimMismatch: return "claim-mismatch";
    case Errc::EmptyDocument: return "empty-document";
    case Errc::EmptyPool: return "empty-pool";
    case Errc::NothingToPropose: return "nothing-to-propose";
    case Errc::AuthFailure: return "auth-failure";
    case Errc::EndpointTimeout: return "endpoint-timeout";
    case Errc::MalformedReply: return "malformed-reply";
    case Errc::MissingFile: return "missing-file";
    case Errc::IoError: return "io-error";
    case Errc::InvalidArgument: return "invalid-argument";
    }
    return "unknown";
}

} // namespace prefixsyn
