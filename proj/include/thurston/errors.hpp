#pragma once

#include <stdexcept>
#include <string>

namespace thurston {

// Bad or malformed input: the caller handed us something outside the
// documented preconditions. CLI maps these to exit code 2.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// Domain errors: the input is well-formed but the requested object does not
// exist (or cannot be resolved at this precision). CLI maps these to exit 3.
struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

struct NoSuchPoint : DomainError {
  explicit NoSuchPoint(const std::string& what) : DomainError(what) {}
};

struct FluxImbalance : DomainError {
  FluxImbalance(int component, std::string in_sum, std::string out_sum)
      : DomainError("flux imbalance on component " + std::to_string(component) +
                    ": in=" + in_sum + " out=" + out_sum),
        component(component),
        in_sum(std::move(in_sum)),
        out_sum(std::move(out_sum)) {}
  int component;
  std::string in_sum;
  std::string out_sum;
};

struct NoPath : DomainError {
  explicit NoPath(int component)
      : DomainError("no train path in component " + std::to_string(component) +
                    " (component is not recurrent as decorated)"),
        component(component) {}
  int component;
};

struct AmbiguousAtDepth : DomainError {
  explicit AmbiguousAtDepth(int depth, const std::string& what = "")
      : DomainError("ambiguous at depth " + std::to_string(depth) +
                    (what.empty() ? "" : ": " + what)),
        depth(depth) {}
  int depth;
};

struct NonAdditiveChain : DomainError {
  explicit NonAdditiveChain(const std::string& what) : DomainError(what) {}
};

// Violated API contract (programming error, not data error).
struct ContractViolation : std::logic_error {
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace thurston
