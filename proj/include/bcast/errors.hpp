#pragma once

#include <stdexcept>
#include <string>

namespace bcast {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input files or flag values.
struct ParseError : Error {
    using Error::Error;
};

// Instance or schedule violates a structural invariant.
struct ValidationError : Error {
    using Error::Error;
};

// A request has no completion time within the trace horizon.
struct UnservedRequest : Error {
    using Error::Error;
};

// No schedule within the given horizon can serve every request.
struct Infeasible : Error {
    using Error::Error;
};

// Search exceeded its node budget.
struct ScaleExceeded : Error {
    using Error::Error;
};

// An inner policy returned rates that do not sum to its share.
struct PolicyContractViolation : Error {
    using Error::Error;
};

// A constructive schedule could not be packed as guaranteed.
struct ConstructionViolated : Error {
    using Error::Error;
};

// A trace does not belong to the instance it was paired with.
struct TraceMismatch : Error {
    using Error::Error;
};

} // namespace bcast
