#pragma once

#include <stdexcept>
#include <string>

namespace gasgraph {

// Base class for all gasgraph failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Input violates the dataset schema: bad value, missing field, malformed
// geometry. Messages name the offending feature id and field.
struct SchemaError : Error {
    using Error::Error;
};

// Operation precondition violated or a reference cannot be resolved.
struct DataError : Error {
    using Error::Error;
};

// Unreadable or unwritable file locations.
struct IoError : Error {
    using Error::Error;
};

}  // namespace gasgraph
