#pragma once

#include <stdexcept>
#include <string>

namespace codemix {

// Base error for everything the toolkit throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed input file (wrong column count, bad numbers, ...). CLI exit code 2.
struct ParseError : Error {
    using Error::Error;
};

// Well-formed file but invalid content (unknown tag, cyclic heads, ...). CLI exit code 3.
struct ValidationError : Error {
    using Error::Error;
};

// Model file or model pairing problems (bad magic, label inventory mismatch). CLI exit code 4.
struct ModelError : Error {
    using Error::Error;
};

} // namespace codemix
