#pragma once

#include <stdexcept>
#include <string>

namespace doc2doc {

/// Raised for malformed input, invariant violations and IO failures.
/// The message names the first offending unit (file, document, index).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace doc2doc
