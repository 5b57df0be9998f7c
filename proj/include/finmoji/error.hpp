#pragma once

#include <stdexcept>
#include <string>

namespace finmoji {

// Input data that cannot support the requested operation (empty corpora,
// duplicate ids, a missing class, incompatible model files).
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Degenerate numerical input (zero variance, empty distributions).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace finmoji
