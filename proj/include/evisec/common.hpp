#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace evisec {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

// Thrown when input data fails a structural check (bad row, empty file,
// out-of-range index, malformed config).
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class ParseError : public ValidationError {
public:
    ParseError(const std::string& msg, long line)
        : ValidationError(msg + " (line " + std::to_string(line) + ")"), line_(line) {}
    long line() const { return line_; }

private:
    long line_;
};

class DimensionError : public std::runtime_error {
public:
    explicit DimensionError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace evisec
