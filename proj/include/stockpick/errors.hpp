#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace stockpick {

// Coarse error categories, mapped to CLI exit codes (2/3/4).
enum class ErrorKind { Config, Data, Compute };

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, std::string name, const std::string& detail)
        : std::runtime_error(name + ": " + detail),
          kind_(kind),
          name_(std::move(name)) {}

    ErrorKind kind() const { return kind_; }
    const std::string& name() const { return name_; }

    static Error config(std::string name, const std::string& detail) {
        return Error(ErrorKind::Config, std::move(name), detail);
    }
    static Error data(std::string name, const std::string& detail) {
        return Error(ErrorKind::Data, std::move(name), detail);
    }
    static Error compute(std::string name, const std::string& detail) {
        return Error(ErrorKind::Compute, std::move(name), detail);
    }

private:
    ErrorKind kind_;
    std::string name_;
};

}  // namespace stockpick
