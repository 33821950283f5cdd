#pragma once

#include <stdexcept>
#include <string>

namespace wayfind {

/// Runtime failure inside the pipeline (maps to CLI exit status 1).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent input (maps to CLI exit status 2).
///
/// `source` names the file (or "<memory>"), `location` is a line number or a
/// JSON path when one is known.
class InputError : public Error {
public:
    InputError(std::string source, std::string location, const std::string& message)
        : Error(format(source, location, message)),
          source_(std::move(source)),
          location_(std::move(location)),
          detail_(message) {}

    explicit InputError(const std::string& message) : InputError("", "", message) {}

    const std::string& source() const noexcept { return source_; }
    const std::string& location() const noexcept { return location_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    static std::string format(const std::string& source, const std::string& location,
                              const std::string& message) {
        std::string out;
        if (!source.empty()) {
            out += source;
            out += location.empty() ? ": " : ":" + location + ": ";
        }
        return out + message;
    }

    std::string source_;
    std::string location_;
    std::string detail_;
};

} // namespace wayfind
