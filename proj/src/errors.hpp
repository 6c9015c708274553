#pragma once

#include <stdexcept>
#include <string>

namespace down {

// One error hierarchy for the whole library. The kind maps 1:1 onto the
// C API status codes and the CLI exit codes.
class Error : public std::runtime_error {
public:
    enum class Kind {
        invalid_argument,
        config,
        dataset,
        backend,
        parse,
        io,
        internal,
    };

    Error(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}

    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

inline Error invalid_argument_error(const std::string& msg) { return Error(Error::Kind::invalid_argument, msg); }
inline Error config_error(const std::string& msg)  { return Error(Error::Kind::config, msg); }
inline Error dataset_error(const std::string& msg) { return Error(Error::Kind::dataset, msg); }
inline Error parse_error(const std::string& msg)   { return Error(Error::Kind::parse, msg); }
inline Error io_error(const std::string& msg)      { return Error(Error::Kind::io, msg); }

} // namespace down
