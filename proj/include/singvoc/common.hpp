#pragma once

#include <cstdint>
#include <stdexcept>
#include <sstream>
#include <string>

namespace singvoc {

// Exit code conventions used by the CLI: 0 ok, 1 user error, 2 internal error.
// UserError covers bad input (files, config, arguments); InternalError covers
// contract violations inside the library (stride bookkeeping, shape algebra).

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeError : public Error {
public:
    explicit ShapeError(const std::string& msg) : Error(msg) {}
};

class ValueError : public Error {
public:
    explicit ValueError(const std::string& msg) : Error(msg) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

class InternalError : public Error {
public:
    explicit InternalError(const std::string& msg) : Error(msg) {}
};

namespace detail {
inline void format_into(std::ostringstream&) {}

template <typename T, typename... Rest>
void format_into(std::ostringstream& oss, T&& head, Rest&&... rest) {
    oss << std::forward<T>(head);
    format_into(oss, std::forward<Rest>(rest)...);
}
} // namespace detail

template <typename... Args>
std::string strcat_all(Args&&... args) {
    std::ostringstream oss;
    detail::format_into(oss, std::forward<Args>(args)...);
    return oss.str();
}

template <typename E = Error, typename... Args>
[[noreturn]] void fail(Args&&... args) {
    throw E(strcat_all(std::forward<Args>(args)...));
}

#define SINGVOC_CHECK(cond, ...)                                        \
    do {                                                                \
        if (!(cond)) ::singvoc::fail<::singvoc::Error>(__VA_ARGS__);    \
    } while (0)

#define SINGVOC_CHECK_SHAPE(cond, ...)                                      \
    do {                                                                     \
        if (!(cond)) ::singvoc::fail<::singvoc::ShapeError>(__VA_ARGS__);   \
    } while (0)

#define SINGVOC_CHECK_VALUE(cond, ...)                                      \
    do {                                                                     \
        if (!(cond)) ::singvoc::fail<::singvoc::ValueError>(__VA_ARGS__);   \
    } while (0)

#define SINGVOC_CHECK_INTERNAL(cond, ...)                                     \
    do {                                                                       \
        if (!(cond)) ::singvoc::fail<::singvoc::InternalError>(__VA_ARGS__);  \
    } while (0)

} // namespace singvoc
