// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cassert>
#include <cstdint>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace verisure {

/// A diagnostic with a stable machine-readable code. `path` is a JSON path,
/// file location, or signal name depending on the producing module.
struct Error {
    std::string code;
    std::string message;
    std::string path;

    bool operator==(const Error&) const = default;
};

/// Value-or-error return type used across the library. Domain failures are
/// values, not exceptions; only infrastructure faults (bad_alloc etc.) throw.
template <typename T>
class Result {
public:
    Result(T value) : inner_(std::move(value)) {}
    Result(Error err) : inner_(std::move(err)) {}

    bool ok() const { return std::holds_alternative<T>(inner_); }
    explicit operator bool() const { return ok(); }

    const T& value() const {
        assert(ok());
        return std::get<T>(inner_);
    }
    T& value() {
        assert(ok());
        return std::get<T>(inner_);
    }
    T take() {
        assert(ok());
        return std::move(std::get<T>(inner_));
    }
    const Error& error() const {
        assert(!ok());
        return std::get<Error>(inner_);
    }

private:
    std::variant<T, Error> inner_;
};

inline Error make_error(std::string code, std::string message, std::string path = "") {
    return Error{std::move(code), std::move(message), std::move(path)};
}

} // namespace verisure
