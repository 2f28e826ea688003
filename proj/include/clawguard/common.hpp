#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace clawguard {

// Error codes are short stable identifiers (e.g. "PROOF_MISMATCH"); messages
// are for humans and carry no contract.
struct Error {
  std::string code;
  std::string message;
};

class Status {
public:
  Status() = default;
  static Status failure(std::string code, std::string message) {
    Status s;
    s.error_ = Error{std::move(code), std::move(message)};
    return s;
  }
  bool ok() const { return !error_.has_value(); }
  const Error& error() const { return *error_; }

private:
  std::optional<Error> error_;
};

template <typename T>
class Result {
public:
  Result(T value) : state_(std::move(value)) {}
  Result(Error error) : state_(std::move(error)) {}
  static Result failure(std::string code, std::string message) {
    return Result(Error{std::move(code), std::move(message)});
  }
  bool ok() const { return std::holds_alternative<T>(state_); }
  const T& value() const { return std::get<T>(state_); }
  T& value() { return std::get<T>(state_); }
  T take() { return std::move(std::get<T>(state_)); }
  const Error& error() const { return std::get<Error>(state_); }

private:
  std::variant<T, Error> state_;
};

using Clock = std::function<std::chrono::system_clock::time_point()>;

Clock system_clock();
// Fixed clock for deterministic tests and replays.
Clock fixed_clock(std::chrono::system_clock::time_point at);

std::string iso8601_utc(std::chrono::system_clock::time_point tp);

std::string hex_encode(const std::uint8_t* data, std::size_t len);
std::string hex_encode(const std::vector<std::uint8_t>& data);
std::optional<std::vector<std::uint8_t>> hex_decode(std::string_view hex);

std::string to_lower(std::string_view s);

}  // namespace clawguard
