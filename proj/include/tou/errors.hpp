#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace tou {

enum class Side { plus, minus };

inline const char* to_string(Side side) { return side == Side::plus ? "plus" : "minus"; }

/// Base class for all domain errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NotErgodic : public Error {
 public:
  NotErgodic() : Error("parameters are not ergodic: no stationary distribution") {}
};

/// The Euler scheme produced a non-finite value or left the divergence bound.
class Diverged : public Error {
 public:
  Diverged(std::size_t step, std::optional<std::size_t> path = std::nullopt)
      : Error(message(step, path)), step_(step), path_(path) {}

  std::size_t step() const noexcept { return step_; }
  std::optional<std::size_t> path() const noexcept { return path_; }

 private:
  static std::string message(std::size_t step, std::optional<std::size_t> path) {
    std::string msg = "simulation diverged at step " + std::to_string(step);
    if (path) msg += " of path " + std::to_string(*path);
    return msg;
  }

  std::size_t step_;
  std::optional<std::size_t> path_;
};

class DegenerateSide : public Error {
 public:
  explicit DegenerateSide(Side side)
      : Error(std::string("degenerate design on the ") + to_string(side) + " side"), side_(side) {}
  Side side() const noexcept { return side_; }

 private:
  Side side_;
};

class SideUnvisited : public Error {
 public:
  explicit SideUnvisited(Side side)
      : Error(std::string("no observation on the ") + to_string(side) + " side"), side_(side) {}
  Side side() const noexcept { return side_; }

 private:
  Side side_;
};

class NoValidCandidate : public Error {
 public:
  NoValidCandidate() : Error("no threshold candidate leaves both sides estimable") {}
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace tou
