#pragma once

#include <stdexcept>
#include <string>

namespace roadpop {

/// Bad or missing input data: unreadable files, malformed records that cannot
/// be skipped, references to unknown ids. The CLI maps this to exit status 2.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A network source is inconsistent. `offending_id` is the id that failed to
/// resolve or was duplicated; `segment_id` names the segment involved, if any.
class NetworkLoadError : public InputError {
 public:
  NetworkLoadError(const std::string& message, std::string offending_id, std::string segment_id = {})
      : InputError(message), offending_id_(std::move(offending_id)), segment_id_(std::move(segment_id)) {}

  const std::string& offending_id() const { return offending_id_; }
  const std::string& segment_id() const { return segment_id_; }

 private:
  std::string offending_id_;
  std::string segment_id_;
};

/// Internal bookkeeping does not add up. The CLI maps this to exit status 3.
class InvariantError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace roadpop
