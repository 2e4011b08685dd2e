#pragma once

#include <stdexcept>
#include <string>

namespace epora {

// Error with a stable machine-readable code alongside the human message.
class EporaError : public std::runtime_error {
  public:
    EporaError(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const { return code_; }

  private:
    std::string code_;
};

}  // namespace epora
