#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace aixi {

/// Broken structural contract: alternation violations, malformed encodings, bad indices.
class structural_error : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Conditioning on a context whose probability is zero.
class undefined_conditional : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// An exact computation would exceed the enumeration caps; the operation refuses rather than samples.
class capacity_error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration or input file failed validation. Carries every violation found, not just the first.
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(std::vector<std::string> violations)
      : std::runtime_error(join(violations)), violations_(std::move(violations)) {}

  [[nodiscard]] const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
      if (!out.empty()) out += "; ";
      out += item;
    }
    return out;
  }

  std::vector<std::string> violations_;
};

}  // namespace aixi
