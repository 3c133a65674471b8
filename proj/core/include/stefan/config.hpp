#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include "stefan/harness.hpp"

namespace stefan {

/// Malformed config text. line() is 1-based, 0 when the error is not tied to
/// a line.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& message);
  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  int line_;
};

/// INI-style config: `[scenario]`, `[physics]`, `[numerics]`, `[output]`
/// sections of `key = value` lines, `#` or `;` comments. The scenario key
/// selects the defaults, the remaining keys override them. Unknown keys,
/// repeated keys and keys in the wrong section are ParseErrors; values out of
/// range are ValidationErrors.
[[nodiscard]] CaseConfig parse_config(std::string_view text);

/// Every key, fixed order, doubles in shortest round-trip form.
/// parse_config(serialize_config(c)) reproduces c exactly.
[[nodiscard]] std::string serialize_config(const CaseConfig& cfg);

/// 64-bit FNV-1a of the canonical serialization, as 16 hex digits.
[[nodiscard]] std::string config_hash(const CaseConfig& cfg);
[[nodiscard]] std::uint64_t fnv1a(std::string_view bytes);

/// Shortest decimal that reads back to the same double ("nan", "inf" for
/// non-finite values).
[[nodiscard]] std::string format_double(double v);

}  // namespace stefan
