#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

namespace stefan {

/// quick: the fast criteria only. full: everything except the tip-velocity
/// run. long: everything.
enum class Profile { Quick, Full, Long };

[[nodiscard]] std::string_view profile_name(Profile p);
[[nodiscard]] std::optional<Profile> profile_from_name(std::string_view name);

enum class Status { Pass, Fail, Skip };

struct CriterionResult {
  int id = 0;
  std::string name;
  Status status = Status::Skip;
  std::string detail;  // measured values against their targets
  double runtime_s = 0.0;
  double budget_s = 0.0;
};

struct AcceptanceOptions {
  Profile profile = Profile::Full;
  int threads = 1;
  /// Progress lines (one per sub-run) go here when set.
  std::ostream* log = nullptr;
};

inline constexpr int kCriterionCount = 9;

[[nodiscard]] CriterionResult run_criterion(int id, const AcceptanceOptions& options);

/// "PASS  3 crank_layer  <detail>  (12.3 s / 600 s)".
[[nodiscard]] std::string format_result(const CriterionResult& r);

/// Sweep parallelism from STEFAN_CUT_THREADS (default 1).
[[nodiscard]] int threads_from_env();

}  // namespace stefan
