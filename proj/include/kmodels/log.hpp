#pragma once

#include <functional>
#include <string>

namespace kmodels {

using WarningHandler = std::function<void(const std::string&)>;

/// Replace the process-wide warning sink. Passing an empty handler silences warnings.
/// Returns the previous handler. The default writes to stderr.
WarningHandler set_warning_handler(WarningHandler handler);

void warn(const std::string& message);

}  // namespace kmodels
