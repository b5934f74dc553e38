#pragma once

#include <functional>
#include <string>

namespace levyfdt {

using WarningSink = std::function<void(const std::string&)>;

/// Route library warnings; the default prints "levyfdt: warning: ..." to stderr.
/// Passing an empty function restores the default.
void set_warning_sink(WarningSink sink);

void warn(const std::string& message);

}  // namespace levyfdt
