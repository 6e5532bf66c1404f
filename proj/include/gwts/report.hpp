#pragma once

#include <filesystem>
#include <string>

namespace gwts {

/// Shortest text that is still 17-significant-digit faithful ("%.17g").
[[nodiscard]] std::string format_double(double v);
/// Shortest text that parses back to the same double; for messages and tables read by people.
[[nodiscard]] std::string format_short(double v);

/// Writes `text` to `path`, creating parent directories. Throws gwts::Error on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

[[nodiscard]] std::string read_text_file(const std::filesystem::path& path);

}  // namespace gwts
