#pragma once

#include <filesystem>
#include <string>
#include <string_view>

namespace ttk {

// Whole-file read. Throws Error(Errc::io_failure) when the file cannot be
// opened or read.
std::string read_file(const std::filesystem::path& path);

// Atomic whole-file write: writes to a temp file in the same directory and
// renames it over the destination. mode applies to the final file.
void write_file_atomic(const std::filesystem::path& path, std::string_view content,
                       unsigned int mode = 0644);

}  // namespace ttk
