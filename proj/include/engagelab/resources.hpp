#pragma once

#include <filesystem>
#include <string>

namespace engagelab {

/// Directory holding stopwords.txt and prompt/ templates. Resolution order:
/// set_resource_dir(), $ENGAGELAB_RESOURCES, then the build-time default.
std::filesystem::path resource_dir();
void set_resource_dir(std::filesystem::path dir);

std::filesystem::path resource_path(const std::filesystem::path& relative);

/// Whole-file read; throws IoError naming the path.
std::string read_text_file(const std::filesystem::path& path);

}  // namespace engagelab
