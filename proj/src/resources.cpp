#include "engagelab/resources.hpp"

#include <cstdlib>
#include <fstream>
#include <mutex>
#include <optional>
#include <sstream>

#include "engagelab/errors.hpp"

namespace engagelab {

namespace {

std::mutex g_mutex;
std::optional<std::filesystem::path> g_override;

}  // namespace

std::filesystem::path resource_dir() {
    {
        std::lock_guard lock(g_mutex);
        if (g_override) return *g_override;
    }
    if (const char* env = std::getenv("ENGAGELAB_RESOURCES"); env && *env) return env;
    return ENGAGELAB_RESOURCE_DIR;
}

void set_resource_dir(std::filesystem::path dir) {
    std::lock_guard lock(g_mutex);
    g_override = std::move(dir);
}

std::filesystem::path resource_path(const std::filesystem::path& relative) {
    return resource_dir() / relative;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw IoError("error reading '" + path.string() + "'");
    return ss.str();
}

}  // namespace engagelab
