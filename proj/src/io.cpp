#include "ttk/io.hpp"

#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include "ttk/errors.hpp"

namespace ttk {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw Error(Errc::io_failure, "cannot open " + path.string() + " for reading");
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) {
        throw Error(Errc::io_failure, "read failed for " + path.string());
    }
    return std::move(buf).str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content,
                       unsigned int mode) {
    std::filesystem::path tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw Error(Errc::io_failure, "cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            std::error_code ec;
            std::filesystem::remove(tmp, ec);
            throw Error(Errc::io_failure, "write failed for " + tmp.string());
        }
    }
    if (::chmod(tmp.c_str(), mode) != 0) {
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw Error(Errc::io_failure, "chmod failed for " + tmp.string());
    }
    if (::rename(tmp.c_str(), path.c_str()) != 0) {
        int err = errno;
        std::error_code ec;
        std::filesystem::remove(tmp, ec);
        throw Error(Errc::io_failure, "rename to " + path.string() + " failed: " +
                                          std::strerror(err));
    }
}

}  // namespace ttk
