#include "hod/io.hpp"

#include <cerrno>
#include <cstring>
#include <utility>

#include <unistd.h>
#include <zlib.h>

namespace hod::io {

namespace {
std::string errno_text() { return std::strerror(errno); }
}  // namespace

File::File(const std::filesystem::path& path, const char* mode) : path_(path.string()) {
    f_ = std::fopen(path_.c_str(), mode);
    if (!f_)
        throw IoError(path_, "cannot open (" + errno_text() + ")");
}

File::~File() {
    if (f_)
        std::fclose(f_);
}

File::File(File&& other) noexcept : f_(std::exchange(other.f_, nullptr)), path_(std::move(other.path_)) {}

File& File::operator=(File&& other) noexcept {
    if (this != &other) {
        if (f_)
            std::fclose(f_);
        f_ = std::exchange(other.f_, nullptr);
        path_ = std::move(other.path_);
    }
    return *this;
}

void File::write(const void* data, std::size_t bytes) {
    if (bytes && std::fwrite(data, 1, bytes, f_) != bytes)
        throw IoError(path_, "write failed (" + errno_text() + ")");
}

std::size_t File::read(void* data, std::size_t bytes) {
    std::size_t got = std::fread(data, 1, bytes, f_);
    if (got < bytes && std::ferror(f_))
        throw IoError(path_, "read failed (" + errno_text() + ")");
    return got;
}

void File::read_exact(void* data, std::size_t bytes) {
    if (read(data, bytes) != bytes)
        throw IoError(path_, "unexpected end of file");
}

void File::seek(std::uint64_t offset) {
    if (fseeko(f_, static_cast<off_t>(offset), SEEK_SET) != 0)
        throw IoError(path_, "seek failed (" + errno_text() + ")");
}

std::uint64_t File::tell() {
    auto pos = ftello(f_);
    if (pos < 0)
        throw IoError(path_, "tell failed (" + errno_text() + ")");
    return static_cast<std::uint64_t>(pos);
}

std::uint64_t File::size() {
    auto here = tell();
    if (fseeko(f_, 0, SEEK_END) != 0)
        throw IoError(path_, "seek failed (" + errno_text() + ")");
    auto end = tell();
    seek(here);
    return end;
}

void File::flush() {
    if (std::fflush(f_) != 0)
        throw IoError(path_, "flush failed (" + errno_text() + ")");
}

void File::sync() {
    flush();
    if (::fsync(fileno(f_)) != 0)
        throw IoError(path_, "fsync failed (" + errno_text() + ")");
}

void File::close() {
    if (f_) {
        int rc = std::fclose(f_);
        f_ = nullptr;
        if (rc != 0)
            throw IoError(path_, "close failed (" + errno_text() + ")");
    }
}

std::uint32_t crc32_file(const std::filesystem::path& path) {
    File f(path, "rb");
    std::vector<unsigned char> buf(1 << 16);
    uLong crc = ::crc32(0L, Z_NULL, 0);
    for (;;) {
        std::size_t got = f.read(buf.data(), buf.size());
        if (got == 0)
            break;
        crc = ::crc32(crc, buf.data(), static_cast<uInt>(got));
    }
    return static_cast<std::uint32_t>(crc);
}

}  // namespace hod::io
