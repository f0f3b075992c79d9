#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hod/types.hpp"

namespace hod::io {

/// Owning stdio handle; every failure is reported as IoError naming the path.
class File {
public:
    File() = default;
    File(const std::filesystem::path& path, const char* mode);
    ~File();
    File(File&& other) noexcept;
    File& operator=(File&& other) noexcept;
    File(const File&) = delete;
    File& operator=(const File&) = delete;

    bool is_open() const { return f_ != nullptr; }
    const std::string& path() const { return path_; }

    void write(const void* data, std::size_t bytes);
    /// Reads up to `bytes`; returns the count actually read (short at EOF).
    std::size_t read(void* data, std::size_t bytes);
    void read_exact(void* data, std::size_t bytes);
    void seek(std::uint64_t offset);
    std::uint64_t tell();
    std::uint64_t size();
    void flush();
    /// Flushes stdio buffers and fsyncs the descriptor.
    void sync();
    void close();

private:
    std::FILE* f_ = nullptr;
    std::string path_;
};

std::uint32_t crc32_file(const std::filesystem::path& path);

}  // namespace hod::io
