#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hod/io.hpp"
#include "hod/types.hpp"

namespace hod {

/// Total order on triplets used for shortcut filtering:
///  1. owner a, then other endpoint b, ascending;
///  2. outgoing before incoming;
///  3. shorter length first;
///  4. baseline before candidate (original < baseline < candidate overall);
///  then pred_hint ascending.
std::strong_ordering triplet_compare(const EdgeTriplet& x, const EdgeTriplet& y);

struct TripletLess {
    bool operator()(const EdgeTriplet& x, const EdgeTriplet& y) const { return triplet_compare(x, y) < 0; }
};

class TripletReader {
public:
    TripletReader(const std::filesystem::path& path, std::size_t block_size);
    bool next(EdgeTriplet& out);
    std::uint64_t remaining() const { return remaining_; }

private:
    io::File file_;
    std::vector<std::uint8_t> buf_;
    std::size_t pos_ = 0;
    std::size_t len_ = 0;
    std::uint64_t remaining_ = 0;
};

class TripletWriter {
public:
    TripletWriter(const std::filesystem::path& path, std::size_t block_size);
    void push(const EdgeTriplet& t);
    /// Flushes and closes; returns the record count.
    std::uint64_t finish();
    std::uint64_t count() const { return count_; }

private:
    void drain();
    io::File file_;
    std::vector<std::uint8_t> buf_;
    std::size_t len_ = 0;
    std::uint64_t count_ = 0;
};

/// A sorted (or to-be-sorted) run of fixed-width triplet records on disk.
/// Owned runs delete their file when destroyed.
class TripletRun {
public:
    TripletRun() = default;
    TripletRun(std::filesystem::path path, std::uint64_t count, bool owned = true);
    ~TripletRun();
    TripletRun(TripletRun&& other) noexcept;
    TripletRun& operator=(TripletRun&& other) noexcept;
    TripletRun(const TripletRun&) = delete;
    TripletRun& operator=(const TripletRun&) = delete;

    /// Opens an existing run file; its length must be a multiple of the
    /// record width.
    static TripletRun open(const std::filesystem::path& path);

    const std::filesystem::path& path() const { return path_; }
    std::uint64_t size() const { return count_; }
    TripletReader reader(std::size_t block_size = 1 << 16) const { return {path_, block_size}; }
    std::vector<EdgeTriplet> read_all() const;

private:
    void release();
    std::filesystem::path path_;
    std::uint64_t count_ = 0;
    bool owned_ = false;
};

struct SortConfig {
    std::uint64_t memory_budget = 64ull << 20;
    std::uint64_t block_size = 64ull << 10;
    std::filesystem::path temp_dir = std::filesystem::temp_directory_path();
    bool parallel_runs = true;

    /// max(2, memory_budget / block_size - 1)
    std::uint64_t fan_in() const;
    std::uint64_t run_capacity() const;
};

struct SortStats {
    std::uint64_t records = 0;
    std::uint64_t initial_runs = 0;
    std::uint64_t merge_passes = 0;
    std::uint64_t run_files_created = 0;
    std::uint64_t max_files_alive = 0;
    std::uint64_t peak_buffer_bytes = 0;
};

/// Push-based external merge sort: records are buffered up to the memory
/// budget, each full buffer is sorted and spilled as a run, and runs are
/// merged with bounded fan-in until one remains.
class ExternalSorter {
public:
    explicit ExternalSorter(SortConfig cfg);
    ~ExternalSorter();
    ExternalSorter(const ExternalSorter&) = delete;
    ExternalSorter& operator=(const ExternalSorter&) = delete;

    void push(const EdgeTriplet& t);
    TripletRun finish();
    const SortStats& stats() const { return stats_; }

private:
    void spill();
    std::filesystem::path next_temp_path();
    TripletRun merge_group(std::span<TripletRun> group);

    SortConfig cfg_;
    std::vector<EdgeTriplet> buffer_;
    std::vector<TripletRun> runs_;
    SortStats stats_;
    std::uint64_t files_alive_ = 0;
    bool finished_ = false;
};

TripletRun external_sort(std::span<const EdgeTriplet> input, const SortConfig& cfg, SortStats* stats = nullptr);
TripletRun external_sort(const TripletRun& input, const SortConfig& cfg, SortStats* stats = nullptr);

}  // namespace hod
