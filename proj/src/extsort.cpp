#include "hod/extsort.hpp"

#include <algorithm>
#include <atomic>
#include <queue>
#include <string>

#include <unistd.h>

#include "hod/format.hpp"
#include "hod/kernels.hpp"

namespace hod {

std::strong_ordering triplet_compare(const EdgeTriplet& x, const EdgeTriplet& y) {
    if (auto c = x.a <=> y.a; c != 0)
        return c;
    if (auto c = x.b <=> y.b; c != 0)
        return c;
    if (auto c = x.sign <=> y.sign; c != 0)
        return c;
    if (auto c = x.length <=> y.length; c != 0)
        return c;
    if (auto c = x.kind <=> y.kind; c != 0)
        return c;
    return x.pred_hint <=> y.pred_hint;
}

// ---------------------------------------------------------------- reader / writer

namespace {
std::size_t records_per_block(std::size_t block_size) {
    return std::max<std::size_t>(1, block_size / format::kTripletRecordBytes);
}
}  // namespace

TripletReader::TripletReader(const std::filesystem::path& path, std::size_t block_size)
    : file_(path, "rb"), buf_(records_per_block(block_size) * format::kTripletRecordBytes) {
    auto bytes = file_.size();
    if (bytes % format::kTripletRecordBytes != 0)
        throw CorruptionError(path.string() + ": run length is not a multiple of the record width");
    remaining_ = bytes / format::kTripletRecordBytes;
}

bool TripletReader::next(EdgeTriplet& out) {
    if (pos_ == len_) {
        if (remaining_ == 0)
            return false;
        len_ = file_.read(buf_.data(), buf_.size());
        pos_ = 0;
        if (len_ == 0 || len_ % format::kTripletRecordBytes != 0)
            throw IoError(file_.path(), "truncated run");
    }
    out = format::decode_triplet(buf_.data() + pos_);
    pos_ += format::kTripletRecordBytes;
    --remaining_;
    return true;
}

TripletWriter::TripletWriter(const std::filesystem::path& path, std::size_t block_size)
    : file_(path, "wb"), buf_(records_per_block(block_size) * format::kTripletRecordBytes) {}

void TripletWriter::push(const EdgeTriplet& t) {
    if (len_ == buf_.size())
        drain();
    format::encode_triplet(t, buf_.data() + len_);
    len_ += format::kTripletRecordBytes;
    ++count_;
}

void TripletWriter::drain() {
    file_.write(buf_.data(), len_);
    len_ = 0;
}

std::uint64_t TripletWriter::finish() {
    drain();
    file_.close();
    return count_;
}

// ---------------------------------------------------------------- runs

TripletRun::TripletRun(std::filesystem::path path, std::uint64_t count, bool owned)
    : path_(std::move(path)), count_(count), owned_(owned) {}

TripletRun::~TripletRun() { release(); }

TripletRun::TripletRun(TripletRun&& other) noexcept
    : path_(std::move(other.path_)), count_(other.count_), owned_(std::exchange(other.owned_, false)) {}

TripletRun& TripletRun::operator=(TripletRun&& other) noexcept {
    if (this != &other) {
        release();
        path_ = std::move(other.path_);
        count_ = other.count_;
        owned_ = std::exchange(other.owned_, false);
    }
    return *this;
}

void TripletRun::release() {
    if (owned_) {
        std::error_code ec;
        std::filesystem::remove(path_, ec);
        owned_ = false;
    }
}

TripletRun TripletRun::open(const std::filesystem::path& path) {
    io::File f(path, "rb");
    auto bytes = f.size();
    if (bytes % format::kTripletRecordBytes != 0)
        throw CorruptionError(path.string() + ": run length is not a multiple of the record width");
    return TripletRun(path, bytes / format::kTripletRecordBytes, false);
}

std::vector<EdgeTriplet> TripletRun::read_all() const {
    std::vector<EdgeTriplet> out;
    out.reserve(count_);
    auto r = reader();
    EdgeTriplet t;
    while (r.next(t))
        out.push_back(t);
    return out;
}

// ---------------------------------------------------------------- sorter

std::uint64_t SortConfig::fan_in() const {
    std::uint64_t blocks = block_size ? memory_budget / block_size : 0;
    return std::max<std::uint64_t>(2, blocks > 0 ? blocks - 1 : 0);
}

std::uint64_t SortConfig::run_capacity() const {
    return std::max<std::uint64_t>(1, memory_budget / format::kTripletRecordBytes);
}

ExternalSorter::ExternalSorter(SortConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.block_size == 0 || cfg_.memory_budget < cfg_.block_size)
        throw PreconditionError("sort memory budget must hold at least one block");
    std::error_code ec;
    std::filesystem::create_directories(cfg_.temp_dir, ec);
    if (ec)
        throw IoError(cfg_.temp_dir.string(), "cannot create temp directory (" + ec.message() + ")");
}

ExternalSorter::~ExternalSorter() = default;

std::filesystem::path ExternalSorter::next_temp_path() {
    static std::atomic<std::uint64_t> counter{0};
    ++stats_.run_files_created;
    ++files_alive_;
    stats_.max_files_alive = std::max(stats_.max_files_alive, files_alive_);
    return cfg_.temp_dir /
           ("run-" + std::to_string(::getpid()) + "-" + std::to_string(counter.fetch_add(1)) + ".bin");
}

void ExternalSorter::push(const EdgeTriplet& t) {
    if (finished_)
        throw PreconditionError("push after finish");
    if (buffer_.empty())
        buffer_.reserve(std::min<std::uint64_t>(cfg_.run_capacity(), 1 << 20));
    buffer_.push_back(t);
    ++stats_.records;
    if (buffer_.size() >= cfg_.run_capacity())
        spill();
}

void ExternalSorter::spill() {
    if (buffer_.empty())
        return;
    stats_.peak_buffer_bytes =
        std::max<std::uint64_t>(stats_.peak_buffer_bytes, buffer_.size() * format::kTripletRecordBytes);
    if (cfg_.parallel_runs)
        kernels::omp::sort_triplets(buffer_);
    else
        kernels::serial::sort_triplets(buffer_);
    auto path = next_temp_path();
    TripletWriter w(path, cfg_.block_size);
    for (const auto& t : buffer_)
        w.push(t);
    runs_.emplace_back(path, w.finish());
    ++stats_.initial_runs;
    buffer_.clear();
}

TripletRun ExternalSorter::merge_group(std::span<TripletRun> group) {
    struct Head {
        EdgeTriplet t;
        std::size_t src;
    };
    auto greater = [](const Head& x, const Head& y) {
        auto c = triplet_compare(x.t, y.t);
        return c != 0 ? c > 0 : x.src > y.src;
    };
    std::vector<TripletReader> readers;
    readers.reserve(group.size());
    std::priority_queue<Head, std::vector<Head>, decltype(greater)> heap(greater);
    for (std::size_t i = 0; i < group.size(); ++i) {
        readers.push_back(group[i].reader(cfg_.block_size));
        EdgeTriplet t;
        if (readers.back().next(t))
            heap.push({t, i});
    }
    auto path = next_temp_path();
    TripletWriter w(path, cfg_.block_size);
    while (!heap.empty()) {
        Head h = heap.top();
        heap.pop();
        w.push(h.t);
        if (readers[h.src].next(h.t))
            heap.push(h);
    }
    TripletRun merged(path, w.finish());
    readers.clear();
    for (auto& r : group) {
        r = TripletRun();
        --files_alive_;
    }
    return merged;
}

TripletRun ExternalSorter::finish() {
    if (finished_)
        throw PreconditionError("finish called twice");
    finished_ = true;
    spill();
    std::vector<EdgeTriplet>().swap(buffer_);
    if (runs_.empty()) {
        auto path = next_temp_path();
        TripletWriter w(path, cfg_.block_size);
        return TripletRun(path, w.finish());
    }
    const std::uint64_t fan_in = cfg_.fan_in();
    while (runs_.size() > 1) {
        ++stats_.merge_passes;
        std::vector<TripletRun> next;
        for (std::size_t i = 0; i < runs_.size(); i += fan_in) {
            std::size_t end = std::min<std::size_t>(runs_.size(), i + fan_in);
            if (end - i == 1)
                next.push_back(std::move(runs_[i]));
            else
                next.push_back(merge_group(std::span(runs_).subspan(i, end - i)));
        }
        runs_ = std::move(next);
    }
    TripletRun out = std::move(runs_.front());
    runs_.clear();
    return out;
}

TripletRun external_sort(std::span<const EdgeTriplet> input, const SortConfig& cfg, SortStats* stats) {
    ExternalSorter sorter(cfg);
    for (const auto& t : input)
        sorter.push(t);
    auto run = sorter.finish();
    if (stats)
        *stats = sorter.stats();
    return run;
}

TripletRun external_sort(const TripletRun& input, const SortConfig& cfg, SortStats* stats) {
    ExternalSorter sorter(cfg);
    auto r = input.reader(cfg.block_size);
    EdgeTriplet t;
    while (r.next(t))
        sorter.push(t);
    auto run = sorter.finish();
    if (stats)
        *stats = sorter.stats();
    return run;
}

}  // namespace hod
