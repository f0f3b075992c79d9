#pragma once

// Per-thread allocation accounting for query-time structures. Containers that
// must be covered by the query memory contract use tracked_vector; a
// PeakScope measures the high-water mark above its starting point.

#include <cstddef>
#include <cstdint>
#include <new>
#include <vector>

namespace hod::mem {

struct Counters {
    std::int64_t current = 0;
    std::int64_t peak = 0;
};

Counters& thread_counters();

inline void on_alloc(std::size_t bytes) {
    auto& c = thread_counters();
    c.current += static_cast<std::int64_t>(bytes);
    if (c.current > c.peak)
        c.peak = c.current;
}

inline void on_free(std::size_t bytes) { thread_counters().current -= static_cast<std::int64_t>(bytes); }

template <typename T>
struct TrackedAllocator {
    using value_type = T;

    TrackedAllocator() = default;
    template <typename U>
    TrackedAllocator(const TrackedAllocator<U>&) noexcept {}

    T* allocate(std::size_t n) {
        on_alloc(n * sizeof(T));
        return static_cast<T*>(::operator new(n * sizeof(T)));
    }
    void deallocate(T* p, std::size_t n) noexcept {
        on_free(n * sizeof(T));
        ::operator delete(p);
    }

    template <typename U>
    bool operator==(const TrackedAllocator<U>&) const noexcept { return true; }
};

class PeakScope {
public:
    PeakScope() {
        auto& c = thread_counters();
        base_ = c.current;
        saved_peak_ = c.peak;
        c.peak = c.current;
    }
    ~PeakScope() {
        auto& c = thread_counters();
        if (saved_peak_ > c.peak)
            c.peak = saved_peak_;
    }
    PeakScope(const PeakScope&) = delete;
    PeakScope& operator=(const PeakScope&) = delete;

    std::int64_t peak_bytes() const { return thread_counters().peak - base_; }
    std::int64_t live_bytes() const { return thread_counters().current - base_; }

private:
    std::int64_t base_ = 0;
    std::int64_t saved_peak_ = 0;
};

}  // namespace hod::mem

namespace hod {
template <typename T>
using tracked_vector = std::vector<T, mem::TrackedAllocator<T>>;
}
