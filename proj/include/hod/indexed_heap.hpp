#pragma once

#include <cstdint>
#include <utility>

#include "hod/memory.hpp"
#include "hod/types.hpp"

namespace hod {

/// Binary min-heap over ids in [0, capacity) with decrease-key. Ties on the
/// key are broken by the smaller id so pop order is deterministic.
template <typename Key>
class IndexedHeap {
public:
    static constexpr std::uint32_t npos = UINT32_MAX;

    explicit IndexedHeap(std::uint32_t capacity) : pos_(capacity, npos) {}

    bool empty() const { return heap_.empty(); }
    std::size_t size() const { return heap_.size(); }
    bool contains(std::uint32_t id) const { return pos_[id] != npos; }
    std::uint32_t top() const { return heap_.front().id; }
    const Key& top_key() const { return heap_.front().key; }
    std::uint64_t ops() const { return ops_; }

    void push(std::uint32_t id, Key key) {
        if (contains(id))
            throw InternalError("heap already holds id " + std::to_string(id));
        ++ops_;
        pos_[id] = static_cast<std::uint32_t>(heap_.size());
        heap_.push_back({key, id});
        sift_up(heap_.size() - 1);
    }

    void decrease(std::uint32_t id, Key key) {
        ++ops_;
        std::size_t i = pos_[id];
        if (key > heap_[i].key)
            throw InternalError("decrease-key would increase the key");
        heap_[i].key = key;
        sift_up(i);
    }

    std::uint32_t pop() {
        ++ops_;
        std::uint32_t id = heap_.front().id;
        pos_[id] = npos;
        if (heap_.size() > 1) {
            heap_.front() = heap_.back();
            pos_[heap_.front().id] = 0;
            heap_.pop_back();
            sift_down(0);
        } else {
            heap_.pop_back();
        }
        return id;
    }

private:
    struct Entry {
        Key key;
        std::uint32_t id;
    };

    static bool less(const Entry& x, const Entry& y) { return x.key < y.key || (x.key == y.key && x.id < y.id); }

    void place(std::size_t i, Entry e) {
        heap_[i] = e;
        pos_[e.id] = static_cast<std::uint32_t>(i);
    }

    void sift_up(std::size_t i) {
        Entry e = heap_[i];
        while (i > 0) {
            std::size_t p = (i - 1) / 2;
            if (!less(e, heap_[p]))
                break;
            place(i, heap_[p]);
            i = p;
        }
        place(i, e);
    }

    void sift_down(std::size_t i) {
        Entry e = heap_[i];
        const std::size_t n = heap_.size();
        for (;;) {
            std::size_t c = 2 * i + 1;
            if (c >= n)
                break;
            if (c + 1 < n && less(heap_[c + 1], heap_[c]))
                ++c;
            if (!less(heap_[c], e))
                break;
            place(i, heap_[c]);
            i = c;
        }
        place(i, e);
    }

    tracked_vector<Entry> heap_;
    tracked_vector<std::uint32_t> pos_;
    std::uint64_t ops_ = 0;
};

}  // namespace hod
