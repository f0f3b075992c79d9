#pragma once

// Fixed-width little-endian records shared by sort runs and index files.
//
//   adjacency block header : node u32 | edge count u32                  (8 bytes)
//   adjacency edge record  : endpoint u32 | length u64 | pred_hint u32 |
//                            kind u8 | 7 bytes zero padding            (24 bytes)
//   sort run record        : a u32 | b u32 | length u64 | pred_hint u32 |
//                            sign u8 | kind u8 | 2 bytes zero padding  (24 bytes)

#include <cstddef>
#include <cstdint>
#include <cstring>

#include "hod/types.hpp"

namespace hod::format {

inline constexpr std::size_t kBlockHeaderBytes = 8;
inline constexpr std::size_t kEdgeRecordBytes = 24;
inline constexpr std::size_t kTripletRecordBytes = 24;
inline constexpr int kVersion = 1;

inline void put_u32(std::uint8_t* p, std::uint32_t v) {
    for (int i = 0; i < 4; ++i)
        p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline void put_u64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i)
        p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}
inline std::uint32_t get_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i)
        v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}
inline std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i)
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    return v;
}

inline void encode_triplet(const EdgeTriplet& t, std::uint8_t* p) {
    std::memset(p, 0, kTripletRecordBytes);
    put_u32(p, t.a);
    put_u32(p + 4, t.b);
    put_u64(p + 8, t.length);
    put_u32(p + 16, t.pred_hint);
    p[20] = static_cast<std::uint8_t>(t.sign);
    p[21] = static_cast<std::uint8_t>(t.kind);
}

inline EdgeTriplet decode_triplet(const std::uint8_t* p) {
    EdgeTriplet t;
    t.a = get_u32(p);
    t.b = get_u32(p + 4);
    t.length = get_u64(p + 8);
    t.pred_hint = get_u32(p + 16);
    t.sign = static_cast<Sign>(p[20]);
    t.kind = static_cast<EdgeKind>(p[21]);
    return t;
}

/// Edge as persisted in an adjacency block; the sign is implied by the file.
struct StoredEdge {
    NodeId other = kNoNode;
    std::uint64_t length = 0;
    NodeId pred_hint = kNoNode;
    EdgeKind kind = EdgeKind::original;

    friend bool operator==(const StoredEdge&, const StoredEdge&) = default;
};

inline void encode_edge(const StoredEdge& e, std::uint8_t* p) {
    std::memset(p, 0, kEdgeRecordBytes);
    put_u32(p, e.other);
    put_u64(p + 4, e.length);
    put_u32(p + 12, e.pred_hint);
    p[16] = static_cast<std::uint8_t>(e.kind);
}

inline StoredEdge decode_edge(const std::uint8_t* p) {
    return StoredEdge{get_u32(p), get_u64(p + 4), get_u32(p + 12), static_cast<EdgeKind>(p[16])};
}

inline constexpr std::uint64_t block_bytes(std::uint64_t edges) {
    return kBlockHeaderBytes + edges * kEdgeRecordBytes;
}

}  // namespace hod::format
