#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dkws/graph.hpp"

namespace dkws {

// Frame layout (little endian):
//   kind    : 1 byte
//   length  : 4 bytes, payload size in bytes
//   payload : length / 20 tuples of (vertex u64, keyword u32, distance f64)
enum class MsgKind : std::uint8_t {
    Backward = 1,        // mat^b slots of an in-portal, sent to fragments holding it as out-portal
    ForwardMatch = 2,    // mat^f slots of an in-portal, sent back to requesters
    ForwardRequest = 3,  // budgets f_u[q] for an out-portal, sent to its owner
    Notify = 4,          // vertex = worker id, distance = S_i
    Push = 5,            // vertex = worker id, distance = S
    FloorReport = 6,     // vertex = worker id, keyword = query slot, distance = local frontier floor
    FloorBroadcast = 7,  // keyword = query slot, distance = global floor
};

struct Tuple {
    std::uint64_t vertex;
    std::uint32_t keyword;
    double dist;

    bool operator==(const Tuple&) const = default;
};

struct Frame {
    MsgKind kind;
    std::vector<Tuple> tuples;

    bool operator==(const Frame&) const = default;
};

inline constexpr std::size_t kFrameHeaderBytes = 5;
inline constexpr std::size_t kTupleBytes = 20;

class CodecError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

std::size_t frame_size(const Frame& f);
void encode_frame(const Frame& f, std::vector<std::uint8_t>& out);
// Decodes one frame starting at `pos`, advancing it.
Frame decode_frame(const std::vector<std::uint8_t>& buf, std::size_t& pos);

}  // namespace dkws
