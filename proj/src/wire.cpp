#include "dkws/wire.hpp"

#include <bit>
#include <cstring>

namespace dkws {

namespace {

template <class T>
void put_le(std::vector<std::uint8_t>& out, T value) {
    std::uint8_t bytes[sizeof(T)];
    std::memcpy(bytes, &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = sizeof(T); i-- > 0;) out.push_back(bytes[i]);
    } else {
        out.insert(out.end(), bytes, bytes + sizeof(T));
    }
}

template <class T>
T get_le(const std::uint8_t* p) {
    std::uint8_t bytes[sizeof(T)];
    if constexpr (std::endian::native == std::endian::big) {
        for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = p[sizeof(T) - 1 - i];
    } else {
        std::memcpy(bytes, p, sizeof(T));
    }
    T value;
    std::memcpy(&value, bytes, sizeof(T));
    return value;
}

}  // namespace

std::size_t frame_size(const Frame& f) { return kFrameHeaderBytes + kTupleBytes * f.tuples.size(); }

void encode_frame(const Frame& f, std::vector<std::uint8_t>& out) {
    out.push_back(static_cast<std::uint8_t>(f.kind));
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(kTupleBytes * f.tuples.size()));
    for (const Tuple& t : f.tuples) {
        put_le<std::uint64_t>(out, t.vertex);
        put_le<std::uint32_t>(out, t.keyword);
        put_le<double>(out, t.dist);
    }
}

Frame decode_frame(const std::vector<std::uint8_t>& buf, std::size_t& pos) {
    if (buf.size() - pos < kFrameHeaderBytes) throw CodecError("truncated frame header");
    std::uint8_t kind = buf[pos];
    if (kind < 1 || kind > 7) throw CodecError("unknown frame kind " + std::to_string(kind));
    std::uint32_t len = get_le<std::uint32_t>(&buf[pos + 1]);
    if (len % kTupleBytes != 0) throw CodecError("payload length not a tuple multiple");
    if (buf.size() - pos - kFrameHeaderBytes < len) throw CodecError("truncated frame payload");
    Frame f{static_cast<MsgKind>(kind), {}};
    const std::uint8_t* p = &buf[pos + kFrameHeaderBytes];
    f.tuples.reserve(len / kTupleBytes);
    for (std::uint32_t off = 0; off < len; off += kTupleBytes)
        f.tuples.push_back({get_le<std::uint64_t>(p + off), get_le<std::uint32_t>(p + off + 8),
                            get_le<double>(p + off + 12)});
    pos += kFrameHeaderBytes + len;
    return f;
}

}  // namespace dkws
