#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <stdexcept>
#include <vector>

#include "tdmso/assignment.hpp"

namespace tdmso {

/// Message payload: a sequence of bits.
class BitString {
public:
    BitString() = default;

    std::size_t size() const { return bits_.size(); }
    bool empty() const { return bits_.empty(); }
    bool operator[](std::size_t i) const { return bits_[i]; }
    void push(bool b) { bits_.push_back(b); }
    void append(const BitString& o) { bits_.insert(bits_.end(), o.bits_.begin(), o.bits_.end()); }
    BitString slice(std::size_t from, std::size_t len) const {
        BitString s;
        s.bits_.assign(bits_.begin() + from, bits_.begin() + from + len);
        return s;
    }
    friend bool operator==(const BitString&, const BitString&) = default;

private:
    std::vector<bool> bits_;
};

class BitWriter {
public:
    /// Low `width` bits of v, most significant first.
    BitWriter& put(std::uint64_t v, std::size_t width) {
        for (std::size_t i = width; i-- > 0;) out_.push(v >> i & 1);
        return *this;
    }
    BitWriter& put_bit(bool b) {
        out_.push(b);
        return *this;
    }
    /// 7-bit groups, each preceded by a continuation bit.
    BitWriter& put_varint(std::uint64_t v) {
        do {
            std::uint64_t group = v & 0x7f;
            v >>= 7;
            out_.push(v != 0);
            put(group, 7);
        } while (v);
        return *this;
    }
    BitWriter& put_signed(std::int64_t v) {
        return put_varint((static_cast<std::uint64_t>(v) << 1) ^ static_cast<std::uint64_t>(v >> 63));
    }
    BitWriter& put_bigint(const BigInt& v) {
        if (v < 0) throw std::invalid_argument("put_bigint needs a non-negative value");
        std::vector<std::uint8_t> bytes;
        boost::multiprecision::export_bits(v, std::back_inserter(bytes), 8);
        put_varint(bytes.size());
        for (auto b : bytes) put(b, 8);
        return *this;
    }
    BitWriter& append(const BitString& s) {
        out_.append(s);
        return *this;
    }
    const BitString& bits() const { return out_; }
    BitString take() { return std::move(out_); }

private:
    BitString out_;
};

class BitReader {
public:
    explicit BitReader(const BitString& s) : s_(s) {}

    std::uint64_t get(std::size_t width) {
        if (pos_ + width > s_.size()) throw std::out_of_range("bit reader ran past the end");
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < width; ++i) v = v << 1 | s_[pos_++];
        return v;
    }
    bool get_bit() { return get(1) != 0; }
    std::uint64_t get_varint() {
        std::uint64_t v = 0;
        for (int shift = 0;; shift += 7) {
            bool more = get_bit();
            v |= get(7) << shift;
            if (!more) return v;
        }
    }
    std::int64_t get_signed() {
        std::uint64_t z = get_varint();
        return static_cast<std::int64_t>(z >> 1) ^ -static_cast<std::int64_t>(z & 1);
    }
    BigInt get_bigint() {
        std::size_t n = get_varint();
        std::vector<std::uint8_t> bytes;
        for (std::size_t i = 0; i < n; ++i) bytes.push_back(static_cast<std::uint8_t>(get(8)));
        BigInt v = 0;
        if (n) boost::multiprecision::import_bits(v, bytes.begin(), bytes.end(), 8);
        return v;
    }
    std::size_t remaining() const { return s_.size() - pos_; }
    bool done() const { return pos_ == s_.size(); }

private:
    const BitString& s_;
    std::size_t pos_ = 0;
};

/// Smallest width that can hold values 0..count-1.
inline std::size_t bits_for(std::size_t count) {
    std::size_t w = 0;
    while ((std::size_t{1} << w) < count) ++w;
    return w;
}

/// Splits a payload of k bits into ceil(k / budget) messages.
inline std::vector<BitString> chunk_payload(const BitString& payload, std::size_t budget) {
    if (budget == 0) throw std::invalid_argument("budget must be positive");
    std::vector<BitString> out;
    for (std::size_t at = 0; at < payload.size(); at += budget)
        out.push_back(payload.slice(at, std::min(budget, payload.size() - at)));
    return out;
}

inline BitString reassemble(const std::vector<BitString>& parts) {
    BitString s;
    for (const auto& p : parts) s.append(p);
    return s;
}

/// Outgoing bit stream over one port: framed payloads (varint length, then the bits), cut into
/// messages of at most `budget` bits.
class StreamOut {
public:
    void push(const BitString& payload) {
        BitWriter w;
        w.put_varint(payload.size()).append(payload);
        const BitString& b = w.bits();
        for (std::size_t i = 0; i < b.size(); ++i) pending_.push_back(b[i]);
    }
    bool empty() const { return pending_.empty(); }
    std::optional<BitString> next(std::size_t budget) {
        if (pending_.empty()) return std::nullopt;
        BitString m;
        for (std::size_t i = 0; i < budget && !pending_.empty(); ++i) {
            m.push(pending_.front());
            pending_.pop_front();
        }
        return m;
    }

private:
    std::deque<bool> pending_;
};

/// Incoming side of StreamOut.
class StreamIn {
public:
    void feed(const BitString& m) { buf_.append(m); }

    /// Next complete payload, if one has fully arrived.
    std::optional<BitString> pop() {
        // parse the varint length without consuming on failure
        std::size_t pos = 0, len = 0;
        for (int shift = 0;; shift += 7) {
            if (pos + 8 > buf_.size()) return std::nullopt;
            bool more = buf_[pos];
            std::size_t group = 0;
            for (int i = 1; i <= 7; ++i) group = group << 1 | buf_[pos + i];
            len |= group << shift;
            pos += 8;
            if (!more) break;
        }
        if (pos + len > buf_.size()) return std::nullopt;
        BitString out = buf_.slice(pos, len);
        buf_ = buf_.slice(pos + len, buf_.size() - pos - len);
        return out;
    }

private:
    BitString buf_;
};

}  // namespace tdmso
