#pragma once
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ppond {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// Model or engine contract violation (inconsistent input, impossible observation, ...).
class ModelError : public std::runtime_error {
public:
    explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

class DeadEndError : public std::runtime_error {
public:
    explicit DeadEndError(const std::string& what) : std::runtime_error(what) {}
};

class CapExceededError : public std::runtime_error {
public:
    explicit CapExceededError(const std::string& what) : std::runtime_error(what) {}
};

inline uint64_t fnv1a64(const void* data, std::size_t len, uint64_t h = 1469598103934665603ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < len; ++i) {
        h ^= p[i];
        h *= 1099511628211ull;
    }
    return h;
}

inline uint64_t fnv1a64(const std::string& s, uint64_t h = 1469598103934665603ull) {
    return fnv1a64(s.data(), s.size(), h);
}

// Fixed-width bit set used for states and relaxed fact layers.
class Bitset {
public:
    Bitset() = default;
    explicit Bitset(int nbits) : nbits_(nbits), words_((nbits + 63) / 64, 0) {}

    int size() const { return nbits_; }

    bool test(int i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
    void set(int i) { words_[i >> 6] |= (uint64_t{1} << (i & 63)); }
    void clear(int i) { words_[i >> 6] &= ~(uint64_t{1} << (i & 63)); }
    void assign(int i, bool v) { v ? set(i) : clear(i); }

    bool is_subset_of(const Bitset& other) const {
        for (std::size_t w = 0; w < words_.size(); ++w)
            if (words_[w] & ~other.words_[w]) return false;
        return true;
    }

    void intersect_with(const Bitset& other) {
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
    }

    void union_with(const Bitset& other) {
        for (std::size_t w = 0; w < words_.size(); ++w) words_[w] |= other.words_[w];
    }

    int count() const {
        int n = 0;
        for (uint64_t w : words_) n += __builtin_popcountll(w);
        return n;
    }

    bool operator==(const Bitset& other) const {
        return nbits_ == other.nbits_ && words_ == other.words_;
    }
    bool operator!=(const Bitset& other) const { return !(*this == other); }

    // Lexicographic over bit indices, a set bit ordering before an unset one.
    // Equivalently: compare the sorted lists of set indices element-wise.
    int compare(const Bitset& other) const {
        for (std::size_t w = 0; w < words_.size(); ++w) {
            uint64_t diff = words_[w] ^ other.words_[w];
            if (diff) {
                int bit = __builtin_ctzll(diff);
                return ((words_[w] >> bit) & 1u) ? -1 : 1;
            }
        }
        return 0;
    }
    bool operator<(const Bitset& other) const { return compare(other) < 0; }

    uint64_t hash() const {
        uint64_t h = fnv1a64(&nbits_, sizeof(nbits_));
        if (!words_.empty()) h = fnv1a64(words_.data(), words_.size() * sizeof(uint64_t), h);
        return h;
    }

    std::string to_hex() const {
        static const char* digits = "0123456789abcdef";
        int nyb = (nbits_ + 3) / 4;
        std::string out(nyb, '0');
        for (int i = 0; i < nyb; ++i) {
            int word = i / 16, shift = (i % 16) * 4;
            unsigned v = word < static_cast<int>(words_.size())
                             ? static_cast<unsigned>((words_[word] >> shift) & 0xf)
                             : 0u;
            out[nyb - 1 - i] = digits[v];
        }
        return out;
    }

    static Bitset from_hex(int nbits, const std::string& hex) {
        Bitset out(nbits);
        int nyb = (nbits + 3) / 4;
        if (static_cast<int>(hex.size()) != nyb)
            throw std::runtime_error("bad state width in '" + hex + "'");
        for (int i = 0; i < nyb; ++i) {
            char c = hex[nyb - 1 - i];
            unsigned v;
            if (c >= '0' && c <= '9') v = c - '0';
            else if (c >= 'a' && c <= 'f') v = 10 + (c - 'a');
            else throw std::runtime_error("bad hex digit in '" + hex + "'");
            if (static_cast<std::size_t>(i / 16) < out.words_.size())
                out.words_[i / 16] |= static_cast<uint64_t>(v) << ((i % 16) * 4);
        }
        return out;
    }

    const std::vector<uint64_t>& words() const { return words_; }

private:
    int nbits_ = 0;
    std::vector<uint64_t> words_;
};

}  // namespace ppond
