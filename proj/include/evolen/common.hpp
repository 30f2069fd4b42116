#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace evolen {

// Error raised by the text-format parsers; carries a 1-based line number
// when one is known (0 otherwise).
class ParseError : public std::runtime_error {
public:
    ParseError(std::string message, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + std::move(message)
                                  : std::move(message)),
          line_(line) {}

    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// A, C, G, T -> 0..3; anything else (including N) -> -1.
inline int base_index(char c) {
    switch (c) {
    case 'A': return 0;
    case 'C': return 1;
    case 'G': return 2;
    case 'T': return 3;
    default: return -1;
    }
}

inline bool is_acgt(char c) { return base_index(c) >= 0; }
inline bool is_acgtn(char c) { return c == 'N' || is_acgt(c); }

inline bool all_acgt(std::string_view s) {
    for (char c : s)
        if (!is_acgt(c)) return false;
    return !s.empty();
}

constexpr char kBases[4] = {'A', 'C', 'G', 'T'};

inline std::uint64_t fnv1a64(std::string_view data, std::uint64_t h = 0xcbf29ce484222325ull) {
    for (unsigned char c : data) {
        h ^= c;
        h *= 0x100000001b3ull;
    }
    return h;
}

std::string to_hex(std::uint64_t v);

} // namespace evolen
