#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace parc {

// Minimal UTF-8 handling. Decoding is lenient: an invalid byte is treated as
// a single one-byte code point so malformed input never throws.

inline char32_t next_codepoint(std::string_view text, std::size_t& pos) {
    unsigned char b0 = static_cast<unsigned char>(text[pos]);
    if (b0 < 0x80) {
        ++pos;
        return b0;
    }
    int len = 0;
    char32_t cp = 0;
    if ((b0 & 0xe0) == 0xc0) { len = 2; cp = b0 & 0x1f; }
    else if ((b0 & 0xf0) == 0xe0) { len = 3; cp = b0 & 0x0f; }
    else if ((b0 & 0xf8) == 0xf0) { len = 4; cp = b0 & 0x07; }
    else { ++pos; return b0; }
    if (pos + static_cast<std::size_t>(len) > text.size()) { ++pos; return b0; }
    for (int i = 1; i < len; ++i) {
        unsigned char bi = static_cast<unsigned char>(text[pos + static_cast<std::size_t>(i)]);
        if ((bi & 0xc0) != 0x80) { ++pos; return b0; }
        cp = (cp << 6) | (bi & 0x3f);
    }
    pos += static_cast<std::size_t>(len);
    return cp;
}

inline void append_codepoint(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xc0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xe0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    } else {
        out.push_back(static_cast<char>(0xf0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3f)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3f)));
    }
}

inline bool is_unicode_space(char32_t cp) {
    switch (cp) {
        case U'\t': case U'\n': case U'\v': case U'\f': case U'\r': case U' ':
        case 0x0085: case 0x00a0: case 0x1680:
        case 0x2028: case 0x2029: case 0x202f: case 0x205f: case 0x3000:
            return true;
        default:
            return cp >= 0x2000 && cp <= 0x200a;
    }
}

// Punctuation test covering the blocks that show up in practice: ASCII,
// Latin-1, general punctuation, CJK brackets, and the Devanagari danda used
// as the Bangla full stop.
inline bool is_punctuation(char32_t cp) {
    if (cp < 0x80) {
        return (cp >= 0x21 && cp <= 0x2f) || (cp >= 0x3a && cp <= 0x40) ||
               (cp >= 0x5b && cp <= 0x60) || (cp >= 0x7b && cp <= 0x7e);
    }
    switch (cp) {
        case 0x00a1: case 0x00a7: case 0x00ab: case 0x00b6: case 0x00b7:
        case 0x00bb: case 0x00bf:
        case 0x0964: case 0x0965:       // danda, double danda
        case 0x060c: case 0x061f:       // Arabic comma, question mark
        case 0x3001: case 0x3002:       // ideographic comma, full stop
        case 0x2e80:
            return true;
        default:
            return (cp >= 0x2010 && cp <= 0x2027) || (cp >= 0x2030 && cp <= 0x205e);
    }
}

// ASCII A-Z plus the Latin-1 uppercase range; other scripts pass through.
inline char32_t lowercase_latin(char32_t cp) {
    if (cp >= U'A' && cp <= U'Z') return cp + 0x20;
    if (cp >= 0x00c0 && cp <= 0x00de && cp != 0x00d7) return cp + 0x20;
    return cp;
}

// Splits on Unicode whitespace; keeps tokens verbatim.
inline std::vector<std::string> split_whitespace(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t start = pos;
        char32_t cp = next_codepoint(text, pos);
        if (is_unicode_space(cp)) {
            if (!current.empty()) {
                tokens.push_back(std::move(current));
                current.clear();
            }
        } else {
            current.append(text.substr(start, pos - start));
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

// Metric tokenizer: split on Unicode whitespace, strip leading/trailing
// punctuation from each token, lowercase Latin letters. No stemming; no
// case folding outside the Latin ranges, so Bangla text passes unchanged.
// Tokens that are pure punctuation disappear.
inline std::vector<std::string> tokenize_for_metrics(std::string_view text) {
    std::vector<std::string> tokens;
    for (const std::string& raw : split_whitespace(text)) {
        std::vector<char32_t> cps;
        std::size_t pos = 0;
        while (pos < raw.size()) cps.push_back(next_codepoint(raw, pos));
        std::size_t begin = 0;
        std::size_t end = cps.size();
        while (begin < end && is_punctuation(cps[begin])) ++begin;
        while (end > begin && is_punctuation(cps[end - 1])) --end;
        if (begin == end) continue;
        std::string token;
        for (std::size_t i = begin; i < end; ++i) append_codepoint(token, lowercase_latin(cps[i]));
        tokens.push_back(std::move(token));
    }
    return tokens;
}

// Splits on '\n' only; a trailing '\r' per line is dropped. Empty lines
// produce no sentence.
inline std::vector<std::string> split_sentences(std::string_view text) {
    std::vector<std::string> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        std::string_view line = (nl == std::string_view::npos)
                                    ? text.substr(start)
                                    : text.substr(start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!line.empty()) lines.emplace_back(line);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    return lines;
}

// Canonical form for answer matching: trim, lowercase Latin, collapse runs
// of whitespace to a single space.
inline std::string normalize_for_match(std::string_view text) {
    std::string out;
    bool pending_space = false;
    bool seen_content = false;
    std::size_t pos = 0;
    while (pos < text.size()) {
        char32_t cp = next_codepoint(text, pos);
        if (is_unicode_space(cp)) {
            if (seen_content) pending_space = true;
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        append_codepoint(out, lowercase_latin(cp));
        seen_content = true;
    }
    return out;
}

inline std::size_t codepoint_count(std::string_view text) {
    std::size_t n = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        next_codepoint(text, pos);
        ++n;
    }
    return n;
}

// First `count` code points of `text` (whole string if shorter).
inline std::string utf8_prefix(std::string_view text, std::size_t count) {
    std::size_t pos = 0;
    std::size_t n = 0;
    while (pos < text.size() && n < count) {
        next_codepoint(text, pos);
        ++n;
    }
    return std::string(text.substr(0, pos));
}

}  // namespace parc
