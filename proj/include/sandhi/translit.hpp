// Copyright (c) 2026, sandhi-forge contributors
// SPDX-License-Identifier: Apache-2.0
//
// Transliteration between Devanagari, IAST and SLP1, and the character
// vocabulary used by the models.
//
// SLP1 assigns one ASCII character to every Sanskrit phoneme, so a word in
// SLP1 is simply a byte string over a fixed alphabet. All models operate on
// SLP1; Devanagari and IAST exist only at the I/O boundary.

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace sandhi {

/// Separator between constituents in a split string ("pra+utsAhaH").
inline constexpr char kSeparator = '+';

enum class Scheme { Slp1, Iast, Devanagari };

Scheme parse_scheme(std::string_view name);  // "slp1" | "iast" | "deva"
std::string_view scheme_name(Scheme scheme) noexcept;

namespace utf8 {

/// Decodes UTF-8 into code points. Malformed bytes raise UnknownCodePoint at
/// the byte offset.
std::u32string decode(std::string_view text);
std::string encode(std::u32string_view text);
void append(std::string& out, char32_t cp);

} // namespace utf8

namespace slp1 {

/// Every SLP1 character (vowels, consonants, M, H, ~ and ').
std::string_view alphabet() noexcept;
bool is_letter(char c) noexcept;
bool is_vowel(char c) noexcept;
bool is_consonant(char c) noexcept;

} // namespace slp1

/// A word over the SLP1 alphabet, optionally containing the separator.
class Slp1Text {
public:
    Slp1Text() = default;

    /// Throws UnknownCodePointError at the first character outside the
    /// alphabet.
    static Slp1Text parse(std::string_view text);
    static bool is_valid(std::string_view text) noexcept;

    const std::string& str() const noexcept { return chars_; }
    std::size_t size() const noexcept { return chars_.size(); }
    bool empty() const noexcept { return chars_.empty(); }

    friend bool operator==(const Slp1Text&, const Slp1Text&) = default;
    friend auto operator<=>(const Slp1Text&, const Slp1Text&) = default;

private:
    explicit Slp1Text(std::string chars) : chars_(std::move(chars)) {}
    std::string chars_;
};

// The codecs below pass whitespace and the separator through unchanged, so
// a line holding several words or a split string converts in one call.

std::string devanagari_to_slp1(std::string_view utf8_text);
std::string slp1_to_devanagari(std::string_view slp1_text);
std::string iast_to_slp1(std::string_view utf8_text);
std::string slp1_to_iast(std::string_view slp1_text);

std::string to_slp1(std::string_view text, Scheme from);
std::string from_slp1(std::string_view slp1_text, Scheme to);

/// Character inventory with reserved ids for the special symbols.
class Vocabulary {
public:
    static constexpr int kPad = 0;
    static constexpr int kBos = 1;
    static constexpr int kEos = 2;
    static constexpr int kUnk = 3;
    static constexpr int kSep = 4;
    static constexpr int kNumSpecials = 5;

    Vocabulary() = default;

    /// Collects every character of the corpus; throws EmptyCorpus.
    static Vocabulary build(std::span<const std::string> corpus);
    /// Rebuilds from the ordered regular characters (checkpoint load).
    static Vocabulary from_chars(std::string_view chars);

    std::size_t size() const noexcept { return kNumSpecials + chars_.size(); }
    std::optional<int> find(char c) const noexcept;
    /// Throws OovCharacter.
    int id_of(char c) const;
    /// Specials decode to '\0' except SEP which decodes to '+'.
    char char_of(int id) const;
    bool is_special(int id) const noexcept { return id >= 0 && id < kNumSpecials; }

    /// Regular characters in id order (ids start at kNumSpecials).
    const std::string& chars() const noexcept { return chars_; }

    std::vector<int> encode(std::string_view text) const;
    std::string decode(std::span<const int> ids) const;

    friend bool operator==(const Vocabulary& a, const Vocabulary& b) { return a.chars_ == b.chars_; }

private:
    std::string chars_;
    std::array<int, 256> id_of_{};
    void index();
};

} // namespace sandhi
